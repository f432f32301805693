// scratch calibration harness; not part of the deliverable surface
use cylfrac::potential::Profile;
use cylfrac::spectral::{ground_state, Grid1d, Operator2d};
use cylfrac::stable::StableParams;
use std::time::Instant;

fn fit(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.0.ln() - mx)).sum();
    num / den
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let beta: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let r: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(24.0);
    let n: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(384);
    let k: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(8);

    let t0 = Instant::now();
    let grid = Grid1d::new(r, n).unwrap();
    let p = StableParams::new(alpha).unwrap();
    let profile = Profile::power(beta).unwrap();
    let op = Operator2d::new(grid, p, profile.clone());
    eprintln!("operator built: {:?}", t0.elapsed());

    let t1 = Instant::now();
    let gs = ground_state(&op, k).unwrap();
    eprintln!("ground state ({k} pairs): {:?}", t1.elapsed());
    eprintln!("lambdas: {:?}", gs.lambdas);
    eprintln!("residuals: {:?}", gs.residual_norms);
    eprintln!("phi1 min {:.3e}", gs.phi1().iter().cloned().fold(f64::INFINITY, f64::min));

    // axis fit: nodes along the row nearest x2 = 0, x1 in [3, 0.7R]
    let j0 = grid.nearest(0.0);
    let mut axis = Vec::new();
    for i in 0..n {
        let x = grid.node(i);
        if x >= 3.0 && x <= 0.7 * r {
            axis.push((x, gs.phi1_at(i, j0)));
        }
    }
    let slope_axis = fit(&axis);
    eprintln!(
        "axis slope: {slope_axis:.4} (target {:.4}, +-10% band)",
        -(1.0 + alpha + beta)
    );

    // diagonal fit: nodes (i, i) with x in [3, 0.7R] measured by x1
    let mut diag = Vec::new();
    for i in 0..n {
        let x = grid.node(i);
        if x >= 3.0 && x <= 0.7 * r {
            diag.push((x, gs.phi1_at(i, i)));
        }
    }
    let slope_diag = fit(&diag);
    eprintln!(
        "diag slope: {slope_diag:.4} (target {:.4})",
        -(2.0 * (1.0 + alpha) + 2.0 * beta)
    );

    // two-sided envelope ratio on 3 <= |x| <= 0.7R
    for norm_kind in ["euclid", "inf"] {
        let mut c_lo = f64::INFINITY;
        let mut c_hi = f64::NEG_INFINITY;
        let mut at_lo = (0.0, 0.0);
        let mut at_hi = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (grid.node(i), grid.node(j));
                let rr = x.hypot(y);
                let measure = if norm_kind == "euclid" { rr } else { x.abs().max(y.abs()) };
                if measure < 3.0 || measure > 0.7 * r {
                    continue;
                }
                let env = 1.0
                    / ((x.abs() + 1.0).powf(1.0 + alpha)
                        * (y.abs() + 1.0).powf(1.0 + alpha)
                        * (profile.eval_radial(x.abs().min(y.abs())) + 1.0)
                        * (profile.eval_radial(rr) + 1.0));
                let ratio = gs.phi1_at(i, j) / env;
                if ratio < c_lo {
                    c_lo = ratio;
                    at_lo = (x, y);
                }
                if ratio > c_hi {
                    c_hi = ratio;
                    at_hi = (x, y);
                }
            }
        }
        eprintln!(
            "two-sided[{norm_kind}]: c_lo {c_lo:.4e} @ {at_lo:?}  c_hi {c_hi:.4e} @ {at_hi:?}  ratio {:.2}",
            c_hi / c_lo
        );
    }
    eprintln!("total: {:?}", t0.elapsed());
}
