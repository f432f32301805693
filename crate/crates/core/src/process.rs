//! The two-dimensional cylindrical stable process: independent stable
//! coordinates, so every jump is axis-aligned. Path simulation on a fixed
//! observation grid, rectangle exits, and both sides of the exit identity
//! `P^x(X(tau_D) in A, t1 < tau_D < t2) = int_D int p_D(s,x,y) ds mu_y(A) dy`.

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::spectral::Killed1d;
use crate::stable::{sample_increment, Interval, McEstimate, StableParams};

/// Open axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rectangle {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(x_lo < x_hi && y_lo < y_hi) {
            return Err(Error::invalid("rectangle", "need x_lo < x_hi and y_lo < y_hi"));
        }
        Ok(Rectangle {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    /// The default witness set `(-2, 2) x (-2, 2)`.
    pub fn standard() -> Self {
        Rectangle {
            x_lo: -2.0,
            x_hi: 2.0,
            y_lo: -2.0,
            y_hi: 2.0,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.x_lo < p[0] && p[0] < self.x_hi && self.y_lo < p[1] && p[1] < self.y_hi
    }

    pub fn x_interval(&self) -> Interval {
        Interval {
            lo: self.x_lo,
            hi: self.x_hi,
        }
    }

    pub fn y_interval(&self) -> Interval {
        Interval {
            lo: self.y_lo,
            hi: self.y_hi,
        }
    }

    /// True when `other` does not meet the closure of `self`.
    pub fn disjoint_from_closure_of(&self, other: &Rectangle) -> bool {
        self.x_hi < other.x_lo || self.x_lo > other.x_hi || self.y_hi < other.y_lo
            || self.y_lo > other.y_hi
    }
}

/// A discretely observed trajectory with a log of large (axis-attributed)
/// jumps.
#[derive(Debug, Clone)]
pub struct PathSample {
    /// Strictly increasing observation times starting at 0.
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    /// `(step index, displacement)` for steps whose displacement exceeds the
    /// logging threshold `5 step^{1/alpha}`. The displacement is attributed
    /// to its dominant axis (the other coordinate is recorded as exactly 0),
    /// matching the singular support of the jump measure.
    pub jumps: Vec<(usize, [f64; 2])>,
}

/// Observed first exit from a rectangle.
#[derive(Debug, Clone, Copy)]
pub struct ExitRecord {
    /// First observation time outside (or the horizon when censored).
    pub exit_time: f64,
    /// Last observed position inside.
    pub pre_exit: [f64; 2],
    /// First observed position outside; equals the last observed position
    /// when censored.
    pub post_exit: [f64; 2],
    /// Horizon reached without leaving.
    pub censored: bool,
}

/// Simulates the cylindrical process from `x0` on a fixed grid of step
/// `step` up to `horizon`. Both coordinates advance by independent exact
/// stable increments per step.
pub fn sample_path(
    x0: [f64; 2],
    horizon: f64,
    step: f64,
    p: &StableParams,
    rng: &mut Stream,
) -> Result<PathSample> {
    if !(step > 0.0) || !(horizon > 0.0) {
        return Err(Error::invalid("step", "step and horizon must be positive"));
    }
    if step > horizon {
        return Err(Error::invalid("step", "step must not exceed the horizon"));
    }
    let n_steps = (horizon / step).ceil() as usize;
    let dt = horizon / n_steps as f64;
    let threshold = 5.0 * dt.powf(1.0 / p.alpha());
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut jumps = Vec::new();
    times.push(0.0);
    positions.push(x0);
    let mut pos = x0;
    for k in 0..n_steps {
        let dx = sample_increment(dt, p, rng);
        let dy = sample_increment(dt, p, rng);
        pos = [pos[0] + dx, pos[1] + dy];
        times.push((k + 1) as f64 * dt);
        positions.push(pos);
        if dx.hypot(dy) > threshold {
            let logged = if dx.abs() >= dy.abs() {
                [dx, 0.0]
            } else {
                [0.0, dy]
            };
            jumps.push((k + 1, logged));
        }
    }
    Ok(PathSample {
        times,
        positions,
        jumps,
    })
}

/// First observed exit of `path` from `rect`.
pub fn first_exit(path: &PathSample, rect: &Rectangle) -> Result<ExitRecord> {
    if !rect.contains(path.positions[0]) {
        return Err(Error::invalid("path", "path must start inside the rectangle"));
    }
    for (k, pos) in path.positions.iter().enumerate().skip(1) {
        if !rect.contains(*pos) {
            return Ok(ExitRecord {
                exit_time: path.times[k],
                pre_exit: path.positions[k - 1],
                post_exit: *pos,
                censored: false,
            });
        }
    }
    let last = path.positions.len() - 1;
    Ok(ExitRecord {
        exit_time: path.times[last],
        pre_exit: path.positions[last],
        post_exit: path.positions[last],
        censored: true,
    })
}

/// Monte Carlo estimate of `P^x(X(tau_D) in A, t1 < tau_D < t2)`.
///
/// Paths run until exit or the censoring horizon `10 t2`; censored paths
/// count as non-events.
#[allow(clippy::too_many_arguments)]
pub fn ikeda_watanabe_lhs(
    x: [f64; 2],
    rect: &Rectangle,
    target: &Rectangle,
    t1: f64,
    t2: f64,
    n_paths: usize,
    step: f64,
    p: &StableParams,
    seed: u64,
) -> Result<McEstimate> {
    check_iw_geometry(x, rect, target, t1, t2)?;
    let horizon = 10.0 * t2;
    let n_steps = (horizon / step).ceil() as usize;
    let dt = horizon / n_steps as f64;
    let (rect, target, p) = (*rect, *target, *p);
    let (mean, stderr) = rng::parallel_mc(n_paths, seed, move |_idx, stream| {
        let mut pos = x;
        for k in 0..n_steps {
            pos[0] += sample_increment(dt, &p, stream);
            pos[1] += sample_increment(dt, &p, stream);
            if !rect.contains(pos) {
                let tau = (k + 1) as f64 * dt;
                return if t1 < tau && tau < t2 && target.contains(pos) {
                    1.0
                } else {
                    0.0
                };
            }
        }
        0.0
    });
    Ok(McEstimate {
        mean,
        stderr,
        n_paths,
        step: dt,
    })
}

fn check_iw_geometry(
    x: [f64; 2],
    rect: &Rectangle,
    target: &Rectangle,
    t1: f64,
    t2: f64,
) -> Result<()> {
    if !rect.contains(x) {
        return Err(Error::invalid("x", "start must lie inside the rectangle"));
    }
    if !target.disjoint_from_closure_of(rect) {
        return Err(Error::invalid(
            "target",
            "target must not meet the closure of the rectangle",
        ));
    }
    if !(0.0 <= t1 && t1 <= t2) {
        return Err(Error::invalid("window", "need 0 <= t1 <= t2"));
    }
    Ok(())
}

/// The exit-position intensity anchored at `y`: two power-law lines along
/// the coordinate axes through `y`, each with density
/// `A_alpha |z_i - y_i|^{-1-alpha}`. Total mass is infinite; only integrals
/// against sets bounded away from the anchor are exposed.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryMeasure {
    pub anchor: [f64; 2],
    pub params: StableParams,
}

impl BoundaryMeasure {
    pub fn new(anchor: [f64; 2], params: StableParams) -> Self {
        BoundaryMeasure { anchor, params }
    }

    /// `int_lo^hi A |z - c|^{-1-alpha} dz` for a segment strictly on one
    /// side of the anchor coordinate `c` (closed-form power antiderivative).
    fn segment_mass(&self, c: f64, lo: f64, hi: f64) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        if lo <= c && c <= hi {
            return Err(Error::invalid(
                "segment",
                "segment must be bounded away from the anchor",
            ));
        }
        let alpha = self.params.alpha();
        let a = self.params.levy_const();
        let (near, far) = if lo > c {
            (lo - c, hi - c)
        } else {
            (c - hi, c - lo)
        };
        Ok(a / alpha * (near.powf(-alpha) - far.powf(-alpha)))
    }

    /// Measure of an axis-aligned rectangle not containing the anchor.
    pub fn rect_mass(&self, target: &Rectangle) -> Result<f64> {
        let [ax, ay] = self.anchor;
        let mut total = 0.0;
        // horizontal line through the anchor crosses the target's y-range
        if target.y_lo < ay && ay < target.y_hi {
            total += self.segment_mass(ax, target.x_lo, target.x_hi)?;
        }
        // vertical line
        if target.x_lo < ax && ax < target.x_hi {
            total += self.segment_mass(ay, target.y_lo, target.y_hi)?;
        }
        Ok(total)
    }
}

/// Quadrature configuration of the deterministic exit-identity side.
#[derive(Debug, Clone, Copy)]
pub struct IwQuadConfig {
    /// Cells per axis of each killed-generator grid.
    pub n: usize,
}

impl Default for IwQuadConfig {
    fn default() -> Self {
        IwQuadConfig { n: 256 }
    }
}

/// Deterministic evaluation of
/// `int_D int_{t1}^{t2} p_D(s, x, y) ds mu_y(A) dy` using the product form
/// of the killed density on rectangles and the closed-form power
/// antiderivative for `mu_y(A)`.
pub fn ikeda_watanabe_rhs(
    x: [f64; 2],
    rect: &Rectangle,
    target: &Rectangle,
    t1: f64,
    t2: f64,
    p: &StableParams,
    quad: &IwQuadConfig,
) -> Result<f64> {
    check_iw_geometry(x, rect, target, t1, t2)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    let kx = Killed1d::new(rect.x_interval(), quad.n, p)?;
    let ky = Killed1d::new(rect.y_interval(), quad.n, p)?;
    let n = quad.n;
    let (hx, hy) = (kx.h(), ky.h());
    let (ix, iy) = (kx.nearest(x[0]), ky.nearest(x[1]));

    // mu_y(A) = 1_{(Ay)}(y2) m_h(y1) + 1_{(Ax)}(y1) m_v(y2): separable, so
    // the double integral factorizes into 1D brackets per eigenpair.
    // Masses are only consumed where the transverse indicator is nonzero;
    // disjointness of the target from the closure of `rect` guarantees the
    // anchor is outside the segment exactly in those cases.
    let mut m_h = vec![0.0; n];
    let mut m_v = vec![0.0; n];
    for r in 0..n {
        let cx = kx.node(r);
        if cx < target.x_lo || cx > target.x_hi {
            let bm = BoundaryMeasure::new([cx, 0.0], *p);
            m_h[r] = bm.segment_mass(cx, target.x_lo, target.x_hi)?;
        }
        let cy = ky.node(r);
        if cy < target.y_lo || cy > target.y_hi {
            let bm = BoundaryMeasure::new([0.0, cy], *p);
            m_v[r] = bm.segment_mass(cy, target.y_lo, target.y_hi)?;
        }
    }
    let in_ax = |y1: f64| target.x_lo < y1 && y1 < target.x_hi;
    let in_ay = |y2: f64| target.y_lo < y2 && y2 < target.y_hi;

    // brackets over the x-factor eigenpairs
    let mut bracket_x_mh = vec![0.0; n]; // <psi_i, m_h>
    let mut bracket_x_ind = vec![0.0; n]; // <psi_i, 1_{Ax}>
    for m in 0..n {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for r in 0..n {
            let v = kx.eigenfunction(m, r);
            s1 += v * m_h[r];
            if in_ax(kx.node(r)) {
                s2 += v;
            }
        }
        bracket_x_mh[m] = s1 * hx;
        bracket_x_ind[m] = s2 * hx;
    }
    let mut bracket_y_mv = vec![0.0; n];
    let mut bracket_y_ind = vec![0.0; n];
    for m in 0..n {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for r in 0..n {
            let v = ky.eigenfunction(m, r);
            s1 += v * m_v[r];
            if in_ay(ky.node(r)) {
                s2 += v;
            }
        }
        bracket_y_mv[m] = s1 * hy;
        bracket_y_ind[m] = s2 * hy;
    }

    let mut total = 0.0;
    for mi in 0..n {
        let mu = kx.eigenvalues()[mi];
        let psi_x = kx.eigenfunction(mi, ix);
        if psi_x == 0.0 {
            continue;
        }
        for mj in 0..n {
            let rate = mu + ky.eigenvalues()[mj];
            let time_factor = ((-rate * t1).exp() - (-rate * t2).exp()) / rate;
            if time_factor < 1e-300 {
                continue;
            }
            let w = psi_x * ky.eigenfunction(mj, iy) * time_factor;
            total += w
                * (bracket_x_mh[mi] * bracket_y_ind[mj] + bracket_x_ind[mi] * bracket_y_mv[mj]);
        }
    }
    Ok(total.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stable::survival_prob_1d;

    fn params(alpha: f64) -> StableParams {
        StableParams::new(alpha).unwrap()
    }

    #[test]
    fn single_step_path_has_two_positions() {
        let p = params(1.0);
        let mut s = substream(1, 0);
        let path = sample_path([0.0, 0.0], 0.5, 0.5, &p, &mut s).unwrap();
        assert_eq!(path.positions.len(), 2);
        assert_eq!(path.times, vec![0.0, 0.5]);
    }

    #[test]
    fn logged_jumps_are_axis_aligned() {
        let p = params(0.8);
        let mut s = substream(2, 0);
        let path = sample_path([0.0, 0.0], 5.0, 0.01, &p, &mut s).unwrap();
        assert!(!path.jumps.is_empty());
        for (_, d) in &path.jumps {
            assert!(d[0] == 0.0 || d[1] == 0.0);
        }
    }

    #[test]
    fn endpoint_marginals_match_1d_law() {
        // KS of each coordinate of the endpoint against the exact sampler
        let p = params(1.2);
        let n = 30_000;
        let horizon = 1.0;
        let mut ends_x = Vec::with_capacity(n);
        let mut ends_y = Vec::with_capacity(n);
        for idx in 0..n {
            let mut s = substream(77, idx as u64);
            let path = sample_path([0.0, 0.0], horizon, 0.05, &p, &mut s).unwrap();
            let e = path.positions.last().unwrap();
            ends_x.push(e[0]);
            ends_y.push(e[1]);
        }
        let mut reference: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = substream(78, i as u64);
                sample_increment(horizon, &p, &mut s)
            })
            .collect();
        for ends in [&mut ends_x, &mut ends_y] {
            ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
            reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
            while i < n && j < n {
                if ends[i] <= reference[j] {
                    i += 1;
                } else {
                    j += 1;
                }
                ks = ks.max((i as f64 - j as f64).abs() / n as f64);
            }
            assert!(ks < 0.015, "KS {ks}");
        }
    }

    #[test]
    fn endpoint_coordinates_are_uncorrelated() {
        let p = params(1.5);
        let n = 100_000;
        let mut sum_xy = 0.0;
        let mut sum_x2 = 0.0;
        let mut sum_y2 = 0.0;
        for idx in 0..n {
            let mut s = substream(79, idx as u64);
            let path = sample_path([0.0, 0.0], 0.4, 0.1, &p, &mut s).unwrap();
            let e = path.positions.last().unwrap();
            // clip to tame heavy tails; independence survives monotone maps
            let (cx, cy) = (e[0].clamp(-5.0, 5.0), e[1].clamp(-5.0, 5.0));
            sum_xy += cx * cy;
            sum_x2 += cx * cx;
            sum_y2 += cy * cy;
        }
        let corr = sum_xy / (sum_x2 * sum_y2).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt() * 1.5, "corr {corr}");
    }

    #[test]
    fn exit_detection_and_censoring() {
        let rect = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        // hand-built path: inside, inside, outside
        let path = PathSample {
            times: vec![0.0, 0.1, 0.2],
            positions: vec![[0.0, 0.0], [0.5, -0.2], [3.0, -0.2]],
            jumps: vec![],
        };
        let rec = first_exit(&path, &rect).unwrap();
        assert!(!rec.censored);
        assert_eq!(rec.exit_time, 0.2);
        assert_eq!(rec.pre_exit, [0.5, -0.2]);
        assert_eq!(rec.post_exit, [3.0, -0.2]);
        assert!(rect.contains(rec.pre_exit) && !rect.contains(rec.post_exit));

        let inside = PathSample {
            times: vec![0.0, 0.1],
            positions: vec![[0.0, 0.0], [0.2, 0.2]],
            jumps: vec![],
        };
        assert!(first_exit(&inside, &rect).unwrap().censored);

        let outside_start = PathSample {
            times: vec![0.0],
            positions: vec![[5.0, 0.0]],
            jumps: vec![],
        };
        assert!(first_exit(&outside_start, &rect).is_err());
    }

    #[test]
    fn tiny_rectangle_exits_immediately() {
        let p = params(1.0);
        let rect = Rectangle::new(-1e-6, 1e-6, -1e-6, 1e-6).unwrap();
        let mut exits = 0;
        for idx in 0..200 {
            let mut s = substream(80, idx);
            let path = sample_path([0.0, 0.0], 1.0, 0.01, &p, &mut s).unwrap();
            let rec = first_exit(&path, &rect).unwrap();
            if !rec.censored && rec.exit_time <= 0.01 + 1e-12 {
                exits += 1;
            }
        }
        assert!(exits >= 199, "{exits}/200 immediate exits");
    }

    #[test]
    fn square_survival_factorizes_into_1d_product() {
        let p = params(1.0);
        let rect = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let (t, step) = (0.7, 1.0 / 128.0);
        let n = 40_000;
        let (joint, joint_se) = crate::rng::parallel_mc(n, 81, |_i, s| {
            let path = sample_path([0.0, 0.0], t, step, &p, s).unwrap();
            if first_exit(&path, &rect).unwrap().censored {
                1.0
            } else {
                0.0
            }
        });
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let sx = survival_prob_1d(iv, t, 0.0, &p, n, step, 82).unwrap();
        let sy = survival_prob_1d(iv, t, 0.0, &p, n, step, 83).unwrap();
        let prod = sx.mean * sy.mean;
        let prod_se = (sx.stderr * sy.mean).hypot(sy.stderr * sx.mean);
        let joint_tol = 3.0 * joint_se.hypot(prod_se);
        assert!(
            (joint - prod).abs() <= joint_tol,
            "joint {joint} vs product {prod} (tol {joint_tol})"
        );
    }

    #[test]
    fn boundary_measure_closed_form() {
        let p = params(1.0);
        let bm = BoundaryMeasure::new([0.0, 0.0], p);
        // int_1^2 (1/pi) z^{-2} dz = (1/pi)(1 - 1/2)
        let m = bm.segment_mass(0.0, 1.0, 2.0).unwrap();
        approx::assert_relative_eq!(m, 0.5 / std::f64::consts::PI, max_relative = 1e-13);
        assert!(bm.segment_mass(0.0, -0.5, 0.5).is_err());
        // symmetric about the anchor
        approx::assert_relative_eq!(
            bm.segment_mass(0.0, -2.0, -1.0).unwrap(),
            m,
            max_relative = 1e-13
        );
    }

    #[test]
    fn iw_rejects_bad_geometry() {
        let p = params(1.0);
        let rect = Rectangle::standard();
        let overlapping = Rectangle::new(1.0, 3.0, 0.0, 1.0).unwrap();
        assert!(
            ikeda_watanabe_lhs([0.0, 0.0], &rect, &overlapping, 0.1, 0.5, 100, 0.01, &p, 0)
                .is_err()
        );
        let touching = Rectangle::new(2.0, 3.0, 0.0, 1.0).unwrap();
        assert!(
            ikeda_watanabe_lhs([0.0, 0.0], &rect, &touching, 0.1, 0.5, 100, 0.01, &p, 0).is_err()
        );
        let fine = Rectangle::new(2.5, 3.5, 0.0, 1.0).unwrap();
        assert!(
            ikeda_watanabe_lhs([5.0, 0.0], &rect, &fine, 0.1, 0.5, 100, 0.01, &p, 0).is_err()
        );
    }

    #[test]
    fn iw_empty_time_window_is_zero() {
        let p = params(1.0);
        let rect = Rectangle::standard();
        let target = Rectangle::new(4.0, 5.0, -0.5, 0.5).unwrap();
        let rhs = ikeda_watanabe_rhs(
            [0.0, 0.0],
            &rect,
            &target,
            0.3,
            0.3,
            &p,
            &IwQuadConfig { n: 64 },
        )
        .unwrap();
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn iw_estimate_decays_with_target_distance() {
        let p = params(1.0);
        let rect = Rectangle::standard();
        let mut last = f64::INFINITY;
        for &d in &[3.0, 6.0, 12.0] {
            let target = Rectangle::new(d, d + 1.0, -0.5, 0.5).unwrap();
            let v = ikeda_watanabe_rhs(
                [0.0, 0.0],
                &rect,
                &target,
                0.1,
                0.5,
                &p,
                &IwQuadConfig { n: 128 },
            )
            .unwrap();
            assert!(v < last && v > 0.0, "distance {d}: {v} !< {last}");
            last = v;
        }
    }

    #[test]
    fn iw_sides_agree_on_reference_configuration() {
        let p = params(1.0);
        let rect = Rectangle::standard();
        let target = Rectangle::new(4.0, 5.0, -0.5, 0.5).unwrap();
        let lhs = ikeda_watanabe_lhs(
            [0.0, 0.0],
            &rect,
            &target,
            0.1,
            0.5,
            200_000,
            1.0 / 256.0,
            &p,
            91,
        )
        .unwrap();
        let rhs = ikeda_watanabe_rhs([0.0, 0.0], &rect, &target, 0.1, 0.5, &p, &IwQuadConfig::default())
            .unwrap();
        assert!(
            (lhs.mean - rhs).abs() <= 3.0 * lhs.stderr,
            "lhs {} +- {} vs rhs {}",
            lhs.mean,
            lhs.stderr,
            rhs
        );
    }
}
