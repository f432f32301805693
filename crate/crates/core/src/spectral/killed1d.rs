//! Dense eigendecomposition of the killed 1D generator on an interval: the
//! deterministic reference for survival probabilities and killed transition
//! densities of the one-dimensional stable process.

use super::flap1d::flap_matrix_on_interval;
use crate::error::{Error, Result};
use crate::stable::{Interval, StableParams};
use nalgebra::DMatrix;

/// Eigenpairs of the killed generator on `(lo, hi)`.
///
/// Eigenfunctions are stored `L^2`-normalized on the midpoint grid, so
/// `p_U(t, x, y) = sum_m exp(-mu_m t) psi_m(x) psi_m(y)` has the right units.
pub struct Killed1d {
    iv: Interval,
    n: usize,
    h: f64,
    evals: Vec<f64>,
    /// column `m` holds `psi_m` on the grid
    evecs: DMatrix<f64>,
}

impl Killed1d {
    pub fn new(iv: Interval, n: usize, p: &StableParams) -> Result<Self> {
        if n < 16 || n > 4096 {
            return Err(Error::invalid("n", "killed-generator grid wants 16 <= n <= 4096"));
        }
        let h = iv.width() / n as f64;
        let m = flap_matrix_on_interval(n, iv.lo, iv.hi, p);
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let evals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut evecs = DMatrix::zeros(n, n);
        for (slot, &i) in order.iter().enumerate() {
            let col = eig.eigenvectors.column(i);
            let scale = 1.0 / (col.norm() * h.sqrt());
            for r in 0..n {
                evecs[(r, slot)] = col[r] * scale;
            }
        }
        Ok(Killed1d {
            iv,
            n,
            h,
            evals,
            evecs,
        })
    }

    pub fn interval(&self) -> Interval {
        self.iv
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.iv.lo + (i as f64 + 0.5) * self.h
    }

    pub fn nearest(&self, x: f64) -> usize {
        let raw = ((x - self.iv.lo) / self.h - 0.5).round();
        (raw.max(0.0) as usize).min(self.n - 1)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.evals
    }

    pub fn eigenfunction(&self, m: usize, i: usize) -> f64 {
        self.evecs[(i, m)]
    }

    /// `P^x(tau > t)` by eigen-expansion, `x` snapped to the nearest node.
    pub fn survival(&self, t: f64, x: f64) -> f64 {
        let i = self.nearest(x);
        let mut total = 0.0;
        for m in 0..self.n {
            let w = (-self.evals[m] * t).exp();
            if w < 1e-300 {
                break;
            }
            let mass: f64 = (0..self.n).map(|r| self.evecs[(r, m)]).sum::<f64>() * self.h;
            total += w * self.evecs[(i, m)] * mass;
        }
        total.clamp(0.0, 1.0)
    }

    /// Killed transition density `p_U(t, x, y)` at nodes nearest `x`, `y`.
    pub fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        let (i, j) = (self.nearest(x), self.nearest(y));
        let mut total = 0.0;
        for m in 0..self.n {
            let w = (-self.evals[m] * t).exp();
            if w < 1e-300 {
                break;
            }
            total += w * self.evecs[(i, m)] * self.evecs[(j, m)];
        }
        total.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_decays_and_density_is_symmetric() {
        let p = StableParams::new(1.0).unwrap();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let k = Killed1d::new(iv, 128, &p).unwrap();
        let s1 = k.survival(0.5, 0.0);
        let s2 = k.survival(1.0, 0.0);
        assert!(0.0 < s2 && s2 < s1 && s1 < 1.0);
        let d1 = k.density(0.5, 0.2, -0.4);
        let d2 = k.density(0.5, -0.4, 0.2);
        assert_eq!(d1, d2);
    }

    #[test]
    fn killed_density_below_free_density() {
        let p = StableParams::new(1.3).unwrap();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let k = Killed1d::new(iv, 256, &p).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.5), (0.9, 0.9)] {
            let killed = k.density(0.3, x, y);
            let free = crate::stable::transition_density_1d(0.3, x, y, &p).unwrap();
            assert!(
                killed <= free * (1.0 + 5e-2) + 1e-9,
                "killed {killed} vs free {free} at ({x},{y})"
            );
        }
    }

    #[test]
    fn boundary_decay_is_qualitative_delta_alpha_half() {
        // ground eigenfunction decays toward the boundary; log-log slope of
        // psi_1 against distance-to-boundary should be near alpha/2
        let p = StableParams::new(1.0).unwrap();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let k = Killed1d::new(iv, 1024, &p).unwrap();
        let mut pts = Vec::new();
        for i in 2..40 {
            let x = k.node(i);
            let delta = x - iv.lo;
            pts.push(((delta).ln(), k.eigenfunction(0, i).abs().ln()));
        }
        let nf = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
        assert!(
            (slope - 0.5).abs() < 0.12,
            "boundary exponent {slope}, expected ~ alpha/2 = 0.5"
        );
    }
}
