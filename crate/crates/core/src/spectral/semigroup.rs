//! Split-step evaluation of `exp(-t H)` applied to grid functions.
//!
//! Strang splitting `exp(-dt V/2) exp(-dt L) exp(-dt V/2)` where the kinetic
//! factor is exact: `exp(-dt (L (+) L)) = exp(-dt L) (x) exp(-dt L)` from one
//! dense eigendecomposition of the 1D matrix. There is no stability limit;
//! `dt` only controls the splitting error, which callers probe by halving.

use super::{Grid1d, Operator2d};
use nalgebra::DMatrix;

/// Reusable propagator for one operator.
pub struct Propagator {
    grid: Grid1d,
    basis: DMatrix<f64>,
    evals: Vec<f64>,
    vpot: DMatrix<f64>,
}

impl Propagator {
    pub fn new(op: &Operator2d) -> Self {
        let eig = nalgebra::SymmetricEigen::new(op.lap1().clone());
        Propagator {
            grid: *op.grid(),
            basis: eig.eigenvectors.clone(),
            evals: eig.eigenvalues.iter().cloned().collect(),
            vpot: op.potential_grid().clone(),
        }
    }

    pub fn grid(&self) -> &Grid1d {
        &self.grid
    }

    /// `exp(-dt L)` in the collocation basis.
    fn kinetic_step(&self, dt: f64) -> DMatrix<f64> {
        let n = self.grid.n();
        let mut scaled = self.basis.clone();
        for (c, &lam) in self.evals.iter().enumerate() {
            let w = (-dt * lam).exp();
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        &scaled * self.basis.transpose()
    }

    /// `exp(-t H) u0` with `n_steps` Strang steps.
    pub fn apply(&self, u0: &DMatrix<f64>, t: f64, n_steps: usize) -> DMatrix<f64> {
        assert!(t > 0.0 && n_steps > 0);
        let dt = t / n_steps as f64;
        let m = self.kinetic_step(dt);
        let ehalf = self.vpot.map(|v| (-0.5 * dt * v).exp());
        let mut u = u0.clone();
        for _ in 0..n_steps {
            u.component_mul_assign(&ehalf);
            u = &m * u;
            u = u * &m; // m is symmetric
            u.component_mul_assign(&ehalf);
        }
        u
    }

    /// Indicator grid function of a rectangle (cell centers inside count).
    pub fn indicator_rect(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> DMatrix<f64> {
        let n = self.grid.n();
        DMatrix::from_fn(n, n, |i, j| {
            let (x, y) = (self.grid.node(i), self.grid.node(j));
            if x > x_lo && x < x_hi && y > y_lo && y < y_hi {
                1.0
            } else {
                0.0
            }
        })
    }
}
