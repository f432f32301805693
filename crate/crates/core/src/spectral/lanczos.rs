//! Thick-restart Lanczos for the lowest eigenpairs of a symmetric implicit
//! operator, with full reorthogonalization.
//!
//! Each cycle extends the basis to `subspace` vectors, Rayleigh-Ritz reduces
//! on the projected matrix (tridiagonal plus the restart arrow), and restarts
//! with the best `keep` Ritz vectors plus the carried residual direction.
//! Convergence is judged by the classical `|beta_m y_last|` residual bound.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Solver options.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOpts {
    /// Krylov subspace dimension per cycle.
    pub subspace: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    /// Residual tolerance for all requested pairs.
    pub tol: f64,
    /// Tighter residual tolerance for the ground pair (its far field is
    /// post-processed, which needs extra headroom).
    pub ground_tol: f64,
    /// Restart-cycle cap.
    pub max_cycles: usize,
}

impl LanczosOpts {
    /// Defaults for `k` wanted pairs: subspace `4k`, keep `2k`, residuals
    /// `1e-8` (`1e-11` for the ground pair), 500 cycles.
    pub fn for_k(k: usize) -> Self {
        LanczosOpts {
            subspace: 4 * k.max(4),
            keep: 2 * k.max(4),
            tol: 1e-8,
            ground_tol: 1e-11,
            max_cycles: 500,
        }
    }
}

/// Lowest `k` eigenpairs of the operator given by `apply`.
///
/// Returns eigenvalues ascending, unit eigenvectors, and the residual
/// estimates at convergence.
pub fn lowest_eigenpairs<F>(
    apply: F,
    dim: usize,
    k: usize,
    opts: &LanczosOpts,
    v0: DVector<f64>,
) -> Result<(Vec<f64>, Vec<DVector<f64>>, Vec<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m = opts.subspace;
    assert!(k <= opts.keep && opts.keep < m && m < dim);

    let mut vs: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
    let mut v0 = v0;
    let n0 = v0.norm();
    v0 /= n0;
    vs.push(v0);
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut ell = 0usize; // retained Ritz vectors at cycle start
    let mut last_residuals: Vec<f64> = Vec::new();

    for _cycle in 0..opts.max_cycles {
        // extend the basis to m + 1 vectors; the norm of the final residual
        // vector is beta_m, which feeds the Ritz residual bound
        let mut beta_m = 0.0;
        for j in vs.len() - 1..m {
            let mut w = apply(&vs[j]);
            if j == ell && ell > 0 {
                for i in 0..ell {
                    let s = t[(i, j)];
                    if s != 0.0 {
                        w.axpy(-s, &vs[i], 1.0);
                    }
                }
            } else if j > 0 {
                let beta_prev = t[(j - 1, j)];
                w.axpy(-beta_prev, &vs[j - 1], 1.0);
            }
            let alpha = vs[j].dot(&w);
            t[(j, j)] = alpha;
            w.axpy(-alpha, &vs[j], 1.0);
            // full reorthogonalization, two passes
            for _ in 0..2 {
                for v in vs.iter() {
                    let c = v.dot(&w);
                    if c != 0.0 {
                        w.axpy(-c, v, 1.0);
                    }
                }
            }
            let beta = w.norm();
            if beta < 1e-300 {
                return Err(Error::NoConvergence(
                    "Lanczos breakdown: invariant subspace hit".into(),
                ));
            }
            if j + 1 < m {
                t[(j, j + 1)] = beta;
                t[(j + 1, j)] = beta;
            } else {
                beta_m = beta;
            }
            vs.push(&w / beta);
        }

        // Rayleigh-Ritz on T
        let eig = nalgebra::SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

        let residuals: Vec<f64> = order
            .iter()
            .take(k)
            .map(|&i| (beta_m * eig.eigenvectors[(m - 1, i)]).abs())
            .collect();
        last_residuals = residuals.clone();
        let converged = residuals.iter().enumerate().all(|(idx, r)| {
            if idx == 0 {
                *r <= opts.ground_tol
            } else {
                *r <= opts.tol
            }
        });

        let keep = if converged { k } else { opts.keep.min(m - 1) };
        // Ritz vectors for the kept pairs
        let mut ritz: Vec<DVector<f64>> = Vec::with_capacity(keep);
        for &i in order.iter().take(keep) {
            let mut r = DVector::zeros(dim);
            for (j, v) in vs.iter().take(m).enumerate() {
                let c = eig.eigenvectors[(j, i)];
                r.axpy(c, v, 1.0);
            }
            let nrm = r.norm();
            ritz.push(r / nrm);
        }

        if converged {
            let lambdas: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
            return Ok((lambdas, ritz, last_residuals));
        }

        // thick restart: kept Ritz vectors + carried residual direction
        let carried = vs[m].clone();
        vs.clear();
        vs.extend(ritz.into_iter());
        vs.push(carried);
        t.fill(0.0);
        for (slot, &i) in order.iter().take(keep).enumerate() {
            t[(slot, slot)] = eig.eigenvalues[i];
            let s = beta_m * eig.eigenvectors[(m - 1, i)];
            t[(slot, keep)] = s;
            t[(keep, slot)] = s;
        }
        ell = keep;
    }
    Err(Error::NoConvergence(format!(
        "thick-restart Lanczos hit the cycle cap; residuals {:?}",
        last_residuals
    )))
}
