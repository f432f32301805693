//! Collocation matrix of the 1D fractional Laplacian with Dirichlet
//! exterior condition on an interval.
//!
//! Midpoint cells, three ingredients:
//! * far field: exact per-cell integrals of `A |x - y|^{-1-alpha}` against a
//!   piecewise-constant reconstruction,
//! * near field: the principal-value integral over the singular cell reduces
//!   to a symmetric second-difference weight via the local Taylor expansion,
//! * exterior: the tail integral over the complement of the interval goes on
//!   the diagonal in closed form.
//!
//! The result is symmetric positive-semidefinite and annihilates nothing:
//! applied to the constant-1 vector it returns the per-node killing rate.

use crate::stable::StableParams;
use nalgebra::DMatrix;

/// Matrix of the killed operator on the midpoint grid of `(lo, hi)` with `n`
/// cells.
pub fn flap_matrix_on_interval(n: usize, lo: f64, hi: f64, p: &StableParams) -> DMatrix<f64> {
    assert!(n >= 2 && hi > lo);
    let h = (hi - lo) / n as f64;
    let alpha = p.alpha();
    let a = p.levy_const();

    // w[d-1] = int_{(d-1/2)h}^{(d+1/2)h} z^{-1-alpha} dz for cell lag d >= 1
    let w: Vec<f64> = (1..n)
        .map(|d| {
            let d = d as f64;
            (((d - 0.5) * h).powf(-alpha) - ((d + 0.5) * h).powf(-alpha)) / alpha
        })
        .collect();
    let g = second_difference_weight(h, alpha);

    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let xi = lo + (i as f64 + 0.5) * h;
        let kappa = ((xi - lo).powf(-alpha) + (hi - xi).powf(-alpha)) / alpha;
        let mut diag = kappa + 2.0 * g;
        for j in 0..n {
            if j != i {
                let lag = i.abs_diff(j);
                m[(i, j)] = -a * w[lag - 1];
                diag += w[lag - 1];
            }
        }
        m[(i, i)] = a * diag;
        if i > 0 {
            m[(i, i - 1)] -= a * g;
        }
        if i + 1 < n {
            m[(i, i + 1)] -= a * g;
        }
    }
    m
}

/// Weight of the discrete second difference replacing the principal-value
/// integral over the singular cell:
/// `PV int_{|z|<h/2} (u(x) - u(x+z)) |z|^{-1-a} dz ~ -u''(x) (h/2)^{2-a}/(2-a)`
/// with `u''` replaced by its centered difference.
pub fn second_difference_weight(h: f64, alpha: f64) -> f64 {
    h.powf(-alpha) * 2f64.powf(alpha - 2.0) / (2.0 - alpha)
}

/// Killing rate seen by cell `i`: the exterior tail integral plus, at the two
/// boundary cells, the second-difference coupling to the (zero) exterior
/// neighbor.
pub fn killing_rate(n: usize, lo: f64, hi: f64, i: usize, p: &StableParams) -> f64 {
    let h = (hi - lo) / n as f64;
    let alpha = p.alpha();
    let xi = lo + (i as f64 + 0.5) * h;
    let kappa = ((xi - lo).powf(-alpha) + (hi - xi).powf(-alpha)) / alpha;
    let boundary = if i == 0 || i == n - 1 {
        second_difference_weight(h, alpha)
    } else {
        0.0
    };
    p.levy_const() * (kappa + boundary)
}
