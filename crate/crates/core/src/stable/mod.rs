//! One-dimensional symmetric alpha-stable building blocks.
//!
//! The normalization follows the characteristic function
//! `E exp(i X_t xi) = exp(-t |xi|^alpha)`, whose jump intensity has density
//! `A_alpha / |z|^{1+alpha}` with
//! `A_alpha = alpha 2^{alpha-1} Gamma((1+alpha)/2) / (sqrt(pi) Gamma(1-alpha/2))`.

mod density;

pub use density::transition_density_1d;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use rand::Rng;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Stability index together with the derived jump-intensity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    levy_const: f64,
}

impl StableParams {
    /// Validates `0 < alpha < 2` and precomputes the intensity constant.
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(StableParams {
            alpha,
            levy_const: levy_constant(alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The constant `A_alpha` in front of `|z|^{-1-alpha}`.
    pub fn levy_const(&self) -> f64 {
        self.levy_const
    }
}

/// Jump-intensity constant `A_alpha`.
pub fn levy_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid(
            "alpha",
            format!("stability index must lie in (0, 2), got {alpha}"),
        ));
    }
    Ok(alpha * 2f64.powf(alpha - 1.0) * gamma((1.0 + alpha) / 2.0)
        / (PI.sqrt() * gamma(1.0 - alpha / 2.0)))
}

/// Density of the Levy measure at `z != 0`.
pub fn levy_density_1d(z: f64, p: &StableParams) -> Result<f64> {
    if z == 0.0 {
        return Err(Error::invalid("z", "Levy density is singular at 0"));
    }
    Ok(p.levy_const / z.abs().powf(1.0 + p.alpha))
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid("interval", format!("need lo < hi, got ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One draw of the standard law with characteristic function `exp(-|xi|^alpha)`.
///
/// Chambers-Mallows-Stuck construction specialized to the symmetric case:
/// exact marginals, no small-jump truncation.
pub fn sample_standard(p: &StableParams, rng: &mut Stream) -> f64 {
    let alpha = p.alpha;
    // u in (-pi/2, pi/2), w ~ Exp(1)
    let u = (rng.random::<f64>() - 0.5) * PI;
    let w = -(1.0 - rng.random::<f64>()).ln();
    if (alpha - 1.0).abs() < 1e-12 {
        return u.tan();
    }
    let s = (alpha * u).sin() / u.cos().powf(1.0 / alpha);
    let c = ((1.0 - alpha) * u).cos() / w;
    s * c.powf((1.0 - alpha) / alpha)
}

/// One draw of the increment `X_t - X_0`; the law scales as `t^{1/alpha}`.
///
/// Panics if `t <= 0`.
pub fn sample_increment(t: f64, p: &StableParams, rng: &mut Stream) -> f64 {
    assert!(t > 0.0, "increment horizon must be positive");
    t.powf(1.0 / p.alpha) * sample_standard(p, rng)
}

/// Monte Carlo estimate with its standard error and the discretization it
/// was produced with.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub step: f64,
}

/// Survival probability `P^x(tau_(lo,hi) > t)` for the killed 1D process,
/// estimated over discretely observed paths with step `step`.
///
/// Exits between observation times are missed; the reported `step` lets
/// callers run step-halving consistency checks.
pub fn survival_prob_1d(
    iv: Interval,
    t: f64,
    x: f64,
    p: &StableParams,
    n_paths: usize,
    step: f64,
    seed: u64,
) -> Result<McEstimate> {
    if !iv.contains(x) {
        return Err(Error::invalid("x", format!("start {x} outside ({}, {})", iv.lo, iv.hi)));
    }
    if !(t > 0.0) || !(step > 0.0) {
        return Err(Error::invalid("t/step", "horizon and step must be positive"));
    }
    let n_steps = (t / step).ceil() as usize;
    let dt = t / n_steps as f64;
    let p = *p;
    let (mean, stderr) = rng::parallel_mc(n_paths, seed, move |idx, stream| {
        let _ = idx;
        let mut pos = x;
        for _ in 0..n_steps {
            pos += sample_increment(dt, &p, stream);
            if !iv.contains(pos) {
                return 0.0;
            }
        }
        1.0
    });
    Ok(McEstimate {
        mean,
        stderr,
        n_paths,
        step: dt,
    })
}
