//! Numerical laboratory for Schrodinger operators
//! `H = (-d^2/dx1^2)^{a/2} + (-d^2/dx2^2)^{a/2} + V` on the plane,
//! where the kinetic part is the cylindrical fractional Laplacian (the sum of
//! one-dimensional fractional Laplacians acting on each coordinate) and `V` is
//! a radial confining potential.
//!
//! The crate provides
//! * exact one-dimensional symmetric stable building blocks (densities,
//!   samplers, Levy measure, killed-interval quantities) in [`stable`],
//! * simulation of the two-dimensional cylindrical process, rectangle exits
//!   and the Ikeda-Watanabe identity in [`process`],
//! * radial potential profiles and their regularity checks in [`potential`],
//! * Monte Carlo evaluation of the Feynman-Kac semigroup in [`feynman_kac`],
//! * a deterministic grid discretization of `H` with a Krylov eigensolver,
//!   kernel evaluation and a split-step semigroup in [`spectral`],
//! * evaluable decay envelopes, exponent fits and standalone inequality
//!   checks in [`estimates`],
//! * CSV/manifest emission for reproducible experiment runs in [`report`] and
//!   the `cylfrac` command line binary.

pub mod cli;
pub mod error;
pub mod estimates;
pub mod feynman_kac;
pub mod potential;
pub mod process;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stable;

pub use error::{Error, Result};
