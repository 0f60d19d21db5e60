//! Numerics for harmonically weighted Dirichlet spaces `D(mu)` on the unit disc.
//!
//! The crate evaluates Poisson integrals of circle measures, `D(mu)` norms and
//! local Dirichlet integrals (area and boundary forms), the iterated logarithms
//! `G_n` with their real majorants, and issues cyclicity-sufficiency
//! certificates for bounded outer functions. Every inequality the certificates
//! rely on has a numerical verifier in [`certify`].

// `!(x > 0.0)` is deliberate throughout: NaN must fail these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anafun;
pub mod certify;
pub mod cli;
pub mod dirichlet;
mod error;
pub mod iterlog;
pub mod measure;
pub mod quad;

pub use error::{DmuError, Result};
pub use num_complex::Complex64;

/// Library version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
