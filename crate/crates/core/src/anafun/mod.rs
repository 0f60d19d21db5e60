//! Holomorphic functions: closed-form expression trees and numerically
//! represented outer functions.

mod checks;
mod expr;
mod outer;

pub use checks::{is_outer, min_modulus, sup_norm_estimate, MinModulus, OuterCheck, SupNorm, SUP_RADIUS};
pub use expr::{certification_grid, AnalyticFn, CNum, Node};
pub use outer::{BoundaryLogModulus, OuterFn, DEFAULT_CELLS};

use num_complex::Complex64;

use crate::quad::QuadratureSpec;
use crate::{DmuError, Result};

/// Tolerance on `log|f(0)|` minus the boundary mean of `log|f|`.
pub const OUTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum Func {
    Analytic(AnalyticFn),
    Outer(OuterFn),
}

impl From<AnalyticFn> for Func {
    fn from(f: AnalyticFn) -> Self {
        Func::Analytic(f)
    }
}

impl From<OuterFn> for Func {
    fn from(f: OuterFn) -> Self {
        Func::Outer(f)
    }
}

impl Func {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Func::Analytic(f) => f.eval(z),
            Func::Outer(f) => f.eval(z),
        }
    }

    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Func::Analytic(f) => f.deriv(z),
            Func::Outer(f) => f.deriv(z),
        }
    }

    pub fn jet_raw(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            Func::Analytic(f) => f.jet_raw(z),
            Func::Outer(f) => f.jet_raw(z),
        }
    }

    pub fn singular_angles(&self) -> Vec<f64> {
        match self {
            Func::Analytic(f) => f.singular_angles(),
            Func::Outer(f) => f.singular_angles(),
        }
    }

    /// Exact boundary log-modulus of `self`.
    pub fn boundary_log_modulus(&self) -> BoundaryLogModulus {
        match self {
            Func::Analytic(f) => BoundaryLogModulus::Analytic(f.clone()),
            Func::Outer(f) => f.boundary().clone(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Func::Analytic(f) => sup_norm_estimate(f).value,
            Func::Outer(f) => f.sup_norm(),
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticFn> {
        match self {
            Func::Analytic(f) => Some(f),
            Func::Outer(_) => None,
        }
    }

    /// Outer functions are outer by construction; closed forms are checked.
    pub fn outer_check(&self, spec: &QuadratureSpec) -> Result<OuterCheck> {
        match self {
            Func::Analytic(f) => is_outer(f, OUTER_TOL, spec),
            Func::Outer(f) => Ok(OuterCheck {
                outer: true,
                log_abs_at_origin: f.log_modulus_at_origin(),
                boundary_mean: Some(f.log_modulus_at_origin()),
                discrepancy: Some(0.0),
                converged: true,
                reason: "constructed from boundary data".into(),
            }),
        }
    }
}

fn require_outer(f: &Func, spec: &QuadratureSpec) -> Result<()> {
    let c = f.outer_check(spec)?;
    if c.outer {
        Ok(())
    } else {
        Err(DmuError::NotOuter(c.reason))
    }
}

/// The outer function with boundary modulus `min(|f|, |g|)`.
pub fn outer_min(f: &Func, g: &Func, spec: &QuadratureSpec) -> Result<OuterFn> {
    require_outer(f, spec)?;
    require_outer(g, spec)?;
    let b = BoundaryLogModulus::min(f.boundary_log_modulus(), g.boundary_log_modulus());
    OuterFn::from_boundary(b, DEFAULT_CELLS)
}

/// `f g`; stays a closed form when both factors are, otherwise both must be outer.
pub fn product(f: &Func, g: &Func, spec: &QuadratureSpec) -> Result<Func> {
    match (f, g) {
        (Func::Analytic(a), Func::Analytic(b)) => Ok(Func::Analytic(a.mul(b))),
        _ => {
            require_outer(f, spec)?;
            require_outer(g, spec)?;
            let b = BoundaryLogModulus::Sum(vec![f.boundary_log_modulus(), g.boundary_log_modulus()]);
            Ok(Func::Outer(OuterFn::from_boundary(b, DEFAULT_CELLS)?))
        }
    }
}
