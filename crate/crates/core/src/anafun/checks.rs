//! Numerical preconditions: outerness, sup norms and non-vanishing.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::expr::AnalyticFn;
use crate::quad::{angular_rule, circle_mean, QuadratureSpec};
use crate::Result;

/// Outcome of comparing `log|f(0)|` with the boundary mean of `log|f|`.
///
/// Radial means at `r < 1` always reproduce `log|f(0)|` for zero-free `f`,
/// so the comparison is made on the circle itself; inner factors show up
/// as a strictly smaller `log|f(0)|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterCheck {
    pub outer: bool,
    pub log_abs_at_origin: f64,
    pub boundary_mean: Option<f64>,
    pub discrepancy: Option<f64>,
    pub converged: bool,
    pub reason: String,
}

pub fn is_outer(f: &AnalyticFn, tol: f64, spec: &QuadratureSpec) -> Result<OuterCheck> {
    let f0 = f.eval(Complex64::new(0.0, 0.0))?;
    let log0 = f0.norm().ln();
    if !(f0.norm() > 0.0) {
        return Ok(OuterCheck {
            outer: false,
            log_abs_at_origin: log0,
            boundary_mean: None,
            discrepancy: None,
            converged: true,
            reason: "f(0) = 0".into(),
        });
    }
    let mean = circle_mean(&|t| f.boundary_log_modulus(t), &f.singular_angles(), spec)?;
    let m = mean.estimate.value;
    let disc = log0 - m;
    let (outer, reason) = if !mean.converged {
        (false, "boundary mean of log|f| did not converge".to_string())
    } else if disc.abs() <= tol.max(mean.estimate.error) {
        (true, "log|f(0)| equals the boundary mean of log|f|".to_string())
    } else if disc < 0.0 {
        (
            false,
            format!(
                "log|f(0)| is below the boundary mean by {:.3e}; f has an inner factor",
                -disc
            ),
        )
    } else {
        (false, format!("log|f(0)| exceeds the boundary mean by {disc:.3e}"))
    };
    Ok(OuterCheck {
        outer,
        log_abs_at_origin: log0,
        boundary_mean: Some(m),
        discrepancy: Some(disc),
        converged: mean.converged,
        reason,
    })
}

/// Largest modulus found on the circle of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    pub radius: f64,
    pub argmax: f64,
}

/// Radius at which sup norms are sampled.
pub const SUP_RADIUS: f64 = 1.0 - 1e-6;

/// Scans `|z| = SUP_RADIUS` on a uniform grid plus nodes graded toward the
/// singular angles. By the maximum principle this bounds `|f|` on the
/// closed disc of that radius, up to the resolution of the grid.
pub fn sup_norm_estimate(f: &AnalyticFn) -> SupNorm {
    let r = SUP_RADIUS;
    let mut best = SupNorm {
        value: 0.0,
        radius: r,
        argmax: 0.0,
    };
    let mut visit = |t: f64| {
        let v = f.eval_raw(Complex64::from_polar(r, t)).norm();
        if v > best.value || v.is_nan() {
            best.value = if v.is_nan() { f64::INFINITY } else { v };
            best.argmax = t;
        }
    };
    let n = 8192;
    for j in 0..n {
        visit(j as f64 * TAU / n as f64);
    }
    let sing = f.singular_angles();
    if !sing.is_empty() {
        for (t, _) in angular_rule(&sing, 0.5e-6, 4, n) {
            visit(t);
        }
    }
    best
}

/// Smallest modulus found on an interior polar grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinModulus {
    pub value: f64,
    pub at: [f64; 2],
}

/// Scans `|z| <= 1 - 1e-4`; a zero-free function has a positive minimum.
pub fn min_modulus(f: &AnalyticFn) -> MinModulus {
    let mut best = MinModulus {
        value: f64::INFINITY,
        at: [0.0, 0.0],
    };
    let mut radii = vec![0.0];
    radii.extend((1..=40).map(|i| 1.0 - 10f64.powf(-4.0 * i as f64 / 40.0)));
    let n = 512;
    let mut angles: Vec<f64> = (0..n).map(|j| (j as f64 + 0.25) * TAU / n as f64).collect();
    for s in f.singular_angles() {
        angles.push(s);
        angles.extend((0..12).flat_map(|k| {
            let d = 10f64.powi(-k);
            [s - d, s + d]
        }));
    }
    for &r in &radii {
        for &t in &angles {
            let z = Complex64::from_polar(r, t);
            let v = f.eval_raw(z).norm();
            if v < best.value || v.is_nan() {
                best.value = if v.is_nan() { 0.0 } else { v };
                best.at = [z.re, z.im];
            }
        }
    }
    best
}
