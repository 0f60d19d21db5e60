//! Quadrature engines for disc-area integrals with boundary-concentrated
//! weights, circle integrals with point singularities, and dyadic tail
//! diagnostics for improper area integrals.
//!
//! All engines traverse their grids in a fixed order and reduce partial sums
//! sequentially, so results are bit-reproducible for a given
//! [`QuadratureSpec`] even when panels are evaluated in parallel.

mod circle;
mod disc;
pub mod rules;
mod tail;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{DmuError, Result};

pub use circle::{circle_integral, circle_mean, radial_circle_mean, CircleIntegral};
pub(crate) use disc::geometric_tail;
pub use disc::{annulus_integral, disc_integral, poisson_focused_integral, DiscIntegral, DiscPoint, FocusedIntegral};
pub use tail::{classify, tail_profile, TailDiagnostics, TailProfile, TailVerdict};

/// Gauss-Legendre order for the primary pass of every panel rule.
pub(crate) const FINE_ORDER: usize = 10;
/// Gauss-Legendre order for the comparison pass that yields error estimates.
pub(crate) const COARSE_ORDER: usize = 6;

/// Grid sizes, tolerances and near-boundary refinement policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Uniform angular nodes used when no singular angle is declared.
    pub angular_nodes: usize,
    /// Number of geometric annuli `1 - q^k` approaching the circle.
    pub radial_levels: usize,
    /// Geometric ratio `q` of the radial annuli.
    pub refinement_factor: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Smallest half-width of the window excluded around a boundary singularity.
    pub singular_exclusion: f64,
    /// Number of dyadic annuli profiled by [`tail_profile`].
    pub tail_annuli: usize,
    /// Radial offset `eps` used for boundary limits at radius `1 - eps`.
    pub boundary_eps: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            angular_nodes: 512,
            radial_levels: 40,
            refinement_factor: 0.5,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            singular_exclusion: 1e-10,
            tail_annuli: 24,
            boundary_eps: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DmuError::InvalidSpec(m.to_string()));
        if self.angular_nodes < 1 || self.radial_levels < 1 || self.tail_annuli < 1 {
            return bad("all counts must be at least 1");
        }
        if self.tail_annuli > 52 {
            return bad("tail_annuli above 52 exceeds double precision near the circle");
        }
        if !(self.refinement_factor > 0.0 && self.refinement_factor < 1.0) {
            return bad("refinement_factor must lie in (0, 1)");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.singular_exclusion > 0.0 && self.singular_exclusion < 1e-2) {
            return bad("singular_exclusion must lie in (0, 1e-2)");
        }
        if !(self.boundary_eps > 0.0 && self.boundary_eps < 1e-2) {
            return bad("boundary_eps must lie in (0, 1e-2)");
        }
        Ok(())
    }

    /// Same spec with doubled angular nodes and radial levels.
    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            angular_nodes: 2 * self.angular_nodes,
            radial_levels: 2 * self.radial_levels,
            ..self.clone()
        }
    }
}

/// A value with an error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate::new(c * self.value, c.abs() * self.error)
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate::new(self.value + o.value, self.error + o.error)
    }
}

/// Maps an angle to `[0, 2pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Sorted, de-duplicated angles in `[0, 2pi)`.
pub fn normalize_angles(angles: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = angles
        .iter()
        .filter(|a| a.is_finite())
        .map(|&a| wrap_angle(a))
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if v.len() > 1 && (v[0] + TAU - v[v.len() - 1]) < 1e-12 {
        v.pop();
    }
    v
}

/// Angular rule on the full circle: uniform trapezoid without singular
/// angles, otherwise Gauss-Legendre panels graded toward each singular angle
/// down to width `w_min`.
pub(crate) fn angular_rule(singular: &[f64], w_min: f64, order: usize, uniform: usize) -> Vec<(f64, f64)> {
    if singular.is_empty() {
        let h = TAU / uniform as f64;
        return (0..uniform).map(|j| (j as f64 * h, h)).collect();
    }
    let gl = rules::GaussLegendre::new(order);
    let mut out = Vec::new();
    let m = singular.len();
    for i in 0..m {
        let a = singular[i];
        let b = if i + 1 < m { singular[i + 1] } else { singular[0] + TAU };
        let half = 0.5 * (b - a);
        let edges = rules::graded_edges(half, w_min);
        for pair in edges.windows(2) {
            for (x, w) in gl.mapped(a + pair[0], a + pair[1]) {
                out.push((x, w));
            }
            for (x, w) in gl.mapped(b - pair[1], b - pair[0]) {
                out.push((x, w));
            }
        }
    }
    out
}

/// Graded Gauss-Legendre rule on `[lo, hi]` with breakpoints at which the
/// panels are refined geometrically down to `w_min` from both sides.
pub(crate) fn graded_interval_rule(lo: f64, hi: f64, breaks: &[f64], w_min: f64, order: usize) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo + 1e-14 && b < hi - 1e-14)
        .collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    inner.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    pts.extend(inner);
    pts.push(hi);
    let gl = rules::GaussLegendre::new(order);
    let mut out = Vec::new();
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let half = 0.5 * (b - a);
        let edges = rules::graded_edges(half, w_min);
        for pair in edges.windows(2) {
            out.extend(gl.mapped(a + pair[0], a + pair[1]));
            out.extend(gl.mapped(b - pair[1], b - pair[0]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid_and_matches_documented_values() {
        let s = QuadratureSpec::default();
        s.validate().unwrap();
        assert_eq!(s.angular_nodes, 512);
        assert_eq!(s.radial_levels, 40);
        assert_eq!(s.tail_annuli, 24);
    }

    #[test]
    fn spec_rejects_bad_values() {
        let d = QuadratureSpec::default;
        assert!(QuadratureSpec {
            refinement_factor: 1.0,
            ..d()
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec {
            angular_nodes: 0,
            ..d()
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec { rel_tol: 0.0, ..d() }.validate().is_err());
    }

    #[test]
    fn spec_json_rejects_unknown_fields() {
        let ok: QuadratureSpec = serde_json::from_str(
            r#"{"angular_nodes":512,"radial_levels":40,"refinement_factor":0.5,"rel_tol":1e-8,"tail_annuli":24}"#,
        )
        .unwrap();
        assert_eq!(ok, QuadratureSpec::default());
        assert!(serde_json::from_str::<QuadratureSpec>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn angular_rule_integrates_constants() {
        for sing in [vec![], vec![0.0], vec![0.3, 3.0, 5.9]] {
            let rule = angular_rule(&sing, 1e-6, 8, 64);
            let total: f64 = rule.iter().map(|p| p.1).sum();
            assert!((total - TAU).abs() < 1e-12, "{sing:?}: {total}");
        }
    }

    #[test]
    fn normalize_angles_wraps_and_dedups() {
        let v = normalize_angles(&[-0.0, TAU, 1.0, 1.0 + 1e-14, -1.0]);
        assert_eq!(v.len(), 3);
        assert!((v[2] - (TAU - 1.0)).abs() < 1e-12);
    }
}
