use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{
    angular_rule, normalize_angles, rules::graded_edges, rules::GaussLegendre, Estimate, QuadratureSpec, COARSE_ORDER,
    FINE_ORDER,
};
use crate::{DmuError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleIntegral {
    /// Raw integral over `[0, 2pi)` (no `1/2pi` factor).
    pub estimate: Estimate,
    /// False when shrinking the exclusion windows (or doubling the uniform
    /// grid) down to the floor did not stabilise the value.
    pub converged: bool,
    /// Final exclusion half-width, when singular angles were declared.
    pub window: Option<f64>,
}

fn finite(v: f64, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DmuError::NonFiniteIntegrand {
            re: t.cos(),
            im: t.sin(),
        })
    }
}

fn windowed_sum<F>(f: &F, sing: &[f64], w: f64, gl: &GaussLegendre) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let m = sing.len();
    let mut total = 0.0;
    let mut l1 = 0.0;
    for i in 0..m {
        let a = sing[i];
        let b = if i + 1 < m { sing[i + 1] } else { sing[0] + TAU };
        let half = 0.5 * (b - a);
        if half <= w {
            continue;
        }
        let edges = graded_edges(half - w, w);
        for pair in edges.windows(2) {
            for (x, wt) in gl.mapped(a + w + pair[0], a + w + pair[1]) {
                let v = finite(f(x), x)?;
                total += wt * v;
                l1 += wt * v.abs();
            }
            for (x, wt) in gl.mapped(b - w - pair[1], b - w - pair[0]) {
                let v = finite(f(x), x)?;
                total += wt * v;
                l1 += wt * v.abs();
            }
        }
    }
    // excluded windows: edge-value estimate
    for &s in sing {
        let v = finite(f(s - w), s - w)? + finite(f(s + w), s + w)?;
        total += w * v;
        l1 += w * v.abs();
    }
    Ok((total, l1))
}

/// `int_0^{2pi} f(t) dt` for an integrand with point singularities at the
/// declared angles.
///
/// Symmetric windows around each singular angle are excluded and shrunk by
/// decades down to `spec.singular_exclusion`; the excluded part is estimated
/// from the window edges. Without singular angles the trapezoid rule is
/// doubled until stable. Non-convergence is reported through
/// [`CircleIntegral::converged`], never silently.
pub fn circle_integral<F>(f: &F, singular: &[f64], spec: &QuadratureSpec) -> Result<CircleIntegral>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    spec.validate()?;
    let sing = normalize_angles(singular);
    let tol = |l1: f64| 100.0 * spec.rel_tol * l1 + spec.abs_tol;
    if sing.is_empty() {
        let trap = |n: usize| -> Result<(f64, f64)> {
            let h = TAU / n as f64;
            let mut s = 0.0;
            let mut l1 = 0.0;
            for j in 0..n {
                let t = j as f64 * h;
                let v = finite(f(t), t)?;
                s += v;
                l1 += v.abs();
            }
            Ok((s * h, l1 * h))
        };
        let mut n = spec.angular_nodes.max(8);
        let (mut prev, _) = trap(n)?;
        loop {
            n *= 2;
            let (cur, l1) = trap(n)?;
            let delta = (cur - prev).abs();
            if delta <= tol(l1) {
                return Ok(CircleIntegral {
                    estimate: Estimate::new(cur, delta),
                    converged: true,
                    window: None,
                });
            }
            if n >= 1 << 22 {
                return Ok(CircleIntegral {
                    estimate: Estimate::new(cur, delta),
                    converged: false,
                    window: None,
                });
            }
            prev = cur;
        }
    }
    let gl = GaussLegendre::new(FINE_ORDER);
    let floor = spec.singular_exclusion;
    let mut windows = Vec::new();
    for k in 2.. {
        let w = 10f64.powi(-k);
        if w <= floor * (1.0 + 1e-9) {
            windows.push(floor);
            break;
        }
        windows.push(w);
    }
    let (mut prev, _) = windowed_sum(f, &sing, windows[0], &gl)?;
    let mut result = None;
    for &w in &windows[1..] {
        let (cur, l1) = windowed_sum(f, &sing, w, &gl)?;
        let delta = (cur - prev).abs();
        let converged = delta <= tol(l1);
        result = Some(CircleIntegral {
            estimate: Estimate::new(cur, delta),
            converged,
            window: Some(w),
        });
        if converged {
            break;
        }
        prev = cur;
    }
    Ok(result.expect("at least two exclusion windows"))
}

/// [`circle_integral`] divided by `2pi`.
pub fn circle_mean<F>(f: &F, singular: &[f64], spec: &QuadratureSpec) -> Result<CircleIntegral>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let mut c = circle_integral(f, singular, spec)?;
    c.estimate = c.estimate.scale(1.0 / TAU);
    Ok(c)
}

/// Mean over the angle of `f` on the circle of radius `1 - d`, with panels
/// refined toward the singular angles at the scale `d`.
pub fn radial_circle_mean<F>(f: &F, d: f64, singular: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let sing = normalize_angles(singular);
    let eval = |order: usize, uniform: usize| -> Result<f64> {
        let rule = angular_rule(&sing, 0.5 * d, order, uniform);
        let mut s = 0.0;
        for (t, w) in rule {
            s += w * finite(f(t), t)?;
        }
        Ok(s / TAU)
    };
    let fine = eval(FINE_ORDER, spec.angular_nodes)?;
    let coarse = eval(COARSE_ORDER, (spec.angular_nodes / 2).max(1))?;
    Ok(Estimate::new(fine, (fine - coarse).abs()))
}
