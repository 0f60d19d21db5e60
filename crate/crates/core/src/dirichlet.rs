//! `H^2` norms, `D(mu)` norms and local Dirichlet integrals.
//!
//! Closed-form functions go through area integrals of `|f'|^2` against the
//! relevant weight. Outer functions known only through their boundary
//! log-modulus go through the boundary formula
//! `D_zeta(f) = (1/2pi) int (|f|^2 - |f(zeta)|^2 - 2|f(zeta)|^2 log|f/f(zeta)|) / |e^{it} - zeta|^2 dt`,
//! which needs nothing but `log|f|` on the circle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::anafun::{AnalyticFn, BoundaryLogModulus, Func};
use crate::measure::{CircleMeasure, Density};
use crate::quad::{
    angular_rule, circle_integral, circle_mean, disc_integral, geometric_tail, normalize_angles,
    poisson_focused_integral, radial_circle_mean, tail_profile, wrap_angle, DiscPoint, Estimate, QuadratureSpec,
    TailProfile, TailVerdict, COARSE_ORDER, FINE_ORDER,
};
use crate::{DmuError, Result};

/// Deepest radial level used for `H^2` means, `1 - r = 2^-40`.
const H2_MAX_LEVELS: usize = 40;

/// Relative residual below which the extrapolated radial limit is accepted.
pub const LIMIT_RESIDUAL_TOL: f64 = 1e-5;

/// A squared norm or seminorm. `estimate.value` is `+inf` when the tail
/// profile is divergent.
#[derive(Clone, Debug, Serialize)]
pub struct NormResult {
    pub estimate: Estimate,
    pub verdict: TailVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<TailProfile>,
}

impl NormResult {
    fn zero() -> Self {
        NormResult {
            estimate: Estimate::exact(0.0),
            verdict: TailVerdict::Convergent,
            profile: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.verdict != TailVerdict::Divergent
    }

    pub fn value(&self) -> f64 {
        self.estimate.value
    }
}

/// Divergent dominates inconclusive, which dominates convergent.
pub fn worst(a: TailVerdict, b: TailVerdict) -> TailVerdict {
    use TailVerdict::*;
    match (a, b) {
        (Divergent, _) | (_, Divergent) => Divergent,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Convergent,
    }
}

fn union_angles(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    normalize_angles(&v)
}

fn check_unimodular(zeta: Complex64) -> Result<Complex64> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(DmuError::InvalidArgument(format!(
            "boundary point {zeta} is not unimodular"
        )));
    }
    Ok(zeta / zeta.norm())
}

// ---------------------------------------------------------------- H^2

/// `||f||^2_{H^2}` as the limit of circle means of `|f|^2`.
///
/// Means are taken at `1 - r = 2^-k`; the increments between consecutive
/// radii form the tail profile and the remainder is extrapolated
/// geometrically. A divergent profile is returned as an error carrying the
/// last radius and mean.
pub fn h2_norm_sq(f: &Func, spec: &QuadratureSpec) -> Result<NormResult> {
    let (res, radius, mean) = h2_norm_sq_inner(f, spec)?;
    if !res.is_finite() {
        return Err(DmuError::Divergent { radius, mean });
    }
    Ok(res)
}

/// As [`h2_norm_sq`], but a divergent profile is reported in the result.
pub fn h2_norm_sq_profiled(f: &Func, spec: &QuadratureSpec) -> Result<NormResult> {
    Ok(h2_norm_sq_inner(f, spec)?.0)
}

fn h2_norm_sq_inner(f: &Func, spec: &QuadratureSpec) -> Result<(NormResult, f64, f64)> {
    spec.validate()?;
    let a = match f {
        Func::Outer(o) => return Ok((h2_norm_sq_outer(o.boundary(), spec)?, 1.0, f64::NAN)),
        Func::Analytic(a) => a,
    };
    if a.is_constant() {
        let v = a.eval_raw(Complex64::new(0.0, 0.0)).norm_sqr();
        let r = NormResult {
            estimate: Estimate::exact(v),
            verdict: TailVerdict::Convergent,
            profile: None,
        };
        return Ok((r, 0.0, v));
    }
    let sing = a.singular_angles();
    let levels = spec.radial_levels.min(H2_MAX_LEVELS);
    let means = (0..=levels)
        .into_par_iter()
        .map(|k| {
            let d = 0.5f64.powi(k as i32);
            let g = |t: f64| a.eval_raw(Complex64::from_polar(1.0 - d, t)).norm_sqr();
            radial_circle_mean(&g, d, &sing, spec)
        })
        .collect::<Result<Vec<Estimate>>>()?;
    let incs: Vec<f64> = means.windows(2).map(|w| w[1].value - w[0].value).collect();
    let abs_incs: Vec<f64> = incs.iter().map(|v| v.abs()).collect();
    let profile = TailProfile::from_values(&abs_incs, spec.abs_tol);
    let last = means[levels];
    let radius = 1.0 - 0.5f64.powi(levels as i32);
    let estimate = if profile.verdict == TailVerdict::Divergent {
        Estimate::new(f64::INFINITY, f64::INFINITY)
    } else {
        let tail = geometric_tail(&incs, 0.5);
        Estimate::new(last.value + tail, last.error + 0.1 * tail.abs() + spec.abs_tol)
    };
    let res = NormResult {
        estimate,
        verdict: profile.verdict,
        profile: Some(profile),
    };
    Ok((res, radius, last.value))
}

/// `(1/2pi) int e^{2u}` for a boundary log-modulus `u`.
pub fn h2_norm_sq_outer(b: &BoundaryLogModulus, spec: &QuadratureSpec) -> Result<NormResult> {
    let c = circle_mean(&|t: f64| (2.0 * b.value(t)).exp(), &b.singular_angles(), spec)?;
    let verdict = if c.converged {
        TailVerdict::Convergent
    } else {
        TailVerdict::Inconclusive
    };
    Ok(NormResult {
        estimate: c.estimate,
        verdict,
        profile: None,
    })
}

// ---------------------------------------------------------------- D(mu)

/// `int |f'|^2 P_mu dA / pi`.
pub fn dmu_seminorm_sq(f: &Func, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<NormResult> {
    spec.validate()?;
    mu.validate()?;
    if mu.is_zero() {
        return Ok(NormResult::zero());
    }
    let a = match f {
        Func::Outer(o) => return dmu_seminorm_sq_outer(o.boundary(), mu, spec),
        Func::Analytic(a) => a,
    };
    if a.is_constant() {
        return Ok(NormResult::zero());
    }
    let integrand = |p: &DiscPoint| a.jet_raw(p.z).1.norm_sqr() * mu.poisson_at(p) / PI;
    weighted_area(
        &integrand,
        &union_angles(&a.singular_angles(), &mu.singular_angles()),
        spec,
    )
}

/// Disc integral of a nonnegative integrand with its dyadic tail profile.
pub(crate) fn weighted_area<F>(f: &F, sing: &[f64], spec: &QuadratureSpec) -> Result<NormResult>
where
    F: Fn(&DiscPoint) -> f64 + Sync,
{
    let disc = disc_integral(f, sing, spec)?;
    // with halving annuli the disc levels are exactly the dyadic tail annuli
    let profile = if spec.refinement_factor == 0.5 && spec.radial_levels >= spec.tail_annuli {
        TailProfile::from_values(&disc.levels[..spec.tail_annuli], spec.abs_tol)
    } else {
        tail_profile(f, sing, spec)?
    };
    let estimate = match profile.verdict {
        TailVerdict::Divergent => Estimate::new(f64::INFINITY, f64::INFINITY),
        _ => disc.estimate,
    };
    Ok(NormResult {
        estimate,
        verdict: profile.verdict,
        profile: Some(profile),
    })
}

/// `||f||^2_mu = ||f||^2_{H^2} + int |f'|^2 P_mu dA / pi`.
pub fn dmu_norm_sq(f: &Func, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<DmuNorm> {
    let h2 = h2_norm_sq_profiled(f, spec)?;
    let seminorm = dmu_seminorm_sq(f, mu, spec)?;
    Ok(DmuNorm::combine(h2, seminorm))
}

#[derive(Clone, Debug, Serialize)]
pub struct DmuNorm {
    pub norm_sq: Estimate,
    pub verdict: TailVerdict,
    pub h2: NormResult,
    pub seminorm: NormResult,
}

impl DmuNorm {
    fn combine(h2: NormResult, seminorm: NormResult) -> Self {
        DmuNorm {
            norm_sq: h2.estimate + seminorm.estimate,
            verdict: worst(h2.verdict, seminorm.verdict),
            h2,
            seminorm,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.verdict != TailVerdict::Divergent
    }
}

/// Outer-route seminorm `(1/2pi) int D_zeta(f) dmu(zeta)`.
pub fn dmu_seminorm_sq_outer(b: &BoundaryLogModulus, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<NormResult> {
    mu.validate()?;
    let mut total = Estimate::exact(0.0);
    let mut verdict = TailVerdict::Convergent;
    for atom in mu.atoms.iter().filter(|a| a.mass > 0.0) {
        let d = local_dirichlet_outer(b, Complex64::from_polar(1.0, atom.angle), spec)?;
        total = total + d.estimate.scale(atom.mass / TAU);
        if !d.converged {
            verdict = TailVerdict::Inconclusive;
        }
    }
    if !matches!(mu.density, Density::Zero) {
        let (est, ok) = density_average(b, &mu.density, spec)?;
        total = total + est;
        if !ok {
            verdict = TailVerdict::Inconclusive;
        }
    }
    Ok(NormResult {
        estimate: total,
        verdict,
        profile: None,
    })
}

/// `(1/2pi) int rho(t) D_{e^{it}}(f) dt`, fine rule against a coarse one.
fn density_average(b: &BoundaryLogModulus, density: &Density, spec: &QuadratureSpec) -> Result<(Estimate, bool)> {
    let sing = b.singular_angles();
    let pass = |order: usize, uniform: usize| -> Result<(f64, f64, bool)> {
        let rule = angular_rule(&sing, 1e-6, order, uniform);
        let parts = rule
            .par_iter()
            .map(|&(t, w)| {
                let rho = density.value_at(t);
                if rho == 0.0 {
                    return Ok((0.0, 0.0, true));
                }
                let d = local_dirichlet_outer(b, Complex64::from_polar(1.0, t), spec)?;
                Ok((w * rho * d.estimate.value, w * rho * d.estimate.error, d.converged))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.iter().fold((0.0, 0.0, true), |acc, p| {
            (acc.0 + p.0 / TAU, acc.1 + p.1 / TAU, acc.2 && p.2)
        }))
    };
    let (fine, fine_err, ok) = pass(FINE_ORDER, 256)?;
    let (coarse, _, _) = pass(COARSE_ORDER, 128)?;
    Ok((Estimate::new(fine, fine_err + (fine - coarse).abs()), ok))
}

/// Outer-route `||f||^2_mu`.
pub fn dmu_norm_sq_outer(b: &BoundaryLogModulus, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<DmuNorm> {
    Ok(DmuNorm::combine(
        h2_norm_sq_outer(b, spec)?,
        dmu_seminorm_sq_outer(b, mu, spec)?,
    ))
}

// ---------------------------------------------------------------- D_zeta

/// Area form of `D_zeta(f)`; `+inf` when the shell profile diverges.
#[derive(Clone, Debug, Serialize)]
pub struct AreaResult {
    pub estimate: Estimate,
    pub finite: bool,
    /// Dyadic shells `2^-(k+1) <= u < 2^-k` around `zeta`, `k >= 1`.
    pub profile: TailProfile,
}

/// `int |f'(w)|^2 (1 - |w|^2) / |zeta - w|^2 dA(w) / pi`.
pub fn local_dirichlet_area(f: &AnalyticFn, zeta: Complex64, spec: &QuadratureSpec) -> Result<AreaResult> {
    let zeta = check_unimodular(zeta)?;
    if f.is_constant() {
        return Ok(AreaResult {
            estimate: Estimate::exact(0.0),
            finite: true,
            profile: TailProfile::from_values(&[0.0; 8], spec.abs_tol),
        });
    }
    let g = |w: Complex64| f.jet_raw(w).1.norm_sqr();
    let fi = poisson_focused_integral(&g, zeta, &f.singular_angles(), spec)?;
    let n = fi.levels.len();
    let shells: Vec<f64> = fi.levels[1..n - 1].iter().map(|v| v / PI).collect();
    let profile = TailProfile::from_values(&shells, spec.abs_tol);
    let finite = profile.verdict != TailVerdict::Divergent;
    let estimate = if finite {
        fi.estimate.scale(1.0 / PI)
    } else {
        Estimate::new(f64::INFINITY, f64::INFINITY)
    };
    Ok(AreaResult {
        estimate,
        finite,
        profile,
    })
}

/// Radial limit `f(zeta)` by Richardson extrapolation from `1 - eps`,
/// `1 - eps/2`, `1 - eps/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialLimit {
    pub value: [f64; 2],
    pub residual: f64,
    pub stable: bool,
}

pub fn radial_limit(f: &AnalyticFn, zeta: Complex64, eps: f64) -> RadialLimit {
    let at = |e: f64| f.eval_raw(zeta * (1.0 - e));
    let (f1, f2, f3) = (at(eps), at(0.5 * eps), at(0.25 * eps));
    let a1 = 2.0 * f2 - f1;
    let a2 = 2.0 * f3 - f2;
    let residual = (a2 - a1).norm();
    let stable = residual.is_finite()
        && a2.re.is_finite()
        && a2.im.is_finite()
        && residual <= LIMIT_RESIDUAL_TOL * a2.norm().max(1.0);
    RadialLimit {
        value: [a2.re, a2.im],
        residual,
        stable,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDirichletResult {
    pub boundary_point: [f64; 2],
    pub area_value: f64,
    pub area_error: f64,
    pub area_finite: bool,
    /// Absent when the radial limit at `zeta` is unstable or the boundary
    /// integrand is not finite.
    pub boundary_value: Option<f64>,
    pub boundary_error: Option<f64>,
    /// False when shrinking the exclusion window around `zeta` did not
    /// stabilise the boundary integral; the value is then `+inf`.
    pub boundary_converged: bool,
    pub discrepancy: Option<f64>,
    pub limit_value_used: Option<[f64; 2]>,
    pub limit_residual: f64,
    pub area_profile: TailProfile,
}

/// Both forms of `D_zeta(f)` with their discrepancy.
pub fn local_dirichlet_boundary(
    f: &AnalyticFn,
    zeta: Complex64,
    spec: &QuadratureSpec,
) -> Result<LocalDirichletResult> {
    let zeta = check_unimodular(zeta)?;
    let area = local_dirichlet_area(f, zeta, spec)?;
    let lim = radial_limit(f, zeta, spec.boundary_eps);
    let theta = wrap_angle(zeta.arg());
    let mut boundary = None;
    let mut converged = false;
    if lim.stable {
        let l = Complex64::new(lim.value[0], lim.value[1]);
        let g = |t: f64| {
            let den = 4.0 * (0.5 * (t - theta)).sin().powi(2);
            (f.eval_raw(Complex64::from_polar(1.0, t)) - l).norm_sqr() / den
        };
        let sing = union_angles(&f.singular_angles(), &[theta]);
        match circle_mean(&g, &sing, spec) {
            Ok(c) => {
                converged = c.converged;
                boundary = Some(if c.converged {
                    c.estimate
                } else {
                    Estimate::new(f64::INFINITY, f64::INFINITY)
                });
            }
            Err(DmuError::NonFiniteIntegrand { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let discrepancy = boundary.map(|b| {
        let a = area.estimate.value;
        if a.is_infinite() && b.value.is_infinite() {
            0.0
        } else {
            (a - b.value).abs()
        }
    });
    Ok(LocalDirichletResult {
        boundary_point: [zeta.re, zeta.im],
        area_value: area.estimate.value,
        area_error: area.estimate.error,
        area_finite: area.finite,
        boundary_value: boundary.map(|b| b.value),
        boundary_error: boundary.map(|b| b.error),
        boundary_converged: converged,
        discrepancy,
        limit_value_used: lim.stable.then_some(lim.value),
        limit_residual: lim.residual,
        area_profile: area.profile,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OuterLocal {
    pub estimate: Estimate,
    pub converged: bool,
    /// `log|f(zeta)|`
    pub log_modulus_at_point: f64,
}

/// `D_zeta(f)` for an outer `f` from its boundary log-modulus alone.
pub fn local_dirichlet_outer(b: &BoundaryLogModulus, zeta: Complex64, spec: &QuadratureSpec) -> Result<OuterLocal> {
    let zeta = check_unimodular(zeta)?;
    let theta = wrap_angle(zeta.arg());
    let u0 = b.value(theta);
    if u0.is_nan() || u0 == f64::INFINITY {
        return Err(DmuError::InvalidFunction(format!(
            "boundary log-modulus at angle {theta} is {u0}"
        )));
    }
    let scale = (2.0 * u0).exp();
    let g = |t: f64| {
        let u = b.value(t);
        let den = 4.0 * (0.5 * (t - theta)).sin().powi(2);
        if u0 == f64::NEG_INFINITY {
            return (2.0 * u).exp() / den;
        }
        let x = 2.0 * (u - u0);
        let num = if x.abs() < 1e-3 {
            x * x * (0.5 + x * (1.0 / 6.0 + x / 24.0))
        } else {
            x.exp_m1() - x
        };
        scale * num / den
    };
    let sing = union_angles(&b.singular_angles(), &[theta]);
    let c = circle_integral(&g, &sing, spec)?;
    Ok(OuterLocal {
        estimate: c.estimate.scale(1.0 / TAU),
        converged: c.converged,
        log_modulus_at_point: u0,
    })
}

/// `D_zeta(f)` by the route suited to the representation of `f`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalValue {
    pub estimate: Estimate,
    pub finite: bool,
    pub route: LocalRoute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalRoute {
    Area,
    OuterBoundary,
}

pub fn local_dirichlet(f: &Func, zeta: Complex64, spec: &QuadratureSpec) -> Result<LocalValue> {
    match f {
        Func::Analytic(a) => {
            let r = local_dirichlet_area(a, zeta, spec)?;
            Ok(LocalValue {
                estimate: r.estimate,
                finite: r.finite,
                route: LocalRoute::Area,
            })
        }
        Func::Outer(o) => {
            let r = local_dirichlet_outer(o.boundary(), zeta, spec)?;
            let estimate = if r.converged {
                r.estimate
            } else {
                Estimate::new(f64::INFINITY, f64::INFINITY)
            };
            Ok(LocalValue {
                estimate,
                finite: r.converged,
                route: LocalRoute::OuterBoundary,
            })
        }
    }
}
