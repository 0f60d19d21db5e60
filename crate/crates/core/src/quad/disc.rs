use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    angular_rule, graded_interval_rule, normalize_angles, rules::GaussLegendre, Estimate, QuadratureSpec, COARSE_ORDER,
    FINE_ORDER,
};
use crate::{DmuError, Result};

/// A quadrature node in the disc, carrying `1 - r` computed without cancellation.
#[derive(Clone, Copy, Debug)]
pub struct DiscPoint {
    pub z: Complex64,
    pub r: f64,
    pub theta: f64,
    /// `1 - r`
    pub dist: f64,
}

impl DiscPoint {
    /// `1 - |z|^2`
    pub fn one_minus_r2(&self) -> f64 {
        self.dist * (2.0 - self.dist)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscIntegral {
    pub estimate: Estimate,
    /// Contribution of each geometric annulus, innermost first.
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FocusedIntegral {
    pub estimate: Estimate,
    /// Contributions of the dyadic shells `2^-(k+1) <= u < 2^-k` around the
    /// focus point, `k = 0` being the outer half.
    pub levels: Vec<f64>,
}

fn check(v: f64, z: Complex64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DmuError::NonFiniteIntegrand { re: z.re, im: z.im })
    }
}

/// Integral of `f dA` over the annulus `d_lo <= 1 - |z| <= d_hi`.
pub fn annulus_integral<F>(f: &F, d_lo: f64, d_hi: f64, singular: &[f64], order: usize, uniform: usize) -> Result<f64>
where
    F: Fn(&DiscPoint) -> f64 + ?Sized,
{
    let sing = normalize_angles(singular);
    let ang = angular_rule(&sing, 0.5 * d_lo, order, uniform.max(1));
    let gl = GaussLegendre::new(order);
    let mut total = 0.0;
    for (d, wd) in gl.mapped(d_lo, d_hi) {
        let r = 1.0 - d;
        let mut ring = 0.0;
        for &(t, wt) in &ang {
            let z = Complex64::from_polar(r, t);
            let p = DiscPoint {
                z,
                r,
                theta: t,
                dist: d,
            };
            ring += wt * check(f(&p), z)?;
        }
        total += wd * r * ring;
    }
    Ok(total)
}

/// Area integral of a nonnegative integrand over the disc using geometric
/// annuli `1 - q^(k+1) <= |z| < 1 - q^k`, `k < radial_levels`.
///
/// The error estimate combines the difference against a lower-order pass with
/// a geometric bound on the omitted tail beyond the last annulus.
pub fn disc_integral<F>(f: &F, singular: &[f64], spec: &QuadratureSpec) -> Result<DiscIntegral>
where
    F: Fn(&DiscPoint) -> f64 + Sync,
{
    spec.validate()?;
    let q = spec.refinement_factor;
    let pairs: Vec<Result<(f64, f64)>> = (0..spec.radial_levels)
        .into_par_iter()
        .map(|k| {
            let d_hi = q.powi(k as i32);
            let d_lo = d_hi * q;
            let fine = annulus_integral(f, d_lo, d_hi, singular, FINE_ORDER, spec.angular_nodes)?;
            let coarse = annulus_integral(f, d_lo, d_hi, singular, COARSE_ORDER, (spec.angular_nodes / 2).max(1))?;
            Ok((fine, coarse))
        })
        .collect();
    let mut levels = Vec::with_capacity(pairs.len());
    let mut value = 0.0;
    let mut err = 0.0;
    for p in pairs {
        let (fine, coarse) = p?;
        levels.push(fine);
        value += fine;
        err += (fine - coarse).abs();
    }
    let tail = geometric_tail(&levels, q);
    value += tail;
    err += 0.1 * tail.abs();
    Ok(DiscIntegral {
        estimate: Estimate::new(value, err),
        levels,
    })
}

/// Extrapolated remainder beyond the last level from the observed ratio of
/// the last two levels (at least `q`); infinite when the levels stop decaying.
pub(crate) fn geometric_tail(levels: &[f64], q: f64) -> f64 {
    let n = levels.len();
    if n == 0 {
        return 0.0;
    }
    let last = levels[n - 1];
    if last == 0.0 {
        return 0.0;
    }
    let ratio = if n >= 2 && levels[n - 2] != 0.0 {
        (last / levels[n - 2]).max(q)
    } else {
        q
    };
    if ratio >= 1.0 {
        return f64::INFINITY * last.signum();
    }
    last * ratio / (1.0 - ratio)
}

/// Integral of `g(w) (1 - |w|^2) / |zeta - w|^2 dA(w)` over the disc.
///
/// Uses polar coordinates centred at the boundary point `zeta`,
/// `w = zeta (1 - rho e^{i phi})` with `rho = 2 cos(phi) u`, in which the
/// Poisson-type weight becomes the bounded factor `4 cos^2(phi) (1 - u)`.
/// `singular` lists boundary angles where `g` may blow up; the angular panels
/// are refined toward the directions pointing at them.
pub fn poisson_focused_integral<G>(
    g: &G,
    zeta: Complex64,
    singular: &[f64],
    spec: &QuadratureSpec,
) -> Result<FocusedIntegral>
where
    G: Fn(Complex64) -> f64 + Sync,
{
    spec.validate()?;
    if ((zeta.norm() - 1.0).abs()) > 1e-12 {
        return Err(DmuError::InvalidArgument(format!(
            "focus point {zeta} is not unimodular"
        )));
    }
    let zeta = zeta / zeta.norm();
    let breaks: Vec<f64> = normalize_angles(singular)
        .into_iter()
        .map(|s| Complex64::from_polar(1.0, s))
        .filter(|s| (s - zeta).norm() > 1e-12)
        .map(|s| (Complex64::new(1.0, 0.0) - s / zeta).arg())
        .collect();
    let w_phi = 1e-9;
    let levels_n = spec.radial_levels;

    let shells: Vec<(f64, f64)> = {
        let mut v = vec![(0.5, 1.0)];
        for k in 1..levels_n {
            let hi = 0.5f64.powi(k as i32);
            v.push((0.5 * hi, hi));
        }
        let last = 0.5f64.powi(levels_n as i32);
        v.push((0.0, last));
        v
    };

    let run = |order: usize| -> Result<Vec<f64>> {
        let phi_rule = graded_interval_rule(-FRAC_PI_2, FRAC_PI_2, &breaks, w_phi, order);
        let gl = GaussLegendre::new(order);
        shells
            .par_iter()
            .enumerate()
            .map(|(k, &(lo, hi))| {
                let u_rule: Vec<(f64, f64)> = if k == 0 {
                    graded_interval_rule(lo, hi, &[], 1e-9, order)
                } else {
                    gl.mapped(lo, hi).collect()
                };
                let mut acc = 0.0;
                for &(u, wu) in &u_rule {
                    let mut inner = 0.0;
                    for &(phi, wp) in &phi_rule {
                        let c = phi.cos();
                        if c <= 0.0 {
                            continue;
                        }
                        let rho = 2.0 * c * u;
                        let w = zeta * (Complex64::new(1.0, 0.0) - Complex64::from_polar(rho, phi));
                        let v = check(g(w), w)?;
                        inner += wp * v * 4.0 * c * c;
                    }
                    acc += wu * (1.0 - u) * inner;
                }
                Ok(acc)
            })
            .collect()
    };
    let fine = run(FINE_ORDER)?;
    let coarse = run(COARSE_ORDER)?;
    let value: f64 = fine.iter().sum();
    let mut err: f64 = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).sum();
    err += fine.last().copied().unwrap_or(0.0).abs();
    Ok(FocusedIntegral {
        estimate: Estimate::new(value, err),
        levels: fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_integrand_gives_area() {
        let spec = QuadratureSpec::default();
        let r = disc_integral(&|_: &DiscPoint| 1.0, &[], &spec).unwrap();
        assert!((r.estimate.value - PI).abs() < 1e-8, "{:?}", r.estimate);
        let r = disc_integral(&|_: &DiscPoint| 1.0, &[0.0, 2.0], &spec).unwrap();
        assert!((r.estimate.value - PI).abs() < 1e-8, "{:?}", r.estimate);
    }

    #[test]
    fn inverse_sqrt_weight_matches_radial_reduction() {
        // 2 pi int_0^1 r (1 - r^2)^(-1/2) dr = 2 pi
        let spec = QuadratureSpec::default();
        let r = disc_integral(&|p: &DiscPoint| 1.0 / p.one_minus_r2().sqrt(), &[], &spec).unwrap();
        assert!((r.estimate.value - 2.0 * PI).abs() < 1e-7, "{:?}", r.estimate);
        assert!((r.estimate.value - 2.0 * PI).abs() <= r.estimate.error);
    }

    #[test]
    fn focused_integral_of_poisson_weight_alone() {
        // int P(w, zeta) dA / pi = int_0^1 2 r dr = 1 since each circle averages to 1
        let spec = QuadratureSpec::default();
        for t in [0.0, 1.0, PI] {
            let zeta = Complex64::from_polar(1.0, t);
            let r = poisson_focused_integral(&|_| 1.0, zeta, &[], &spec).unwrap();
            assert!((r.estimate.value / PI - 1.0).abs() < 1e-10, "{:?}", r.estimate);
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let spec = QuadratureSpec::default();
        let err = disc_integral(&|_: &DiscPoint| f64::NAN, &[], &spec).unwrap_err();
        assert!(matches!(err, DmuError::NonFiniteIntegrand { .. }));
    }
}
