//! Iterated logarithms `G_0(z) = z`, `G_{n+1}(z) = log(1 + G_n(z))` on the
//! closed right half-plane, their real majorants `F_n(r) = G_n(1/(1-r))`, and
//! the constants `M_n` that make `log(1 + pi/2 + M_{n-1} F_{n-1}) <= M_n F_n`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::rules::GaussLegendre;
use crate::{DmuError, Result};

fn check_half_plane(z: Complex64) -> Result<()> {
    if z.re >= 0.0 && z.im.is_finite() {
        Ok(())
    } else {
        Err(DmuError::OutsideHalfPlane { re: z.re, im: z.im })
    }
}

/// `G_n(z)` with principal branches. Rejects `Re z < 0`.
pub fn g(n: usize, z: Complex64) -> Result<Complex64> {
    check_half_plane(z)?;
    Ok(g_unchecked(n, z))
}

pub fn g_unchecked(n: usize, z: Complex64) -> Complex64 {
    let mut w = z;
    for _ in 0..n {
        w = (w + 1.0).ln();
    }
    w
}

/// `(G_n(z), G_n'(z))`, the derivative being `prod_k 1 / (1 + G_k(z))`.
pub fn g_jet(n: usize, z: Complex64) -> (Complex64, Complex64) {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let s = w + 1.0;
        d /= s;
        w = s.ln();
    }
    (w, d)
}

/// `G_n'(z)`; fails if `1 + G_k(z)` vanishes along the chain.
pub fn g_deriv(n: usize, z: Complex64) -> Result<Complex64> {
    check_half_plane(z)?;
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let s = w + 1.0;
        if s.norm() == 0.0 {
            return Err(DmuError::Validation(format!("1 + G_{k}(z) vanishes at z = {z}")));
        }
        d /= s;
        w = s.ln();
    }
    Ok(d)
}

/// Real iterate `G_n(x)` for `x >= 0`.
pub fn g_real(n: usize, x: f64) -> f64 {
    let mut w = x;
    for _ in 0..n {
        w = w.ln_1p();
    }
    w
}

/// `F_n(r) = G_n(1/(1-r))` on `[0, 1)`.
pub fn majorant(n: usize, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(DmuError::InvalidArgument(format!("r = {r} is outside [0, 1)")));
    }
    Ok(majorant_from_gap(n, 1.0 - r))
}

/// `F_n` evaluated from the gap `1 - r`, avoiding cancellation near `r = 1`.
pub fn majorant_from_gap(n: usize, gap: f64) -> f64 {
    g_real(n, 1.0 / gap)
}

/// `log(1 + pi/2 + m_prev x) / log(1 + x)`.
pub fn m_ratio(m_prev: f64, x: f64) -> f64 {
    (1.0 + FRAC_PI_2 + m_prev * x).ln() / x.ln_1p()
}

/// Upper end of the sup search; beyond it the ratio is bounded by
/// `1 + log(1 + pi/2 + M) / log(1 + X)`.
pub const SUP_SEARCH_LIMIT: f64 = 1e6;
const SUP_GRID: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterLogTable {
    pub n_max: usize,
    pub m0: f64,
    /// `M_0 ..= M_{n_max}`.
    pub m: Vec<f64>,
    /// Where each sup was attained; entry 0 is unused.
    pub sup_locations: Vec<f64>,
    /// Largest `lhs - rhs` of the validation inequality over the r-grid, per `n >= 1`.
    pub validation_slack: Vec<f64>,
}

/// Maximises `m_ratio(m_prev, .)` over `[lower, SUP_SEARCH_LIMIT]` by a
/// log-spaced grid followed by golden-section refinement of the best bracket.
pub fn sup_ratio(m_prev: f64, lower: f64) -> (f64, f64) {
    let (a, b) = (lower.ln(), SUP_SEARCH_LIMIT.ln());
    let xs: Vec<f64> = (0..SUP_GRID)
        .map(|i| (a + (b - a) * i as f64 / (SUP_GRID - 1) as f64).exp())
        .collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let v = m_ratio(m_prev, x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = xs[best_i.saturating_sub(1)];
    let mut hi = xs[(best_i + 1).min(SUP_GRID - 1)];
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    for _ in 0..200 {
        if m_ratio(m_prev, c) > m_ratio(m_prev, d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let x_ref = 0.5 * (lo + hi);
    let v_ref = m_ratio(m_prev, x_ref);
    if v_ref > best {
        (v_ref, x_ref)
    } else {
        (best, xs[best_i])
    }
}

/// Radii `1 - 10^(-8 j / (len - 1))` used to validate the table.
pub fn validation_radii(len: usize) -> Vec<f64> {
    (0..len)
        .map(|j| 1.0 - 10f64.powf(-8.0 * j as f64 / (len - 1) as f64))
        .collect()
}

/// Builds `M_0 ..= M_{n_max}` from the seed `m0` and re-validates
/// `log(1 + pi/2 + M_{n-1} F_{n-1}(r)) <= M_n F_n(r)` on `r in [0, 1 - 1e-8]`.
pub fn compute_m(n_max: usize, m0: f64) -> Result<IterLogTable> {
    if !(m0.is_finite() && m0 > 0.0) {
        return Err(DmuError::InvalidArgument(format!("M_0 = {m0} must be positive")));
    }
    let mut m = vec![m0];
    let mut loc = vec![f64::NAN];
    for n in 1..=n_max {
        let lower = g_real(n, 1.0);
        let (sup, at) = sup_ratio(m[n - 1], lower);
        let tail = 1.0 + (1.0 + FRAC_PI_2 + m[n - 1]).ln() / SUP_SEARCH_LIMIT.ln_1p();
        if tail > sup {
            return Err(DmuError::Validation(format!(
                "M_{n}: ratio beyond {SUP_SEARCH_LIMIT:e} may reach {tail}, above the searched sup {sup}"
            )));
        }
        m.push(sup);
        loc.push(at);
    }
    let radii = validation_radii(401);
    let mut slack = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut worst = f64::NEG_INFINITY;
        for &r in &radii {
            let gap = if r == 0.0 { 1.0 } else { 1.0 - r };
            let lhs = (1.0 + FRAC_PI_2 + m[n - 1] * majorant_from_gap(n - 1, gap)).ln();
            let rhs = m[n] * majorant_from_gap(n, gap);
            worst = worst.max(lhs - rhs);
            if lhs > rhs * (1.0 + 1e-12) {
                return Err(DmuError::Validation(format!("M_{n} fails at r = {r}: {lhs} > {rhs}")));
            }
        }
        slack.push(worst);
    }
    Ok(IterLogTable {
        n_max,
        m0,
        m,
        sup_locations: loc,
        validation_slack: slack,
    })
}

/// One row of the `G_n(it)` curve export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// `|G_n(it)| <= log(1 + |G_{n-1}(it)|) + pi/2`
    pub step_bound_ok: bool,
}

/// `t` log-spaced over `[1e-3, 1e4]`.
pub fn curve_times(samples: usize) -> Vec<f64> {
    let (a, b) = (-3.0f64, 4.0f64);
    (0..samples)
        .map(|i| {
            if samples == 1 {
                10f64.powf(b)
            } else {
                10f64.powf(a + (b - a) * i as f64 / (samples - 1) as f64)
            }
        })
        .collect()
}

/// `G_n(it)` for each `n` in `ns` and each sample time.
pub fn imaginary_axis_curves(ns: &[usize], samples: usize) -> Vec<CurveRow> {
    let ts = curve_times(samples);
    let mut rows = Vec::with_capacity(ns.len() * samples);
    for &n in ns {
        for &t in &ts {
            let z = Complex64::new(0.0, t);
            let w = g_unchecked(n, z);
            let ok = if n == 0 {
                true
            } else {
                let prev = g_unchecked(n - 1, z).norm();
                w.norm() <= prev.ln_1p() + FRAC_PI_2
            };
            rows.push(CurveRow {
                n,
                t,
                re: w.re,
                im: w.im,
                abs: w.norm(),
                step_bound_ok: ok,
            });
        }
    }
    rows
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,t,re,im,abs,step_bound_ok")?;
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{}",
            r.n, r.t, r.re, r.im, r.abs, r.step_bound_ok
        )?;
    }
    Ok(())
}

/// `int_0^inf int_{-pi/2}^{pi/2} dy dx / ((1+x)^2 + y^2)`, the area of
/// `G_1(C_+)` seen through `|G_2'|^2` after the substitution `w = G_1(z)`.
///
/// Computed as a tensor Gauss-Legendre rule after mapping `x = u/(1-u)`,
/// which turns the integrand into `1 / (1 + y^2 (1-u)^2)` on `[0,1] x [-pi/2, pi/2]`.
pub fn g2_area(panels: usize) -> f64 {
    let gl = GaussLegendre::new(20);
    let mut total = 0.0;
    for i in 0..panels {
        let (y0, y1) = (
            -FRAC_PI_2 + PI * i as f64 / panels as f64,
            -FRAC_PI_2 + PI * (i + 1) as f64 / panels as f64,
        );
        for (y, wy) in gl.mapped(y0, y1) {
            for j in 0..panels {
                let (u0, u1) = (j as f64 / panels as f64, (j + 1) as f64 / panels as f64);
                for (u, wu) in gl.mapped(u0, u1) {
                    let s = y * (1.0 - u);
                    total += wy * wu / (1.0 + s * s);
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(g(1, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let v = g(2, Complex64::new(1.0, 0.0)).unwrap();
        // log(1 + log 2) evaluated step by step in higher-precision arithmetic: 0.526589...
        assert!((v.re - (1.0 + 2f64.ln()).ln()).abs() < 1e-15);
        assert!((v.re - 0.52658).abs() < 1e-5);
        assert!(v.im.abs() < 1e-16);
        assert!(g(1, Complex64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn derivative_values() {
        let z = Complex64::new(0.7, -3.0);
        assert_eq!(g_deriv(0, z).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(g_deriv(1, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        for n in 1..5 {
            let h = 1e-6;
            let fd = (g_unchecked(n, z + h) - g_unchecked(n, z - h)) / (2.0 * h);
            let d = g_deriv(n, z).unwrap();
            assert!((fd - d).norm() < 1e-8 * d.norm());
        }
    }

    #[test]
    fn majorant_values_and_ordering() {
        assert_eq!(majorant(0, 0.0).unwrap(), 1.0);
        assert!((majorant(1, 0.0).unwrap() - 2f64.ln()).abs() < 1e-16);
        assert!(majorant(1, 1.0).is_err());
        for &r in &validation_radii(50) {
            for n in 0..5 {
                let a = majorant(n, r).unwrap();
                let b = majorant(n + 1, r).unwrap();
                assert!(b <= a && b > 0.0, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn table_is_positive_and_valid() {
        let t = compute_m(6, 4.0).unwrap();
        assert_eq!(t.m.len(), 7);
        assert!(t.m.iter().all(|&m| m > 0.0));
        assert!(t.validation_slack.iter().all(|&s| s <= 0.0));
        assert!(compute_m(2, 0.0).is_err());
    }

    #[test]
    fn curve_export_format() {
        let rows = imaginary_axis_curves(&[2, 3, 4], 10);
        assert_eq!(rows.len(), 30);
        let mut buf = Vec::new();
        write_curves_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 31);
        assert!(s.starts_with("n,t,re,im,abs,step_bound_ok\n"));
    }
}
