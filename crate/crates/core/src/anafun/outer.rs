//! Outer functions reconstructed from boundary log-modulus data.
//!
//! The boundary data is stored as cell averages over `N` equal arcs. Fourier
//! coefficients are recovered by an FFT followed by sinc deconvolution, which
//! keeps logarithmic boundary singularities from polluting the interior
//! values the way point sampling does.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::expr::AnalyticFn;
use crate::quad::rules::{GaussLegendre, TanhSinh};
use crate::quad::{normalize_angles, wrap_angle};
use crate::{DmuError, Result};

/// Default number of boundary cells.
pub const DEFAULT_CELLS: usize = 4096;

const CROSSING_SCAN: usize = 8192;

/// Exact boundary log-modulus, when one is known.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryLogModulus {
    Constant(f64),
    /// `log |f(e^{it})|`
    Analytic(AnalyticFn),
    Sum(Vec<BoundaryLogModulus>),
    Scaled(f64, Box<BoundaryLogModulus>),
    /// Pointwise minimum; `crossings` are the angles where the two sides swap.
    Min {
        a: Box<BoundaryLogModulus>,
        b: Box<BoundaryLogModulus>,
        crossings: Vec<f64>,
    },
    /// Cell averages, interpolated linearly between cell midpoints.
    Samples(Vec<f64>),
}

impl BoundaryLogModulus {
    pub fn min(a: BoundaryLogModulus, b: BoundaryLogModulus) -> Self {
        let crossings = find_crossings(&a, &b);
        BoundaryLogModulus::Min {
            a: Box::new(a),
            b: Box::new(b),
            crossings,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            BoundaryLogModulus::Constant(c) => *c,
            BoundaryLogModulus::Analytic(f) => f.boundary_log_modulus(t),
            BoundaryLogModulus::Sum(parts) => parts.iter().map(|p| p.value(t)).sum(),
            BoundaryLogModulus::Scaled(c, p) => c * p.value(t),
            BoundaryLogModulus::Min { a, b, .. } => a.value(t).min(b.value(t)),
            BoundaryLogModulus::Samples(v) => {
                let n = v.len();
                let x = wrap_angle(t) / TAU * n as f64 - 0.5;
                let j = x.floor();
                let frac = x - j;
                let j0 = (j as i64).rem_euclid(n as i64) as usize;
                let j1 = (j0 + 1) % n;
                v[j0] * (1.0 - frac) + v[j1] * frac
            }
        }
    }

    pub fn singular_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect(&mut out);
        normalize_angles(&out)
    }

    fn collect(&self, out: &mut Vec<f64>) {
        match self {
            BoundaryLogModulus::Constant(_) | BoundaryLogModulus::Samples(_) => {}
            BoundaryLogModulus::Analytic(f) => out.extend(f.singular_angles()),
            BoundaryLogModulus::Sum(parts) => parts.iter().for_each(|p| p.collect(out)),
            BoundaryLogModulus::Scaled(_, p) => p.collect(out),
            BoundaryLogModulus::Min { a, b, crossings } => {
                a.collect(out);
                b.collect(out);
                out.extend_from_slice(crossings);
            }
        }
    }

    /// Cell averages over `[j h, (j+1) h]`, `h = 2 pi / n`.
    pub fn cell_averages(&self, n: usize) -> Vec<f64> {
        if let BoundaryLogModulus::Samples(v) = self {
            if v.len() == n {
                return v.clone();
            }
        }
        let h = TAU / n as f64;
        let sing = self.singular_angles();
        let gl = GaussLegendre::new(8);
        let ts = TanhSinh::default();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let a = j as f64 * h;
                let b = a + h;
                let mut edges = vec![a];
                edges.extend(sing.iter().copied().filter(|&s| s > a && s < b));
                edges.push(b);
                let total: f64 = edges
                    .windows(2)
                    .map(|w| {
                        if edges.len() == 2 && !near_any(&sing, a, b) {
                            gl.integrate(w[0], w[1], |t| self.value(t))
                        } else {
                            ts.integrate(w[0], w[1], |t| self.value(t))
                        }
                    })
                    .sum();
                total / h
            })
            .collect()
    }
}

/// A singular angle at a cell edge (including the wrap point) still needs
/// endpoint-robust quadrature.
fn near_any(sing: &[f64], a: f64, b: f64) -> bool {
    sing.iter().any(|&s| {
        let s2 = if s < 1e-12 { s + TAU } else { s };
        (s - a).abs() < 1e-12 || (s - b).abs() < 1e-12 || (s2 - b).abs() < 1e-12
    })
}

fn find_crossings(a: &BoundaryLogModulus, b: &BoundaryLogModulus) -> Vec<f64> {
    let diff = |t: f64| a.value(t) - b.value(t);
    let n = CROSSING_SCAN;
    let mut pts: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * TAU / n as f64).collect();
    pts.extend(
        a.singular_angles()
            .into_iter()
            .chain(b.singular_angles())
            .flat_map(|s| [s - 1e-9, s + 1e-9]),
    );
    pts.iter_mut().for_each(|t| *t = wrap_angle(*t));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let vals: Vec<f64> = pts.iter().map(|&t| diff(t)).collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        let (fa, fb) = (vals[i], vals[j]);
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() || fa == 0.0 {
            continue;
        }
        let mut lo = pts[i];
        let mut hi = if j == 0 { pts[j] + TAU } else { pts[j] };
        let mut flo = fa;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = diff(mid);
            if !fm.is_finite() {
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push(wrap_angle(0.5 * (lo + hi)));
    }
    normalize_angles(&out)
}

/// `O(z) = exp( (1/2pi) int (e^{it}+z)/(e^{it}-z) u(t) dt )`
#[derive(Clone, Debug)]
pub struct OuterFn {
    averages: Vec<f64>,
    coeffs: Vec<Complex64>,
    boundary: BoundaryLogModulus,
}

impl OuterFn {
    /// Builds the outer function with boundary log-modulus given by cell
    /// averages over `len` equal arcs starting at angle 0.
    pub fn from_log_modulus(averages: Vec<f64>) -> Result<Self> {
        let n = averages.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(DmuError::InvalidArgument(format!(
                "log-modulus sample count must be a power of two >= 4, got {n}"
            )));
        }
        if let Some(i) = averages.iter().position(|v| !v.is_finite()) {
            return Err(DmuError::InvalidArgument(format!(
                "log-modulus sample {i} is not finite"
            )));
        }
        let coeffs = coefficients(&averages);
        Ok(OuterFn {
            boundary: BoundaryLogModulus::Samples(averages.clone()),
            averages,
            coeffs,
        })
    }

    /// Builds from exact boundary data; the exact data is kept for boundary
    /// integrals and the cell averages drive interior evaluation.
    pub fn from_boundary(boundary: BoundaryLogModulus, cells: usize) -> Result<Self> {
        let averages = boundary.cell_averages(cells);
        let mut f = Self::from_log_modulus(averages)?;
        f.boundary = boundary;
        Ok(f)
    }

    pub fn averages(&self) -> &[f64] {
        &self.averages
    }

    pub fn boundary(&self) -> &BoundaryLogModulus {
        &self.boundary
    }

    pub fn log_modulus(&self, t: f64) -> f64 {
        self.boundary.value(t)
    }

    pub fn singular_angles(&self) -> Vec<f64> {
        self.boundary.singular_angles()
    }

    /// `log |O(0)|`, the mean of the boundary log-modulus.
    pub fn log_modulus_at_origin(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn jet_raw(&self, z: Complex64) -> (Complex64, Complex64) {
        let k_max = self.coeffs.len() - 1;
        let mut p = self.coeffs[k_max];
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (1..k_max).rev() {
            dp = dp * z + p;
            p = p * z + self.coeffs[k];
        }
        let s = z * p;
        let ds = p + z * dp;
        let v = (self.coeffs[0] + 2.0 * s).exp();
        (v, v * 2.0 * ds)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_disc(z)?;
        Ok(self.jet_raw(z).0)
    }

    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disc(z)?;
        Ok(self.jet_raw(z).1)
    }

    /// `exp(max_t log|O(e^{it})|)` over a fine scan and the singular angles.
    pub fn sup_norm(&self) -> f64 {
        let n = 16384;
        let mut m = f64::NEG_INFINITY;
        for j in 0..n {
            m = m.max(self.log_modulus(j as f64 * TAU / n as f64));
        }
        for s in self.singular_angles() {
            for d in [-1e-9, 1e-9] {
                m = m.max(self.log_modulus(s + d));
            }
        }
        m.exp()
    }
}

fn check_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(DmuError::OutsideDisc { re: z.re, im: z.im })
    }
}

/// Fourier coefficients `c_0 .. c_{N/2-1}` of the boundary log-modulus.
fn coefficients(averages: &[f64]) -> Vec<Complex64> {
    let n = averages.len();
    let mut buf: Vec<Complex64> = averages.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mean = averages.iter().sum::<f64>() / n as f64;
    let mut c = Vec::with_capacity(n / 2);
    c.push(Complex64::new(mean, 0.0));
    for (k, x) in buf.iter().enumerate().take(n / 2).skip(1) {
        let half = std::f64::consts::PI * k as f64 / n as f64;
        let shift = Complex64::from_polar(1.0, -half);
        c.push(x * shift / (n as f64 * (half.sin() / half)));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_modulus() {
        let f = OuterFn::from_log_modulus(vec![0.5f64.ln(); 64]).unwrap();
        let v = f.eval(Complex64::new(0.3, -0.2)).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(f.deriv(Complex64::new(0.1, 0.0)).unwrap().norm() < 1e-13);
    }

    #[test]
    fn reconstructs_affine_outer_function() {
        // (1 - z)/2 is outer; its log-modulus has a log singularity at 0
        let h = AnalyticFn::power(1.0, 1.0, 0.5).unwrap();
        let f = OuterFn::from_boundary(BoundaryLogModulus::Analytic(h.clone()), DEFAULT_CELLS).unwrap();
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.3),
            Complex64::new(-0.9, 0.0),
        ] {
            let want = h.eval(z).unwrap();
            assert!((f.eval(z).unwrap() - want).norm() < 1e-6, "z = {z}");
            assert!(
                (f.deriv(z).unwrap() - Complex64::new(-0.5, 0.0)).norm() < 1e-5,
                "z = {z}"
            );
        }
        assert!((f.sup_norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn min_detects_crossings() {
        let h = AnalyticFn::power(1.0, 1.0, 0.5).unwrap();
        let a = BoundaryLogModulus::Analytic(h.clone());
        let b = BoundaryLogModulus::Sum(vec![
            BoundaryLogModulus::Constant(2.0f64.ln()),
            BoundaryLogModulus::Scaled(2.0, Box::new(BoundaryLogModulus::Analytic(h))),
        ]);
        // |h| = 2|h|^2 where |h| = 1/2, i.e. |1 - e^{it}| = 1, t = +-pi/3
        let m = BoundaryLogModulus::min(a, b);
        let BoundaryLogModulus::Min { crossings, .. } = &m else {
            unreachable!()
        };
        assert_eq!(crossings.len(), 2);
        assert!((crossings[0] - std::f64::consts::FRAC_PI_3).abs() < 1e-10);
        assert!((crossings[1] - (TAU - std::f64::consts::FRAC_PI_3)).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_sample_counts() {
        assert!(OuterFn::from_log_modulus(vec![0.0; 100]).is_err());
        assert!(OuterFn::from_log_modulus(vec![f64::NAN; 64]).is_err());
    }
}
