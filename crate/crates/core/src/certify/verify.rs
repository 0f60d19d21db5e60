//! Numerical checks of the inequalities behind the certificates.
//!
//! Each check returns an [`InequalityReport`]: one row per sample with both
//! sides and their error bars. A row is satisfied when
//! `lhs <= rhs (1 + tol) + err`, and the report passes when every row is.
//! Unmet hypotheses give SKIP, never FAIL.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::anafun::{certification_grid, AnalyticFn, BoundaryLogModulus, Func};
use crate::dirichlet::{dmu_norm_sq, dmu_norm_sq_outer, local_dirichlet, local_dirichlet_outer, DmuNorm};
use crate::iterlog::{self, compute_m, imaginary_axis_curves, majorant};
use crate::measure::CircleMeasure;
use crate::quad::{Estimate, QuadratureSpec};
use crate::{DmuError, Result};

/// Relative slack allowed on the right-hand side.
pub const INEQUALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub error_bar: f64,
    /// `(lhs - rhs - error_bar) / |rhs|`; negative when satisfied.
    pub violation: f64,
}

impl InequalityRow {
    pub fn new(label: impl Into<String>, lhs: Estimate, rhs: Estimate) -> Self {
        let error_bar = lhs.error + rhs.error;
        let violation = if rhs.value == f64::INFINITY {
            f64::NEG_INFINITY
        } else if lhs.value == f64::INFINITY {
            f64::INFINITY
        } else {
            (lhs.value - rhs.value - error_bar) / rhs.value.abs().max(f64::MIN_POSITIVE)
        };
        InequalityRow {
            label: label.into(),
            lhs: lhs.value,
            rhs: rhs.value,
            error_bar,
            violation,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub statement: String,
    pub samples: String,
    pub rows: Vec<InequalityRow>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    pub quantities: BTreeMap<String, f64>,
}

impl InequalityReport {
    fn finish(statement: &str, samples: String, rows: Vec<InequalityRow>, quantities: BTreeMap<String, f64>) -> Self {
        let max_violation = rows.iter().map(|r| r.violation).fold(f64::NEG_INFINITY, f64::max);
        let status = if rows.iter().all(|r| r.violation <= INEQUALITY_TOL) {
            Status::Pass
        } else {
            Status::Fail
        };
        InequalityReport {
            statement: statement.into(),
            samples,
            rows,
            max_violation,
            tolerance: INEQUALITY_TOL,
            status,
            skip_reason: None,
            quantities,
        }
    }

    fn skip(statement: &str, samples: String, reason: String, quantities: BTreeMap<String, f64>) -> Self {
        InequalityReport {
            statement: statement.into(),
            samples,
            rows: Vec::new(),
            max_violation: f64::NAN,
            tolerance: INEQUALITY_TOL,
            status: Status::Skip,
            skip_reason: Some(reason),
            quantities,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn est(v: f64) -> Estimate {
    Estimate::exact(v)
}

/// `a <= c b` up to the inequality tolerance and error bars.
fn le(a: Estimate, b: Estimate, c: f64) -> bool {
    a.value <= c * b.value * (1.0 + INEQUALITY_TOL) + a.error + c * b.error
}

fn log_modulus_of(f: &Func) -> BoundaryLogModulus {
    f.boundary_log_modulus()
}

/// `log|n h^2|` on the circle.
fn n_h_squared(h: &BoundaryLogModulus, n: f64) -> BoundaryLogModulus {
    BoundaryLogModulus::Sum(vec![
        BoundaryLogModulus::Constant(n.ln()),
        BoundaryLogModulus::Scaled(2.0, Box::new(h.clone())),
    ])
}

/// Boundary log-modulus of the outer function `h ∧ n h^2`.
pub fn cutoff_log_modulus(h: &Func, n: f64) -> BoundaryLogModulus {
    let b = log_modulus_of(h);
    let nh2 = n_h_squared(&b, n);
    BoundaryLogModulus::min(b, nh2)
}

fn product_local(g: &Func, h: &Func, zeta: Complex64, spec: &QuadratureSpec) -> Result<Estimate> {
    match (g, h) {
        (Func::Analytic(a), Func::Analytic(b)) => {
            Ok(finite_or_inf(local_dirichlet(&Func::Analytic(a.mul(b)), zeta, spec)?))
        }
        _ => {
            let b = BoundaryLogModulus::Sum(vec![log_modulus_of(g), log_modulus_of(h)]);
            let r = local_dirichlet_outer(&b, zeta, spec)?;
            Ok(if r.converged {
                r.estimate
            } else {
                Estimate::new(f64::INFINITY, f64::INFINITY)
            })
        }
    }
}

fn finite_or_inf(v: crate::dirichlet::LocalValue) -> Estimate {
    if v.finite {
        v.estimate
    } else {
        Estimate::new(f64::INFINITY, f64::INFINITY)
    }
}

fn require_outer(f: &Func, name: &str, spec: &QuadratureSpec) -> Result<Option<String>> {
    let c = f.outer_check(spec)?;
    Ok((!c.outer).then(|| format!("{name} is not outer: {}", c.reason)))
}

/// `D_z(g h1) <= 4c D_z(g h2) + (2 + 4c) ||h2||^2 D_z(g)` under
/// `||h1|| <= ||h2||` and `D_z(h1) <= c D_z(h2)`.
pub fn verify_h1h2(
    g: &Func,
    h1: &Func,
    h2: &Func,
    zeta: Complex64,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    const S: &str = "D_z(g h1) <= 4c D_z(g h2) + (2+4c) ||h2||_inf^2 D_z(g)";
    if !(c > 0.0 && c.is_finite()) {
        return Err(DmuError::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let samples = format!("zeta = {zeta}, c = {c}");
    let mut q = BTreeMap::new();
    let (s1, s2) = (h1.sup_norm(), h2.sup_norm());
    let d_h1 = finite_or_inf(local_dirichlet(h1, zeta, spec)?);
    let d_h2 = finite_or_inf(local_dirichlet(h2, zeta, spec)?);
    q.insert("sup_h1".into(), s1);
    q.insert("sup_h2".into(), s2);
    q.insert("D_z(h1)".into(), d_h1.value);
    q.insert("D_z(h2)".into(), d_h2.value);
    if !le(est(s1), est(s2), 1.0) {
        return Ok(InequalityReport::skip(
            S,
            samples,
            format!("||h1|| = {s1} exceeds ||h2|| = {s2}"),
            q,
        ));
    }
    if !le(d_h1, d_h2, c) {
        return Ok(InequalityReport::skip(S, samples, "D_z(h1) > c D_z(h2)".to_string(), q));
    }
    let mixed_outer =
        !(matches!(g, Func::Analytic(_)) && matches!(h1, Func::Analytic(_)) && matches!(h2, Func::Analytic(_)));
    if mixed_outer {
        for (f, name) in [(g, "g"), (h1, "h1"), (h2, "h2")] {
            if let Some(r) = require_outer(f, name, spec)? {
                return Ok(InequalityReport::skip(S, samples, r, q));
            }
        }
    }
    let d_g = finite_or_inf(local_dirichlet(g, zeta, spec)?);
    let d_gh1 = product_local(g, h1, zeta, spec)?;
    let d_gh2 = product_local(g, h2, zeta, spec)?;
    q.insert("D_z(g)".into(), d_g.value);
    q.insert("D_z(g h1)".into(), d_gh1.value);
    q.insert("D_z(g h2)".into(), d_gh2.value);
    let rhs = d_gh2.scale(4.0 * c) + d_g.scale((2.0 + 4.0 * c) * s2 * s2);
    let rows = vec![InequalityRow::new("zeta", d_gh1, rhs)];
    Ok(InequalityReport::finish(S, samples, rows, q))
}

/// `D_z(h ∧ n h^2) <= 4 D_z(h)` for outer `h`.
pub fn verify_cutoff(h: &Func, zeta: Complex64, n: f64, spec: &QuadratureSpec) -> Result<InequalityReport> {
    const S: &str = "D_z(h ∧ n h^2) <= 4 D_z(h)";
    if !(n > 0.0 && n.is_finite()) {
        return Err(DmuError::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let samples = format!("zeta = {zeta}, n = {n}");
    let mut q = BTreeMap::new();
    if let Some(r) = require_outer(h, "h", spec)? {
        return Ok(InequalityReport::skip(S, samples, r, q));
    }
    let sup = h.sup_norm();
    q.insert("sup_h".into(), sup);
    if !sup.is_finite() {
        return Ok(InequalityReport::skip(S, samples, "h is unbounded".into(), q));
    }
    let m = local_dirichlet_outer(&cutoff_log_modulus(h, n), zeta, spec)?;
    let lhs = if m.converged {
        m.estimate
    } else {
        Estimate::new(f64::INFINITY, f64::INFINITY)
    };
    let d_h = finite_or_inf(local_dirichlet(h, zeta, spec)?);
    q.insert("D_z(h ∧ n h^2)".into(), lhs.value);
    q.insert("D_z(h)".into(), d_h.value);
    let rows = vec![InequalityRow::new(format!("n = {n}"), lhs, d_h.scale(4.0))];
    Ok(InequalityReport::finish(S, samples, rows, q))
}

fn norm_of_product(g: &Func, h: &Func, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<DmuNorm> {
    match (g, h) {
        (Func::Analytic(a), Func::Analytic(b)) => dmu_norm_sq(&Func::Analytic(a.mul(b)), mu, spec),
        _ => {
            let b = BoundaryLogModulus::Sum(vec![log_modulus_of(g), log_modulus_of(h)]);
            dmu_norm_sq_outer(&b, mu, spec)
        }
    }
}

/// `||g (h ∧ n h^2)||^2 <= 16 ||g h||^2 + 18 ||h||^2 ||g||^2` in `D(mu)`.
pub fn verify_norm_ineq(
    g: &Func,
    h: &Func,
    mu: &CircleMeasure,
    n: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    const S: &str = "||g (h ∧ n h^2)||_mu^2 <= 16 ||g h||_mu^2 + 18 ||h||_inf^2 ||g||_mu^2";
    if !(n > 0.0 && n.is_finite()) {
        return Err(DmuError::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let samples = format!("n = {n}, measure mass = {:.6}", mu.total_mass());
    let mut q = BTreeMap::new();
    if matches!(g, Func::Analytic(a) if a.is_zero_constant()) {
        let rows = vec![InequalityRow::new("g = 0", est(0.0), est(0.0))];
        return Ok(InequalityReport::finish(S, samples, rows, q));
    }
    for (f, name) in [(h, "h"), (g, "g")] {
        if let Some(r) = require_outer(f, name, spec)? {
            return Ok(InequalityReport::skip(S, samples, r, q));
        }
    }
    let sup = h.sup_norm();
    q.insert("sup_h".into(), sup);
    if !sup.is_finite() {
        return Ok(InequalityReport::skip(S, samples, "h is unbounded".into(), q));
    }
    let g_norm = match g {
        Func::Analytic(_) => dmu_norm_sq(g, mu, spec)?,
        Func::Outer(o) => dmu_norm_sq_outer(o.boundary(), mu, spec)?,
    };
    let gh = norm_of_product(g, h, mu, spec)?;
    q.insert("||g||^2".into(), g_norm.norm_sq.value);
    q.insert("||g h||^2".into(), gh.norm_sq.value);
    if !g_norm.is_finite() || !gh.is_finite() {
        return Ok(InequalityReport::skip(
            S,
            samples,
            "g or g h is not numerically in D(mu)".into(),
            q,
        ));
    }
    let cut = BoundaryLogModulus::Sum(vec![log_modulus_of(g), cutoff_log_modulus(h, n)]);
    let lhs = dmu_norm_sq_outer(&cut, mu, spec)?;
    q.insert("||g (h ∧ n h^2)||^2".into(), lhs.norm_sq.value);
    let rhs = gh.norm_sq.scale(16.0) + g_norm.norm_sq.scale(18.0 * sup * sup);
    let lhs_est = if lhs.is_finite() {
        lhs.norm_sq
    } else {
        Estimate::new(f64::INFINITY, f64::INFINITY)
    };
    let rows = vec![InequalityRow::new(format!("n = {n}"), lhs_est, rhs)];
    Ok(InequalityReport::finish(S, samples, rows, q))
}

/// Polar grid `r_i = 1 - 10^(-6 i / 99)`, 100 angles, for `i < 100`.
fn polar_grid() -> Vec<Complex64> {
    let mut v = Vec::with_capacity(10_000);
    for i in 0..100 {
        let r = if i == 0 {
            0.0
        } else {
            1.0 - 10f64.powf(-6.0 * i as f64 / 99.0)
        };
        for j in 0..100 {
            v.push(Complex64::from_polar(r, TAU * j as f64 / 100.0));
        }
    }
    v
}

fn herglotz_check(f: &AnalyticFn) -> Result<std::result::Result<f64, String>> {
    let f0 = f.eval(Complex64::new(0.0, 0.0))?;
    if !(f0.re > 0.0) || f0.im.abs() > 1e-12 * f0.re.max(1.0) {
        return Ok(Err(format!("f(0) = {f0} is not a positive real")));
    }
    for z in certification_grid().into_iter().chain(polar_grid()) {
        let v = f.eval(z)?;
        if !(v.re > 0.0) {
            return Ok(Err(format!("Re f <= 0 at z = {z} (f = {v})")));
        }
    }
    Ok(Ok(f0.re))
}

/// `|G_n(f(z))| <= pi/2 + M_n F_n(|z|^2)` with `M_0 = 4 f(0)`, `n <= n_max`.
pub fn verify_gn_bound(f: &AnalyticFn, n_max: usize) -> Result<InequalityReport> {
    const S: &str = "|G_n(f(z))| <= pi/2 + M_n F_n(|z|^2), M_0 = 4 f(0)";
    let samples = "100 x 100 polar grid, r_i = 1 - 10^(-6i/99)".to_string();
    let mut q = BTreeMap::new();
    let f0 = match herglotz_check(f)? {
        Ok(v) => v,
        Err(reason) => return Ok(InequalityReport::skip(S, samples, reason, q)),
    };
    let table = compute_m(n_max, 4.0 * f0)?;
    for (n, m) in table.m.iter().enumerate() {
        q.insert(format!("M_{n}"), *m);
    }
    let grid = polar_grid();
    let values: Vec<(Complex64, f64, Complex64)> = grid
        .iter()
        .map(|&z| Ok((z, z.norm_sqr(), f.eval(z)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let mut worst: Option<InequalityRow> = None;
        for &(z, r2, fz) in &values {
            let lhs = iterlog::g_unchecked(n, fz).norm();
            let rhs = FRAC_PI_2 + table.m[n] * majorant(n, r2)?;
            let row = InequalityRow::new(
                format!("n = {n}, worst z = {:.6}{:+.6}i", z.re, z.im),
                est(lhs),
                est(rhs),
            );
            if worst.as_ref().is_none_or(|w| row.violation > w.violation) {
                worst = Some(row);
            }
        }
        rows.extend(worst);
    }
    Ok(InequalityReport::finish(S, samples, rows, q))
}

/// `|f(z)| <= 4 f(0) / (1 - |z|^2)` for Herglotz `f`.
pub fn verify_herglotz_growth(f: &AnalyticFn) -> Result<InequalityReport> {
    const S: &str = "|f(z)| <= 4 f(0) / (1 - |z|^2)";
    let samples = "100 x 100 polar grid, r_i = 1 - 10^(-6i/99)".to_string();
    let f0 = match herglotz_check(f)? {
        Ok(v) => v,
        Err(reason) => return Ok(InequalityReport::skip(S, samples, reason, BTreeMap::new())),
    };
    let mut worst: Option<InequalityRow> = None;
    for z in polar_grid() {
        let d = 1.0 - z.norm();
        let rhs = 4.0 * f0 / (d * (2.0 - d));
        let row = InequalityRow::new(
            format!("worst z = {:.6}{:+.6}i", z.re, z.im),
            est(f.eval(z)?.norm()),
            est(rhs),
        );
        if worst.as_ref().is_none_or(|w| row.violation > w.violation) {
            worst = Some(row);
        }
    }
    let mut q = BTreeMap::new();
    q.insert("f(0)".into(), f0);
    Ok(InequalityReport::finish(S, samples, worst.into_iter().collect(), q))
}

/// `|G_{n+1}(it)| <= log(1 + |G_n(it)|) + pi/2` along the curve sample times.
pub fn verify_step_bound(n_max: usize, samples: usize) -> InequalityReport {
    const S: &str = "|G_{n+1}(it)| <= log(1 + |G_n(it)|) + pi/2";
    let ns: Vec<usize> = (0..=n_max).collect();
    let curves = imaginary_axis_curves(&ns, samples);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let cur: Vec<_> = curves.iter().filter(|r| r.n == n).collect();
        let prev: Vec<_> = curves.iter().filter(|r| r.n == n - 1).collect();
        let mut worst: Option<InequalityRow> = None;
        for (c, p) in cur.iter().zip(&prev) {
            let row = InequalityRow::new(
                format!("n = {n}, worst t = {:e}", c.t),
                est(c.abs),
                est(p.abs.ln_1p() + FRAC_PI_2),
            );
            if worst.as_ref().is_none_or(|w| row.violation > w.violation) {
                worst = Some(row);
            }
        }
        rows.extend(worst);
    }
    InequalityReport::finish(
        S,
        format!("{samples} log-spaced t in [1e-3, 1e4]"),
        rows,
        BTreeMap::new(),
    )
}

/// Radical-inverse sequence in base `b`.
fn halton(i: usize, b: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, i);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Deterministic low-discrepancy points in the open right half-plane with
/// moduli spread over `[1e-6, 1e6]`.
pub fn right_half_plane_points(count: usize) -> Vec<Complex64> {
    (1..=count)
        .map(|i| {
            let rho = 10f64.powf(-6.0 + 12.0 * halton(i, 2));
            let phi = (halton(i, 3) - 0.5) * PI * (1.0 - 1e-9);
            Complex64::from_polar(rho, phi)
        })
        .collect()
}

/// `|G_n'(z)| <= 1` on `count` points with `Re z > 0`, `n <= n_max`.
pub fn verify_deriv_bound(n_max: usize, count: usize) -> Result<InequalityReport> {
    const S: &str = "|G_n'(z)| <= 1 on Re z > 0";
    let pts = right_half_plane_points(count);
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let mut worst: Option<InequalityRow> = None;
        for &z in &pts {
            let d = iterlog::g_deriv(n, z)?.norm();
            let row = InequalityRow::new(format!("n = {n}, worst z = {z:.6e}"), est(d), est(1.0));
            if worst.as_ref().is_none_or(|w| row.violation > w.violation) {
                worst = Some(row);
            }
        }
        rows.extend(worst);
    }
    Ok(InequalityReport::finish(
        S,
        format!("{count} Halton points, |z| in [1e-6, 1e6]"),
        rows,
        BTreeMap::new(),
    ))
}
