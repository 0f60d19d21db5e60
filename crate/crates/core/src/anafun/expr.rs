//! Closed-form holomorphic functions on the disc as expression trees.
//!
//! Derivatives are exact: every node evaluates a `(value, derivative)` pair
//! by forward-mode differentiation of the tree.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::iterlog;
use crate::quad::{normalize_angles, wrap_angle};

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
use crate::{DmuError, Result};

/// A complex constant; JSON accepts a number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CNum(pub Complex64);

impl Serialize for CNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for CNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => CNum(Complex64::new(x, 0.0)),
            Repr::Pair([a, b]) => CNum(Complex64::new(a, b)),
        })
    }
}

impl From<f64> for CNum {
    fn from(x: f64) -> Self {
        CNum(Complex64::new(x, 0.0))
    }
}

impl From<Complex64> for CNum {
    fn from(z: Complex64) -> Self {
        CNum(z)
    }
}

fn one() -> CNum {
    CNum(Complex64::new(1.0, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    Constant {
        value: CNum,
    },
    Identity {},
    Sum {
        terms: Vec<Node>,
    },
    Product {
        factors: Vec<Node>,
    },
    Quotient {
        num: Box<Node>,
        den: Box<Node>,
    },
    Scale {
        factor: CNum,
        arg: Box<Node>,
    },
    /// `scale * (1 - lambda z)^alpha`, `|lambda| = 1`, principal branch.
    Power {
        lambda: CNum,
        alpha: f64,
        #[serde(default = "one")]
        scale: CNum,
    },
    Exp {
        arg: Box<Node>,
    },
    /// Principal logarithm.
    Log {
        arg: Box<Node>,
    },
    /// `G_n` applied to the subtree.
    GnCompose {
        n: usize,
        arg: Box<Node>,
    },
}

type Jet = (Complex64, Complex64);

impl Node {
    fn jet(&self, z: Complex64) -> Jet {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Node::Constant { value } => (value.0, zero),
            Node::Identity {} => (z, Complex64::new(1.0, 0.0)),
            Node::Sum { terms } => terms.iter().fold((zero, zero), |acc, t| {
                let (v, d) = t.jet(z);
                (acc.0 + v, acc.1 + d)
            }),
            Node::Product { factors } => factors.iter().fold((Complex64::new(1.0, 0.0), zero), |acc, f| {
                let (v, d) = f.jet(z);
                (acc.0 * v, acc.1 * v + acc.0 * d)
            }),
            Node::Quotient { num, den } => {
                let (a, da) = num.jet(z);
                let (b, db) = den.jet(z);
                (a / b, (da * b - a * db) / (b * b))
            }
            Node::Scale { factor, arg } => {
                let (v, d) = arg.jet(z);
                (factor.0 * v, factor.0 * d)
            }
            Node::Power { lambda, alpha, scale } => {
                let base = Complex64::new(1.0, 0.0) - lambda.0 * z;
                let (p, pm1) = powers(base, *alpha);
                (scale.0 * p, -scale.0 * lambda.0 * *alpha * pm1)
            }
            Node::Exp { arg } => {
                let (v, d) = arg.jet(z);
                let e = v.exp();
                (e, e * d)
            }
            Node::Log { arg } => {
                let (v, d) = arg.jet(z);
                (v.ln(), d / v)
            }
            Node::GnCompose { n, arg } => {
                let (v, d) = arg.jet(z);
                let (gv, gd) = iterlog::g_jet(*n, v);
                (gv, gd * d)
            }
        }
    }

    fn collect_singular(&self, out: &mut Vec<f64>) {
        match self {
            Node::Constant { .. } | Node::Identity {} => {}
            Node::Sum { terms } => terms.iter().for_each(|t| t.collect_singular(out)),
            Node::Product { factors } => factors.iter().for_each(|t| t.collect_singular(out)),
            Node::Quotient { num, den } => {
                num.collect_singular(out);
                den.collect_singular(out);
                if let Some((a0, a1)) = den.affine() {
                    if a1.norm() > 0.0 {
                        let root = -a0 / a1;
                        if (root.norm() - 1.0).abs() < 1e-9 {
                            out.push(wrap_angle(root.arg()));
                        }
                    }
                }
            }
            Node::Scale { arg, .. } | Node::Exp { arg } | Node::Log { arg } | Node::GnCompose { arg, .. } => {
                arg.collect_singular(out)
            }
            // integer powers are smooth but vanish there, so their logarithms are not
            Node::Power { lambda, alpha, .. } => {
                if *alpha != 0.0 {
                    out.push(wrap_angle(-lambda.0.arg()));
                }
            }
        }
    }

    fn may_cancel(&self) -> bool {
        match self {
            Node::Constant { .. } | Node::Identity {} | Node::Power { .. } | Node::Exp { .. } => false,
            Node::Sum { .. } | Node::Log { .. } => true,
            Node::Product { factors } => factors.iter().any(Node::may_cancel),
            Node::Quotient { num, den } => num.may_cancel() || den.may_cancel(),
            Node::Scale { arg, .. } | Node::GnCompose { arg, .. } => arg.may_cancel(),
        }
    }

    /// `(a0, a1)` when the subtree is the affine map `a0 + a1 z`.
    fn affine(&self) -> Option<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Node::Constant { value } => Some((value.0, zero)),
            Node::Identity {} => Some((zero, Complex64::new(1.0, 0.0))),
            Node::Sum { terms } => terms
                .iter()
                .try_fold((zero, zero), |acc, t| t.affine().map(|(a, b)| (acc.0 + a, acc.1 + b))),
            Node::Scale { factor, arg } => arg.affine().map(|(a, b)| (factor.0 * a, factor.0 * b)),
            Node::Power { lambda, alpha, scale } if *alpha == 1.0 => Some((scale.0, -scale.0 * lambda.0)),
            Node::Power { scale, alpha, .. } if *alpha == 0.0 => Some((scale.0, zero)),
            Node::Product { factors } => {
                let mut acc = (Complex64::new(1.0, 0.0), zero);
                for f in factors {
                    let (a, b) = f.affine()?;
                    if acc.1 != zero && b != zero {
                        return None;
                    }
                    acc = (acc.0 * a, acc.0 * b + acc.1 * a);
                }
                Some(acc)
            }
            _ => None,
        }
    }

    fn structural_check(&self) -> Result<()> {
        let bad = |m: String| Err(DmuError::InvalidFunction(m));
        match self {
            Node::Constant { value } => {
                if !(value.0.re.is_finite() && value.0.im.is_finite()) {
                    return bad("non-finite constant".into());
                }
            }
            Node::Identity {} => {}
            Node::Sum { terms } => {
                if terms.is_empty() {
                    return bad("empty sum".into());
                }
                for t in terms {
                    t.structural_check()?;
                }
            }
            Node::Product { factors } => {
                if factors.is_empty() {
                    return bad("empty product".into());
                }
                for t in factors {
                    t.structural_check()?;
                }
            }
            Node::Quotient { num, den } => {
                num.structural_check()?;
                den.structural_check()?;
            }
            Node::Scale { factor, arg } => {
                if !(factor.0.re.is_finite() && factor.0.im.is_finite()) {
                    return bad("non-finite scale factor".into());
                }
                arg.structural_check()?;
            }
            Node::Power { lambda, alpha, scale } => {
                if (lambda.0.norm() - 1.0).abs() > 1e-9 {
                    return bad(format!("power node needs |lambda| = 1, got {}", lambda.0.norm()));
                }
                if !alpha.is_finite() || !(scale.0.re.is_finite() && scale.0.im.is_finite()) {
                    return bad("power node has non-finite parameters".into());
                }
            }
            Node::Exp { arg } | Node::Log { arg } | Node::GnCompose { arg, .. } => arg.structural_check()?,
        }
        Ok(())
    }

    /// Checks quotient denominators, logarithm arguments and `G_n` arguments
    /// on a fixed interior grid.
    fn sampled_check(&self, grid: &[Complex64]) -> Result<()> {
        let bad = |m: String| Err(DmuError::InvalidFunction(m));
        match self {
            Node::Constant { .. } | Node::Identity {} | Node::Power { .. } => {}
            Node::Sum { terms } => terms.iter().try_for_each(|t| t.sampled_check(grid))?,
            Node::Product { factors } => factors.iter().try_for_each(|t| t.sampled_check(grid))?,
            Node::Quotient { num, den } => {
                num.sampled_check(grid)?;
                den.sampled_check(grid)?;
                for &z in grid {
                    let v = den.jet(z).0;
                    if !(v.norm() > 1e-300) || !v.re.is_finite() {
                        return bad(format!("denominator vanishes near z = {z}"));
                    }
                }
            }
            Node::Scale { arg, .. } | Node::Exp { arg } => arg.sampled_check(grid)?,
            Node::Log { arg } => {
                arg.sampled_check(grid)?;
                for &z in grid {
                    let v = arg.jet(z).0;
                    if !(v.re > 0.0) {
                        return bad(format!(
                            "logarithm argument leaves the right half-plane at z = {z} (value {v})"
                        ));
                    }
                }
            }
            Node::GnCompose { arg, .. } => {
                arg.sampled_check(grid)?;
                for &z in grid {
                    let v = arg.jet(z).0;
                    if !(v.re >= -1e-12) {
                        return bad(format!("G_n argument has negative real part at z = {z} (value {v})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(b^a, b^(a-1))` on the principal branch.
fn powers(base: Complex64, alpha: f64) -> (Complex64, Complex64) {
    if alpha == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if alpha.fract() == 0.0 && alpha.abs() <= 64.0 {
        let k = alpha as i32;
        return (base.powi(k), base.powi(k - 1));
    }
    let l = base.ln();
    ((l * alpha).exp(), (l * (alpha - 1.0)).exp())
}

/// Interior grid used to certify node invariants.
pub fn certification_grid() -> Vec<Complex64> {
    let radii = [0.0, 0.3, 0.6, 0.9, 0.99, 0.999, 0.9999];
    let m = 64;
    let mut g = Vec::new();
    for &r in &radii {
        for j in 0..m {
            let t = (j as f64 + 0.37) * TAU / m as f64;
            g.push(Complex64::from_polar(r, t));
        }
    }
    g
}

/// A validated holomorphic function on the disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Node", into = "Node")]
pub struct AnalyticFn {
    node: Node,
}

impl TryFrom<Node> for AnalyticFn {
    type Error = DmuError;
    fn try_from(node: Node) -> Result<Self> {
        AnalyticFn::new(node)
    }
}

impl From<AnalyticFn> for Node {
    fn from(f: AnalyticFn) -> Node {
        f.node
    }
}

fn check_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(DmuError::OutsideDisc { re: z.re, im: z.im })
    }
}

impl AnalyticFn {
    pub fn new(node: Node) -> Result<Self> {
        node.structural_check()?;
        node.sampled_check(&certification_grid())?;
        Ok(AnalyticFn { node })
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn constant(c: impl Into<CNum>) -> Self {
        AnalyticFn {
            node: Node::Constant { value: c.into() },
        }
    }

    pub fn identity() -> Self {
        AnalyticFn {
            node: Node::Identity {},
        }
    }

    /// `z^k`
    pub fn monomial(k: usize) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        AnalyticFn {
            node: Node::Product {
                factors: vec![Node::Identity {}; k],
            },
        }
    }

    /// `sum_k coeffs[k] z^k`
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let terms: Vec<Node> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &c)| Node::Scale {
                factor: c.into(),
                arg: Box::new(Self::monomial(k).node),
            })
            .collect();
        if terms.is_empty() {
            return Self::constant(0.0);
        }
        AnalyticFn {
            node: Node::Sum { terms },
        }
    }

    /// `scale * (1 - lambda z)^alpha`
    pub fn power(lambda: impl Into<CNum>, alpha: f64, scale: impl Into<CNum>) -> Result<Self> {
        Self::new(Node::Power {
            lambda: lambda.into(),
            alpha,
            scale: scale.into(),
        })
    }

    pub fn sum(terms: Vec<AnalyticFn>) -> Result<Self> {
        Self::new(Node::Sum {
            terms: terms.into_iter().map(|t| t.node).collect(),
        })
    }

    pub fn product(factors: Vec<AnalyticFn>) -> Result<Self> {
        Self::new(Node::Product {
            factors: factors.into_iter().map(|t| t.node).collect(),
        })
    }

    pub fn quotient(num: AnalyticFn, den: AnalyticFn) -> Result<Self> {
        Self::new(Node::Quotient {
            num: Box::new(num.node),
            den: Box::new(den.node),
        })
    }

    pub fn scaled(self, c: impl Into<CNum>) -> Self {
        AnalyticFn {
            node: Node::Scale {
                factor: c.into(),
                arg: Box::new(self.node),
            },
        }
    }

    pub fn exp(self) -> Self {
        AnalyticFn {
            node: Node::Exp {
                arg: Box::new(self.node),
            },
        }
    }

    pub fn log(self) -> Result<Self> {
        Self::new(Node::Log {
            arg: Box::new(self.node),
        })
    }

    pub fn gn(self, n: usize) -> Result<Self> {
        Self::new(Node::GnCompose {
            n,
            arg: Box::new(self.node),
        })
    }

    pub fn mul(&self, other: &AnalyticFn) -> Self {
        AnalyticFn {
            node: Node::Product {
                factors: vec![self.node.clone(), other.node.clone()],
            },
        }
    }

    /// `log(1/f) = -log f`
    pub fn log_recip(self) -> Result<Self> {
        Ok(self.log()?.scaled(-1.0))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_disc(z)?;
        Ok(self.node.jet(z).0)
    }

    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disc(z)?;
        Ok(self.node.jet(z).1)
    }

    /// Value and derivative without the domain check; used on and near the
    /// circle where closed forms extend continuously.
    pub fn jet_raw(&self, z: Complex64) -> (Complex64, Complex64) {
        self.node.jet(z)
    }

    pub fn eval_raw(&self, z: Complex64) -> Complex64 {
        self.node.jet(z).0
    }

    /// `log |f(e^{it})|`
    pub fn boundary_log_modulus(&self, t: f64) -> f64 {
        self.eval_raw(Complex64::from_polar(1.0, t)).norm().ln()
    }

    /// Boundary angles where the tree, its derivative, or a logarithm of it
    /// may fail to be smooth.
    /// Branch points, poles and boundary zeros, where `log |f|` and the
    /// Dirichlet integrands stop being smooth.
    pub fn singular_angles(&self) -> Vec<f64> {
        let mut v = Vec::new();
        self.node.collect_singular(&mut v);
        // cancellation can only come from sums and logarithms
        if self.node.may_cancel() {
            for t in self.boundary_zeros() {
                if v.iter().all(|&s| angle_gap(s, t) > 1e-6) {
                    v.push(t);
                }
            }
        }
        normalize_angles(&v)
    }

    /// Zeros of `f(e^{it})` found by a uniform scan plus golden-section refinement.
    fn boundary_zeros(&self) -> Vec<f64> {
        const SCAN: usize = 8192;
        let modulus = |t: f64| self.eval_raw(Complex64::from_polar(1.0, t)).norm();
        let vals: Vec<f64> = (0..SCAN).map(|k| modulus(TAU * k as f64 / SCAN as f64)).collect();
        let scale = vals.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Vec::new();
        }
        let h = TAU / SCAN as f64;
        let mut zeros = Vec::new();
        for k in 0..SCAN {
            let (prev, cur, next) = (vals[(k + SCAN - 1) % SCAN], vals[k], vals[(k + 1) % SCAN]);
            if !(cur <= prev && cur < next && cur < 1e-2 * scale) {
                continue;
            }
            let (mut a, mut b) = (TAU * k as f64 / SCAN as f64 - h, TAU * k as f64 / SCAN as f64 + h);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let (x1, x2) = (b - phi * (b - a), a + phi * (b - a));
                if modulus(x1) <= modulus(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let t = 0.5 * (a + b);
            if modulus(t) <= 1e-7 * scale {
                zeros.push(wrap_angle(t));
            }
        }
        zeros
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(&self.node, Node::Constant { value } if value.0 == Complex64::new(0.0, 0.0))
    }

    pub fn is_constant(&self) -> bool {
        matches!(&self.node, Node::Constant { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basic_values() {
        let id = AnalyticFn::identity();
        assert_eq!(id.eval(c(0.3, 0.4)).unwrap(), c(0.3, 0.4));
        let h = AnalyticFn::power(1.0, 1.0, 0.5).unwrap();
        assert_eq!(h.eval(c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(h.deriv(c(0.2, -0.7)).unwrap(), c(-0.5, 0.0));
        let sq = AnalyticFn::monomial(2);
        assert!((sq.deriv(c(0.5, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let g1 = AnalyticFn::polynomial(&[1.0, 1.0]).gn(1).unwrap();
        assert!((g1.deriv(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(id.eval(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn json_schema() {
        let f: AnalyticFn = serde_json::from_str(r#"{"kind":"power","lambda":1.0,"alpha":1,"scale":0.5}"#).unwrap();
        assert_eq!(f, AnalyticFn::power(1.0, 1.0, 0.5).unwrap());
        let g: AnalyticFn = serde_json::from_str(
            r#"{"kind":"gn_compose","n":2,"arg":{"kind":"log","arg":{"kind":"quotient","num":{"kind":"constant","value":1},"den":{"kind":"power","lambda":1.0,"alpha":1,"scale":0.5}}}}"#,
        )
        .unwrap();
        assert!(g.eval(c(0.1, 0.2)).is_ok());
        let back: AnalyticFn = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<AnalyticFn>(r#"{"kind":"identity","extra":1}"#).is_err());
        assert!(serde_json::from_str::<AnalyticFn>(r#"{"kind":"power","lambda":2.0,"alpha":1}"#).is_err());
        let z: AnalyticFn = serde_json::from_str(r#"{"kind":"constant","value":[0.0,1.0]}"#).unwrap();
        assert_eq!(z.eval(c(0.0, 0.0)).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn invalid_logs_and_quotients_are_rejected() {
        // log z vanishes at 0
        assert!(AnalyticFn::identity().log().is_err());
        // 1/z
        assert!(AnalyticFn::quotient(AnalyticFn::constant(1.0), AnalyticFn::identity()).is_err());
        // log of (1 - z)/2 is fine
        assert!(AnalyticFn::power(1.0, 1.0, 0.5).unwrap().log().is_ok());
    }

    #[test]
    fn singular_angles_of_common_forms() {
        let h = AnalyticFn::power(-1.0, 0.5, 1.0).unwrap();
        assert_eq!(h.singular_angles(), vec![std::f64::consts::PI]);
        let singular_inner = AnalyticFn::quotient(
            AnalyticFn::polynomial(&[1.0, 1.0]),
            AnalyticFn::polynomial(&[-1.0, 1.0]),
        )
        .unwrap()
        .exp();
        assert_eq!(singular_inner.singular_angles(), vec![0.0]);
        assert!(AnalyticFn::monomial(3).singular_angles().is_empty());
        let sum = AnalyticFn::polynomial(&[0.5, 0.0, 0.5]).singular_angles();
        assert_eq!(sum.len(), 2);
        assert!((sum[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!((sum[1] - 1.5 * std::f64::consts::PI).abs() < 1e-9);
        assert!(AnalyticFn::polynomial(&[0.75, 0.25]).singular_angles().is_empty());
    }
}
