//! Cyclicity-sufficiency certificates and numerical checks of the
//! inequalities they rest on.
//!
//! A certificate only ever claims sufficiency. Failure to certify is
//! reported as INCONCLUSIVE, or as DIVERGENT_EVIDENCE when the decisive
//! integral is numerically divergent; neither is a claim of non-cyclicity.

pub mod verify;

pub use verify::{
    verify_cutoff, verify_deriv_bound, verify_gn_bound, verify_h1h2, verify_herglotz_growth, verify_norm_ineq,
    verify_step_bound, InequalityReport, InequalityRow, Status, INEQUALITY_TOL,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::anafun::{is_outer, min_modulus, sup_norm_estimate, AnalyticFn, OUTER_TOL};
use crate::dirichlet::{dmu_seminorm_sq, h2_norm_sq_profiled, weighted_area, worst, NormResult};
use crate::iterlog;
use crate::measure::CircleMeasure;
use crate::quad::{DiscPoint, QuadratureSpec, TailVerdict};
use crate::Result;

pub const RULE_LOG: &str = "log-membership: log g in D(mu), which lies in N+(D(mu))";
pub const RULE_ITERLOG: &str = "iterated-log-membership: G_n(log 1/g) in D(mu) with ||g||_inf <= 1";
pub const RULE_GROWTH: &str =
    "growth-condition: int |g'|^2 |G_n(1/(1-|z|^2))|^2 dA finite, so the equivalence list applies";

/// Allowed excess of the sup-norm estimate over 1.
pub const SUP_TOL: f64 = 1e-9;
/// Minimum modulus below which a function is treated as vanishing.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    SufficientCyclic,
    Inconclusive,
    DivergentEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub passed: bool,
    pub value: f64,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Preconditions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer: Option<Flag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_norm: Option<Flag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_vanishing: Option<Flag>,
}

impl Preconditions {
    pub fn all_passed(&self) -> bool {
        [&self.outer, &self.sup_norm, &self.non_vanishing]
            .iter()
            .all(|f| f.as_ref().is_none_or(|f| f.passed))
    }

    fn failures(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, f) in [
            ("outer", &self.outer),
            ("sup_norm", &self.sup_norm),
            ("non_vanishing", &self.non_vanishing),
        ] {
            if let Some(f) = f {
                if !f.passed {
                    v.push(format!("{name}: {}", f.detail));
                }
            }
        }
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub rule: String,
    pub computed_quantities: BTreeMap<String, NormResult>,
    pub preconditions_checked: Preconditions,
    /// Set when the growth condition holds; records applicability of the
    /// equivalence list, not cyclicity.
    pub equivalences_apply: bool,
    pub reason: String,
}

impl Certificate {
    fn withheld(rule: &str, pre: Preconditions, reason: String) -> Self {
        Certificate {
            verdict: Verdict::Inconclusive,
            rule: rule.into(),
            computed_quantities: BTreeMap::new(),
            preconditions_checked: pre,
            equivalences_apply: false,
            reason,
        }
    }

    /// SUFFICIENT_CYCLIC requires every precondition and every decisive
    /// profile to have passed.
    pub fn is_consistent(&self) -> bool {
        self.verdict != Verdict::SufficientCyclic
            || (self.preconditions_checked.all_passed()
                && self
                    .computed_quantities
                    .values()
                    .all(|q| q.verdict == TailVerdict::Convergent))
    }
}

fn outer_flag(g: &AnalyticFn, spec: &QuadratureSpec) -> Result<Flag> {
    let c = is_outer(g, OUTER_TOL, spec)?;
    Ok(Flag {
        passed: c.outer,
        value: c.discrepancy.unwrap_or(f64::NAN),
        detail: c.reason,
        sample: None,
    })
}

fn sup_flag(g: &AnalyticFn) -> Flag {
    let s = sup_norm_estimate(g);
    Flag {
        passed: s.value <= 1.0 + SUP_TOL,
        value: s.value,
        detail: format!("max |g| = {:.12} on |z| = {}", s.value, s.radius),
        sample: Some([s.radius * s.argmax.cos(), s.radius * s.argmax.sin()]),
    }
}

fn nonvanishing_flag(g: &AnalyticFn) -> Flag {
    let m = min_modulus(g);
    Flag {
        passed: m.value > ZERO_TOL,
        value: m.value,
        detail: format!("min |g| = {:.3e} on the sample grid", m.value),
        sample: Some(m.at),
    }
}

fn verdict_from(quantities: &BTreeMap<String, NormResult>) -> (Verdict, String) {
    let v = quantities
        .values()
        .fold(TailVerdict::Convergent, |acc, q| worst(acc, q.verdict));
    let names = |t: TailVerdict| {
        quantities
            .iter()
            .filter(|(_, q)| q.verdict == t)
            .map(|(k, _)| k.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    match v {
        TailVerdict::Convergent => (Verdict::SufficientCyclic, "all decisive tails convergent".into()),
        TailVerdict::Divergent => (
            Verdict::DivergentEvidence,
            format!("divergent tail: {}", names(TailVerdict::Divergent)),
        ),
        TailVerdict::Inconclusive => (
            Verdict::Inconclusive,
            format!("inconclusive tail: {}", names(TailVerdict::Inconclusive)),
        ),
    }
}

/// Membership test for `F` in `D(mu)`: its `H^2` and seminorm profiles.
fn membership(f: &AnalyticFn, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<BTreeMap<String, NormResult>> {
    let func = f.clone().into();
    let mut q = BTreeMap::new();
    q.insert("h2_norm_sq".to_string(), h2_norm_sq_profiled(&func, spec)?);
    q.insert("dmu_seminorm_sq".to_string(), dmu_seminorm_sq(&func, mu, spec)?);
    Ok(q)
}

/// Sufficiency through `log g in D(mu)`.
pub fn certify_log(g: &AnalyticFn, mu: &CircleMeasure, spec: &QuadratureSpec) -> Result<Certificate> {
    spec.validate()?;
    mu.validate()?;
    let pre = Preconditions {
        outer: Some(outer_flag(g, spec)?),
        sup_norm: None,
        non_vanishing: Some(nonvanishing_flag(g)),
    };
    if !pre.all_passed() {
        return Ok(Certificate::withheld(
            RULE_LOG,
            pre.clone(),
            format!(
                "verdict withheld; cyclic functions are outer and zero-free ({})",
                pre.failures().join("; ")
            ),
        ));
    }
    let log_g = match g.clone().log() {
        Ok(f) => f,
        Err(e) => {
            return Ok(Certificate::withheld(
                RULE_LOG,
                pre,
                format!("log g not available: {e}"),
            ))
        }
    };
    let q = membership(&log_g, mu, spec)?;
    let (verdict, reason) = verdict_from(&q);
    Ok(Certificate {
        verdict,
        rule: RULE_LOG.into(),
        computed_quantities: q,
        preconditions_checked: pre,
        equivalences_apply: false,
        reason,
    })
}

/// `G_n(log 1/g)` as an expression tree.
pub fn iterlog_composite(g: &AnalyticFn, n: usize) -> Result<AnalyticFn> {
    g.clone().log_recip()?.gn(n)
}

/// Sufficiency through `G_n(log 1/g) in D(mu)`.
pub fn certify_iterlog(g: &AnalyticFn, mu: &CircleMeasure, n: usize, spec: &QuadratureSpec) -> Result<Certificate> {
    spec.validate()?;
    mu.validate()?;
    let pre = Preconditions {
        outer: Some(outer_flag(g, spec)?),
        sup_norm: Some(sup_flag(g)),
        non_vanishing: Some(nonvanishing_flag(g)),
    };
    if !pre.all_passed() {
        let reason = format!("verdict withheld; precondition failed ({})", pre.failures().join("; "));
        return Ok(Certificate::withheld(RULE_ITERLOG, pre, reason));
    }
    let f = match iterlog_composite(g, n) {
        Ok(f) => f,
        Err(e) => {
            return Ok(Certificate::withheld(
                RULE_ITERLOG,
                pre,
                format!("G_n(log 1/g) not available: {e}"),
            ))
        }
    };
    let q = membership(&f, mu, spec)?;
    let (verdict, reason) = verdict_from(&q);
    Ok(Certificate {
        verdict,
        rule: format!("{RULE_ITERLOG}, n = {n}"),
        computed_quantities: q,
        preconditions_checked: pre,
        equivalences_apply: false,
        reason,
    })
}

/// `int |g'|^2 |G_n(1/(1-|z|^2))|^2 dA` for a supplied `|g'|^2`.
pub fn growth_integrand_profile<F>(
    deriv_sq: &F,
    singular: &[f64],
    n: usize,
    spec: &QuadratureSpec,
) -> Result<NormResult>
where
    F: Fn(&DiscPoint) -> f64 + Sync,
{
    let integrand = |p: &DiscPoint| deriv_sq(p) * iterlog::g_real(n, 1.0 / p.one_minus_r2()).powi(2);
    weighted_area(&integrand, singular, spec)
}

/// The growth condition. A convergent integral sets
/// [`Certificate::equivalences_apply`] and leaves the verdict INCONCLUSIVE.
pub fn certify_growth(g: &AnalyticFn, n: usize, spec: &QuadratureSpec) -> Result<Certificate> {
    spec.validate()?;
    let pre = Preconditions {
        outer: None,
        sup_norm: Some(sup_flag(g)),
        non_vanishing: Some(nonvanishing_flag(g)),
    };
    if !pre.all_passed() {
        let reason = format!("verdict withheld; precondition failed ({})", pre.failures().join("; "));
        return Ok(Certificate::withheld(RULE_GROWTH, pre, reason));
    }
    let growth = if g.is_constant() {
        NormResult {
            estimate: crate::quad::Estimate::exact(0.0),
            verdict: TailVerdict::Convergent,
            profile: None,
        }
    } else {
        growth_integrand_profile(
            &|p: &DiscPoint| g.jet_raw(p.z).1.norm_sqr(),
            &g.singular_angles(),
            n,
            spec,
        )?
    };
    let (verdict, apply, reason) = match growth.verdict {
        TailVerdict::Convergent => (
            Verdict::Inconclusive,
            true,
            "growth integral convergent; the equivalence list applies (not by itself a cyclicity verdict)".to_string(),
        ),
        TailVerdict::Divergent => (
            Verdict::DivergentEvidence,
            false,
            "growth integral divergent".to_string(),
        ),
        TailVerdict::Inconclusive => (
            Verdict::Inconclusive,
            false,
            "growth integral tail inconclusive".to_string(),
        ),
    };
    let mut q = BTreeMap::new();
    q.insert("growth_integral".to_string(), growth);
    Ok(Certificate {
        verdict,
        rule: format!("{RULE_GROWTH}, n = {n}"),
        computed_quantities: q,
        preconditions_checked: pre,
        equivalences_apply: apply,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_chord() -> AnalyticFn {
        AnalyticFn::power(1.0, 1.0, 0.5).unwrap()
    }

    #[test]
    fn constants_are_certified() {
        let spec = QuadratureSpec::default();
        let leb = CircleMeasure::lebesgue();
        let c = certify_log(&AnalyticFn::constant(1.0), &leb, &spec).unwrap();
        assert_eq!(c.verdict, Verdict::SufficientCyclic);
        let c = certify_iterlog(&AnalyticFn::constant(0.5), &leb, 2, &spec).unwrap();
        assert_eq!(c.verdict, Verdict::SufficientCyclic);
        let c = certify_growth(&AnalyticFn::constant(0.5), 2, &spec).unwrap();
        assert!(c.equivalences_apply);
    }

    #[test]
    fn non_outer_input_is_withheld() {
        let spec = QuadratureSpec::default();
        let c = certify_log(&AnalyticFn::identity(), &CircleMeasure::lebesgue(), &spec).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.computed_quantities.is_empty());
        assert!(c.is_consistent());
    }

    #[test]
    fn growth_condition_examples() {
        let spec = QuadratureSpec::default();
        let c = certify_growth(&half_chord(), 2, &spec).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.equivalences_apply, "{:?}", c.reason);
        let surrogate = growth_integrand_profile(&|p: &DiscPoint| p.one_minus_r2().powi(-2), &[], 0, &spec).unwrap();
        assert_eq!(surrogate.verdict, TailVerdict::Divergent);
    }

    #[test]
    fn sup_norm_precondition_blocks_iterlog() {
        let spec = QuadratureSpec::default();
        let big = AnalyticFn::power(1.0, 1.0, 1.0).unwrap();
        let c = certify_iterlog(&big, &CircleMeasure::lebesgue(), 2, &spec).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(!c.preconditions_checked.sup_norm.as_ref().unwrap().passed);
    }
}
