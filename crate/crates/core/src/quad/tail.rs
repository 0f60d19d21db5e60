use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{annulus_integral, DiscPoint, QuadratureSpec, FINE_ORDER};
use crate::Result;

/// Number of trailing annuli inspected by the classifier.
pub const TAIL_WINDOW: usize = 8;
/// Consecutive ratios at or below this value count as geometric decay.
pub const GEOMETRIC_RATIO: f64 = 0.9;
/// Fitted power-law decay exponents at or above this value count as summable.
pub const SUMMABLE_EXPONENT: f64 = 1.5;
/// Fitted exponents at or below this value count as no decay.
pub const STALLED_EXPONENT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TailVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    pub window: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Least-squares `p` in `a_k ~ C k^-p` over the window.
    pub decay_exponent: Option<f64>,
    pub reason: String,
}

/// Per-annulus contributions and a three-way finiteness verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub annuli: Vec<(usize, f64)>,
    pub verdict: TailVerdict,
    pub diagnostics: TailDiagnostics,
    pub partial_sum: f64,
}

impl TailProfile {
    pub fn from_values(values: &[f64], abs_tol: f64) -> Self {
        let (verdict, diagnostics) = classify(values, abs_tol);
        TailProfile {
            annuli: values.iter().copied().enumerate().collect(),
            verdict,
            diagnostics,
            partial_sum: values.iter().sum(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.annuli.iter().map(|a| a.1).collect()
    }
}

/// Classifies a sequence of nonnegative tail contributions `a_k`.
///
/// CONVERGENT when the trailing window is negligible, decays geometrically
/// (`a_{k+1}/a_k <= 0.9` throughout), or decays like `k^-p` with `p >= 1.5`;
/// DIVERGENT when the fitted exponent is at most 0.5 (bounded below or
/// growing); INCONCLUSIVE otherwise.
pub fn classify(values: &[f64], abs_tol: f64) -> (TailVerdict, TailDiagnostics) {
    let n = values.len();
    let window = TAIL_WINDOW.min(n);
    let start = n - window;
    let win: Vec<f64> = values[start..].iter().map(|v| v.abs()).collect();
    let ratios: Vec<f64> = win
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 {
                w[1] / w[0]
            } else if w[1] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let mut diag = TailDiagnostics {
        window,
        ratios: ratios.clone(),
        max_ratio,
        decay_exponent: None,
        reason: String::new(),
    };
    if window < 3 {
        diag.reason = "too few annuli".into();
        return (TailVerdict::Inconclusive, diag);
    }
    let max_win = win.iter().copied().fold(0.0, f64::max);
    if max_win <= abs_tol {
        diag.reason = format!("trailing contributions below {abs_tol:e}");
        return (TailVerdict::Convergent, diag);
    }
    if ratios.iter().all(|&r| r <= GEOMETRIC_RATIO) {
        diag.reason = format!("geometric decay, ratios <= {GEOMETRIC_RATIO}");
        return (TailVerdict::Convergent, diag);
    }
    let pts: Vec<(f64, f64)> = win
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (((start + i + 1) as f64).ln(), a.ln()))
        .collect();
    if pts.len() < 3 {
        diag.reason = "too few positive contributions".into();
        return (TailVerdict::Inconclusive, diag);
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let p = -sxy / sxx;
    diag.decay_exponent = Some(p);
    if p >= SUMMABLE_EXPONENT {
        diag.reason = format!("power-law decay with exponent {p:.3} >= {SUMMABLE_EXPONENT}");
        (TailVerdict::Convergent, diag)
    } else if p <= STALLED_EXPONENT {
        diag.reason = format!("contributions do not decay (exponent {p:.3})");
        (TailVerdict::Divergent, diag)
    } else {
        diag.reason = format!("slow decay (exponent {p:.3}) between thresholds");
        (TailVerdict::Inconclusive, diag)
    }
}

/// Integrals of `f dA` over the dyadic annuli
/// `1 - 2^-k <= |z| < 1 - 2^-(k+1)`, `k < spec.tail_annuli`, with a verdict.
pub fn tail_profile<F>(f: &F, singular: &[f64], spec: &QuadratureSpec) -> Result<TailProfile>
where
    F: Fn(&DiscPoint) -> f64 + Sync,
{
    spec.validate()?;
    let values: Vec<Result<f64>> = (0..spec.tail_annuli)
        .into_par_iter()
        .map(|k| {
            let d_hi = 0.5f64.powi(k as i32);
            annulus_integral(f, 0.5 * d_hi, d_hi, singular, FINE_ORDER, spec.angular_nodes)
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(TailProfile::from_values(&values, spec.abs_tol))
}
