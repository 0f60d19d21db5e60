//! Command-line front end: problem files in, JSON reports (or CSV curve
//! data) out.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when a precondition
//! failed, a check was skipped, or an inequality failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::anafun::{AnalyticFn, CNum, Func, OuterFn, DEFAULT_CELLS};
use crate::certify::verify::cutoff_log_modulus;
use crate::certify::{
    certify_growth, certify_iterlog, certify_log, verify_cutoff, verify_deriv_bound, verify_gn_bound, verify_h1h2,
    verify_herglotz_growth, verify_norm_ineq, verify_step_bound, Certificate, InequalityReport, Status,
};
use crate::dirichlet::{dmu_norm_sq, local_dirichlet_boundary};
use crate::iterlog::{imaginary_axis_curves, write_curves_csv};
use crate::measure::CircleMeasure;
use crate::quad::QuadratureSpec;
use crate::{DmuError, Result, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;

/// Figure curves: `G_2, G_3, G_4` on the imaginary axis.
pub const FIGURE_ORDERS: [usize; 3] = [2, 3, 4];
pub const FIGURE_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Poisson,
    Norm,
    Localdir,
    CertifyLog,
    CertifyIterlog,
    CertifyGrowth,
    Verify,
    Figure1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Poisson => "poisson",
            Command::Norm => "norm",
            Command::Localdir => "localdir",
            Command::CertifyLog => "certify-log",
            Command::CertifyIterlog => "certify-iterlog",
            Command::CertifyGrowth => "certify-growth",
            Command::Verify => "verify",
            Command::Figure1 => "figure1",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dmu", version, about = "Numerics for harmonically weighted Dirichlet spaces")]
pub struct Args {
    /// Computation to run.
    #[arg(value_enum, required_unless_present = "seed_corpus")]
    pub command: Option<Command>,
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Report destination; stdout when absent. With --seed-corpus, the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Quadrature spec (JSON); overrides the problem file's `quadrature`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Write the built-in test corpus as problem files.
    #[arg(long)]
    pub seed_corpus: bool,
}

/// Which inequality `verify` checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    H1h2,
    Cutoff,
    NormIneq,
    GnBound,
    HerglotzGrowth,
    StepBound,
    DerivBound,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<CNum>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<CNum>,
    /// Iterated-logarithm order, or the largest order checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Multiplier `n` in the cut-off `h ∧ n h^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<AnalyticFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<AnalyticFn>,
    /// Use `h2 ∧ n h2^2` as `h1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2: Option<AnalyticFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<CircleMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<AnalyticFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: Params,
}

fn is_default(p: &Params) -> bool {
    *p == Params::default()
}

impl ProblemFile {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let p: ProblemFile = serde_path_to_error::deserialize(de)
            .map_err(|e| DmuError::InvalidArgument(format!("problem file at `{}`: {}", e.path(), e.inner())))?;
        if let Some(q) = &p.quadrature {
            q.validate()?;
        }
        Ok(p)
    }

    fn function(&self) -> Result<&AnalyticFn> {
        self.function
            .as_ref()
            .ok_or_else(|| DmuError::InvalidArgument("missing field `function`".into()))
    }

    fn measure(&self) -> Result<&CircleMeasure> {
        self.measure
            .as_ref()
            .ok_or_else(|| DmuError::InvalidArgument("missing field `measure`".into()))
    }

    fn zeta(&self) -> Complex64 {
        self.params.zeta.map_or(Complex64::new(1.0, 0.0), |c| c.0)
    }
}

pub fn parse_spec(text: &str) -> Result<QuadratureSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: QuadratureSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| DmuError::InvalidSpec(format!("spec at `{}`: {}", e.path(), e.inner())))?;
    s.validate()?;
    Ok(s)
}

/// Report text and exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub exit_code: i32,
}

fn envelope(command: Command, spec: &QuadratureSpec, result: Value) -> Result<String> {
    let v = json!({
        "command": command.name(),
        "version": VERSION,
        "spec": spec,
        "result": result,
    });
    serde_json::to_string_pretty(&v).map_err(|e| DmuError::Validation(e.to_string()))
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| DmuError::Validation(e.to_string()))
}

fn certificate_exit(c: &Certificate) -> i32 {
    if c.preconditions_checked.all_passed() {
        EXIT_OK
    } else {
        EXIT_PRECONDITION
    }
}

fn report_exit(r: &InequalityReport) -> i32 {
    match r.status {
        Status::Pass => EXIT_OK,
        Status::Fail | Status::Skip => EXIT_PRECONDITION,
    }
}

/// Runs one command. Input errors are returned as `Err`.
pub fn run(command: Command, problem: &ProblemFile, spec_override: Option<&QuadratureSpec>) -> Result<RunOutput> {
    let spec = spec_override
        .cloned()
        .or_else(|| problem.quadrature.clone())
        .unwrap_or_default();
    spec.validate()?;
    let (result, exit_code) = match command {
        Command::Poisson => {
            let mu = problem.measure()?;
            let points = problem.params.points.clone().unwrap_or_else(|| vec![CNum::from(0.0)]);
            let mut rows = Vec::new();
            for p in points {
                let v = mu.poisson_integral(p.0)?;
                rows.push(json!({ "z": [p.0.re, p.0.im], "poisson": v }));
            }
            (json!({ "values": rows }), EXIT_OK)
        }
        Command::Norm => {
            let f: Func = problem.function()?.clone().into();
            let n = dmu_norm_sq(&f, problem.measure()?, &spec)?;
            (to_value(&n)?, EXIT_OK)
        }
        Command::Localdir => {
            let r = local_dirichlet_boundary(problem.function()?, problem.zeta(), &spec)?;
            (to_value(&r)?, EXIT_OK)
        }
        Command::CertifyLog => {
            let c = certify_log(problem.function()?, problem.measure()?, &spec)?;
            (to_value(&c)?, certificate_exit(&c))
        }
        Command::CertifyIterlog => {
            let n = problem.params.n.unwrap_or(2);
            let c = certify_iterlog(problem.function()?, problem.measure()?, n, &spec)?;
            (to_value(&c)?, certificate_exit(&c))
        }
        Command::CertifyGrowth => {
            let n = problem.params.n.unwrap_or(2);
            let c = certify_growth(problem.function()?, n, &spec)?;
            (to_value(&c)?, certificate_exit(&c))
        }
        Command::Verify => {
            let r = run_verify(problem, &spec)?;
            (to_value(&r)?, report_exit(&r))
        }
        Command::Figure1 => {
            let samples = problem.params.samples.unwrap_or(FIGURE_SAMPLES);
            let rows = imaginary_axis_curves(&FIGURE_ORDERS, samples);
            let mut buf = Vec::new();
            write_curves_csv(&rows, &mut buf).map_err(|e| DmuError::Validation(e.to_string()))?;
            let text = String::from_utf8(buf).map_err(|e| DmuError::Validation(e.to_string()))?;
            return Ok(RunOutput {
                text,
                exit_code: EXIT_OK,
            });
        }
    };
    Ok(RunOutput {
        text: envelope(command, &spec, result)?,
        exit_code,
    })
}

fn run_verify(problem: &ProblemFile, spec: &QuadratureSpec) -> Result<InequalityReport> {
    let p = &problem.params;
    let check = p
        .check
        .ok_or_else(|| DmuError::InvalidArgument("`params.check` is required for verify".into()))?;
    let cutoff = p.cutoff.unwrap_or(1.0);
    match check {
        Check::H1h2 => {
            let g: Func = problem.function()?.clone().into();
            let h2: Func =
                p.h2.clone()
                    .ok_or_else(|| DmuError::InvalidArgument("missing `params.h2`".into()))?
                    .into();
            let h1: Func = match (&p.h1, p.h1_cutoff) {
                (Some(h1), None) => h1.clone().into(),
                (None, Some(n)) => Func::Outer(OuterFn::from_boundary(cutoff_log_modulus(&h2, n), DEFAULT_CELLS)?),
                _ => {
                    return Err(DmuError::InvalidArgument(
                        "give exactly one of `params.h1`, `params.h1_cutoff`".into(),
                    ))
                }
            };
            verify_h1h2(&g, &h1, &h2, problem.zeta(), p.c.unwrap_or(1.0), spec)
        }
        Check::Cutoff => verify_cutoff(&problem.function()?.clone().into(), problem.zeta(), cutoff, spec),
        Check::NormIneq => {
            let g: Func = problem.function()?.clone().into();
            let h: Func =
                p.h.clone()
                    .ok_or_else(|| DmuError::InvalidArgument("missing `params.h`".into()))?
                    .into();
            verify_norm_ineq(&g, &h, problem.measure()?, cutoff, spec)
        }
        Check::GnBound => verify_gn_bound(problem.function()?, p.n.unwrap_or(4)),
        Check::HerglotzGrowth => verify_herglotz_growth(problem.function()?),
        Check::StepBound => Ok(verify_step_bound(p.n.unwrap_or(4), p.samples.unwrap_or(FIGURE_SAMPLES))),
        Check::DerivBound => verify_deriv_bound(p.n.unwrap_or(6), p.samples.unwrap_or(10_000)),
    }
}

fn half_chord() -> AnalyticFn {
    AnalyticFn::power(1.0, 1.0, 0.5).expect("valid power node")
}

/// Built-in problems, keyed by `<command>__<name>`.
pub fn seed_corpus() -> BTreeMap<String, ProblemFile> {
    let h = half_chord();
    let leb = CircleMeasure::lebesgue();
    let atom_pi = CircleMeasure::dirac(std::f64::consts::PI);
    let herglotz = AnalyticFn::quotient(
        AnalyticFn::polynomial(&[1.0, 1.0]),
        AnalyticFn::polynomial(&[1.0, -1.0]),
    )
    .expect("valid quotient");
    let base = |function: Option<AnalyticFn>, measure: Option<CircleMeasure>, params: Params| ProblemFile {
        measure,
        function,
        quadrature: None,
        params,
    };
    let mut m = BTreeMap::new();
    m.insert(
        "poisson__lebesgue".into(),
        base(
            None,
            Some(leb.clone()),
            Params {
                points: Some(vec![0.5.into(), CNum(Complex64::new(0.3, -0.6))]),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "norm__half_chord_lebesgue".into(),
        base(Some(h.clone()), Some(leb.clone()), Params::default()),
    );
    m.insert(
        "localdir__square_at_i".into(),
        base(
            Some(AnalyticFn::monomial(2)),
            None,
            Params {
                zeta: Some(CNum(Complex64::new(0.0, 1.0))),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "certify-log__half_chord_lebesgue".into(),
        base(Some(h.clone()), Some(leb.clone()), Params::default()),
    );
    m.insert(
        "certify-log__half_chord_atom_pi".into(),
        base(Some(h.clone()), Some(atom_pi.clone()), Params::default()),
    );
    m.insert(
        "certify-iterlog__half_chord_lebesgue_n2".into(),
        base(
            Some(h.clone()),
            Some(leb.clone()),
            Params {
                n: Some(2),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "certify-growth__half_chord_n2".into(),
        base(
            Some(h.clone()),
            None,
            Params {
                n: Some(2),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__cutoff_half_chord".into(),
        base(
            Some(h.clone()),
            None,
            Params {
                check: Some(Check::Cutoff),
                zeta: Some((-1.0).into()),
                cutoff: Some(10.0),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__norm_ineq_half_chord".into(),
        base(
            Some(AnalyticFn::constant(1.0)),
            Some(atom_pi),
            Params {
                check: Some(Check::NormIneq),
                h: Some(h.clone()),
                cutoff: Some(2.0),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__h1h2_cutoff".into(),
        base(
            Some(AnalyticFn::constant(1.0)),
            None,
            Params {
                check: Some(Check::H1h2),
                h2: Some(h),
                h1_cutoff: Some(2.0),
                c: Some(4.0),
                zeta: Some((-1.0).into()),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__gn_bound_herglotz".into(),
        base(
            Some(herglotz.clone()),
            None,
            Params {
                check: Some(Check::GnBound),
                n: Some(4),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__herglotz_growth".into(),
        base(
            Some(herglotz),
            None,
            Params {
                check: Some(Check::HerglotzGrowth),
                ..Params::default()
            },
        ),
    );
    m.insert(
        "verify__deriv_bound".into(),
        base(
            None,
            None,
            Params {
                check: Some(Check::DerivBound),
                n: Some(6),
                ..Params::default()
            },
        ),
    );
    m.insert("figure1__curves".into(), ProblemFile::default());
    m
}

fn write_corpus(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, p) in seed_corpus() {
        fs::write(
            dir.join(format!("{name}.json")),
            serde_json::to_string_pretty(&p)? + "\n",
        )?;
    }
    Ok(())
}

fn read_problem(path: Option<&Path>) -> anyhow::Result<ProblemFile> {
    match path {
        None => Ok(ProblemFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
            Ok(ProblemFile::from_json(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?)
        }
    }
}

fn read_spec(path: Option<&Path>) -> anyhow::Result<Option<QuadratureSpec>> {
    path.map(|p| {
        let text = fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
        parse_spec(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
    })
    .transpose()
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn execute(args: &Args) -> anyhow::Result<i32> {
    if args.seed_corpus {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("corpus"));
        write_corpus(&dir)?;
        return Ok(EXIT_OK);
    }
    let command = args.command.ok_or_else(|| anyhow::anyhow!("a command is required"))?;
    let problem = read_problem(args.problem.as_deref())?;
    let spec = read_spec(args.spec.as_deref())?;
    let out = match run(command, &problem, spec.as_ref()) {
        Ok(o) => o,
        Err(e @ (DmuError::NotOuter(_) | DmuError::Divergent { .. })) => {
            eprintln!("precondition: {e}");
            return Ok(EXIT_PRECONDITION);
        }
        Err(e) => return Err(e.into()),
    };
    match &args.out {
        Some(p) => fs::write(p, &out.text)?,
        None => print!("{}", out.text),
    }
    Ok(out.exit_code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_file_rejects_unknown_fields_with_path() {
        let e = ProblemFile::from_json(r#"{"params": {"zeta": 1, "bogus": 2}}"#).unwrap_err();
        assert!(e.to_string().contains("params"), "{e}");
        let e = ProblemFile::from_json(r#"{"function": {"kind": "power", "lambda": 1, "alpha": 1, "sclae": 2}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("function"), "{e}");
    }

    #[test]
    fn poisson_command_on_lebesgue() {
        let p = ProblemFile::from_json(r#"{"measure": "lebesgue", "params": {"points": [0.5]}}"#).unwrap();
        let out = run(Command::Poisson, &p, None).unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["result"]["values"][0]["poisson"], json!(1.0));
        assert_eq!(v["version"], json!(VERSION));
        assert_eq!(out.exit_code, EXIT_OK);
    }

    #[test]
    fn corpus_round_trips() {
        for (name, p) in seed_corpus() {
            let text = serde_json::to_string(&p).unwrap();
            let back = ProblemFile::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(back, p, "{name}");
        }
    }
}
