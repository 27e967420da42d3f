use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{anyhow, Context as _};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use nogo_core::contextual::{
    bell_contexts, cross_context_bell, sample_run, sample_runs, Context, Model, RunReport,
};
use nogo_core::nogo::{angle_scan, theorem4_pipeline, vn_additivity_counterexample, ScanRow};
use nogo_core::probspace::{
    bell_functional, bell_proof_trace, FiniteProbabilitySpace, SignVariable,
};
use nogo_core::quantum::singlet_correlation;
use nogo_core::realizability::{
    brute_force_oracle, decide, MeanConstraint, PairConstraint, RealizabilityProblem,
};

use crate::output::{render_csv, render_json, round_sig, to_json};
use crate::{Cli, Command, Format};

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<nogo_core::Error> for Failure {
    fn from(e: nogo_core::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn internal(e: anyhow::Error) -> Failure {
    Failure::Internal(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Singlet,
    Lhv,
}

impl From<Mode> for Model {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Singlet => Model::Singlet,
            Mode::Lhv => Model::Lhv,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    weights: Vec<f64>,
    variables: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
    #[serde(default)]
    means: Option<Vec<(usize, f64)>>,
}

#[derive(Debug, Serialize)]
struct SingletRow {
    delta: f64,
    trace_correlation: f64,
    closed_form: f64,
    abs_error: f64,
}

#[derive(Debug, Serialize)]
struct RunRow {
    context_id: String,
    theta: f64,
    theta_prime: f64,
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
    correlation: f64,
    stderr: f64,
}

impl From<&RunReport> for RunRow {
    fn from(r: &RunReport) -> Self {
        Self {
            context_id: r.context_id.clone(),
            theta: round_sig(r.theta),
            theta_prime: round_sig(r.theta_prime),
            n_pp: r.counts.n_pp,
            n_pm: r.counts.n_pm,
            n_mp: r.counts.n_mp,
            n_mm: r.counts.n_mm,
            correlation: round_sig(r.empirical_correlation),
            stderr: round_sig(r.standard_error),
        }
    }
}

#[derive(Debug, Serialize)]
struct ScanCsvRow {
    theta2: f64,
    theta3: f64,
    quantum_lhs: f64,
    quantum_rhs: f64,
    margin: f64,
    verdict: String,
}

impl From<&ScanRow> for ScanCsvRow {
    fn from(r: &ScanRow) -> Self {
        Self {
            theta2: round_sig(r.theta2),
            theta3: round_sig(r.theta3),
            quantum_lhs: round_sig(r.quantum_lhs),
            quantum_rhs: round_sig(r.quantum_rhs),
            margin: round_sig(r.margin),
            verdict: format!("{:?}", r.verdict),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(anyhow!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(anyhow!("parsing {}: {e}", path.display())))
}

fn record(cli: &Cli, name: &str, value: Value) -> Result<String, Failure> {
    if cli.format == Some(Format::Csv) {
        return Err(Failure::Usage(anyhow!(
            "--format csv is not available for `{name}`; use --format json"
        )));
    }
    render_json(&value).map_err(internal)
}

fn table<T: Serialize>(cli: &Cli, rows: &[T]) -> Result<String, Failure> {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => render_csv(rows).map_err(internal),
        Format::Json => render_json(&to_json(&rows).map_err(internal)?).map_err(internal),
    }
}

fn angle(cli: &Cli, flag: &str, x: f64) -> Result<f64, Failure> {
    if !x.is_finite() {
        return Err(Failure::Usage(anyhow!("--{flag} must be finite")));
    }
    Ok(if cli.deg { x.to_radians() } else { x })
}

fn grid_size(flag_value: usize) -> Result<usize, Failure> {
    if flag_value < 2 {
        return Err(Failure::Usage(anyhow!(
            "--grid must be at least 2, got {flag_value}"
        )));
    }
    Ok(flag_value)
}

pub fn execute(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::SingletScan { grid } => {
            let n = grid_size(*grid)?;
            let rows: Vec<SingletRow> = (0..n)
                .map(|k| {
                    let delta = k as f64 * TAU / n as f64;
                    let trace = singlet_correlation(0.0, delta);
                    let closed = -delta.cos();
                    SingletRow {
                        delta: round_sig(delta),
                        trace_correlation: round_sig(trace),
                        closed_form: round_sig(closed),
                        abs_error: round_sig((trace - closed).abs()),
                    }
                })
                .collect();
            table(cli, &rows)
        }
        Command::Nogo(a) => {
            let v = theorem4_pipeline(
                angle(cli, "t1", a.t1)?,
                angle(cli, "t2", a.t2)?,
                angle(cli, "t3", a.t3)?,
            );
            let mut value = to_json(&v).map_err(internal)?;
            value["margin"] = json!(round_sig(v.violation_margin()));
            record(cli, "nogo", value)
        }
        Command::AngleScan { grid } => {
            let rows = angle_scan(grid_size(*grid)?)?;
            let rows: Vec<ScanCsvRow> = rows.iter().map(ScanCsvRow::from).collect();
            table(cli, &rows)
        }
        Command::Realizability { file, exact } => {
            let spec: ProblemFile = read_json(file)?;
            let problem = RealizabilityProblem::new(
                spec.n,
                spec.pairs
                    .into_iter()
                    .map(|(i, j, correlation)| PairConstraint { i, j, correlation })
                    .collect(),
                spec.means
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(i, mean)| MeanConstraint { i, mean })
                    .collect(),
            )?;
            let outcome = if *exact {
                brute_force_oracle(&problem)?
            } else {
                decide(&problem)
            };
            record(cli, "realizability", to_json(&outcome).map_err(internal)?)
        }
        Command::Simulate(s) => {
            let model = Model::from(s.mode);
            let t1 = angle(cli, "t1", s.t1)?;
            let t2 = angle(cli, "t2", s.t2)?;
            let (reports, cross) = match s.t3 {
                None => {
                    let ctx = Context::new(s.id.clone(), t1, t2, s.n, s.seed)?;
                    (vec![sample_run(model, &ctx)?], None)
                }
                Some(t3) => {
                    let t3 = angle(cli, "t3", t3)?;
                    let contexts = bell_contexts(t1, t2, t3, s.n, s.seed)?;
                    let reports = sample_runs(model, &contexts)?;
                    let cross = cross_context_bell(&reports[0], &reports[1], &reports[2])?;
                    (reports, Some(cross))
                }
            };
            let rows: Vec<RunRow> = reports.iter().map(RunRow::from).collect();
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => render_csv(&rows).map_err(internal),
                Format::Json => {
                    let mut value = json!({ "runs": rows, "cross_context": cross });
                    crate::output::round_value(&mut value);
                    render_json(&value).map_err(internal)
                }
            }
        }
        Command::BellCheck { file } => {
            let model: ModelFile = read_json(file)?;
            let space = FiniteProbabilitySpace::new(model.weights)?;
            let get = |name: &str| {
                model.variables.get(name).ok_or_else(|| {
                    Failure::Usage(anyhow!("{}: missing variable `{name}`", file.display()))
                })
            };
            let (a, b, c) = (get("a")?, get("b")?, get("c")?);
            let signs = |name: &str, v: &[f64]| {
                SignVariable::from_f64(v)
                    .with_context(|| format!("variable `{name}`"))
                    .map_err(Failure::Usage)
            };
            let report =
                bell_functional(&space, &signs("a", a)?, &signs("b", b)?, &signs("c", c)?)?;
            let trace = bell_proof_trace(
                &space,
                &a.clone().into(),
                &b.clone().into(),
                &c.clone().into(),
            )?;
            let mut value = json!({
                "bell_report": report,
                "proof_trace": trace,
                "chain_holds": trace.chain_holds(),
            });
            crate::output::round_value(&mut value);
            record(cli, "bell-check", value)
        }
        Command::VnDemo => record(
            cli,
            "vn-demo",
            to_json(&vn_additivity_counterexample()).map_err(internal)?,
        ),
    }
}
