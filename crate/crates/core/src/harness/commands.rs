//! Command dispatch behind the `corefair` binary. Every command renders to
//! a string so output can be compared byte for byte.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::caps::SizeCaps;
use crate::endowment::endowment_core_check_with;
use crate::error::{CoreError, Result};
use crate::fractional::{fractional_mnw_report, mpf, FractionalMnwConfig};
use crate::instance::{ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome};
use crate::matching::local_search_matching;
use crate::matroid::{local_search_matroid, MatroidOracle};
use crate::report::SolverReport;
use crate::rounding::{solve_packing_with, RoundingConfig};
use crate::verifier::{DeviationMode, Verifier};

use super::bench::{bench, BenchFormat};
use super::generators::{generate, GeneratorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Mpf,
    Fractional,
    Round,
    Gen,
    Bench,
}

impl FromStr for Command {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "solve" => Command::Solve,
            "verify" => Command::Verify,
            "mpf" => Command::Mpf,
            "fractional" => Command::Fractional,
            "round" => Command::Round,
            "gen" => Command::Gen,
            "bench" => Command::Bench,
            other => return Err(CoreError::Validation(format!("unknown command {other:?}"))),
        })
    }
}

/// Solver family requested with `--constraint`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Matroid,
    Matching,
    Packing,
}

impl FromStr for SolverKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matroid" => Ok(SolverKind::Matroid),
            "matching" => Ok(SolverKind::Matching),
            "packing" => Ok(SolverKind::Packing),
            other => Err(CoreError::Validation(format!(
                "unknown constraint {other:?}; expected matroid, matching or packing"
            ))),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Matroid => "matroid",
            SolverKind::Matching => "matching",
            SolverKind::Packing => "packing",
        })
    }
}

impl SolverKind {
    /// Family matching the instance's own constraint.
    pub fn infer(inst: &Instance<f64>) -> Self {
        match inst.constraint() {
            ConstraintSpec::Matching { .. } => SolverKind::Matching,
            ConstraintSpec::Packing { .. } => SolverKind::Packing,
            _ => SolverKind::Matroid,
        }
    }

    pub fn default_delta(self) -> f64 {
        match self {
            SolverKind::Matroid => 0.0,
            SolverKind::Matching => 1.0,
            SolverKind::Packing => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Integral,
    Fractional,
    Endowment,
}

impl FromStr for VerifyMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(VerifyMode::Integral),
            "fractional" => Ok(VerifyMode::Fractional),
            "endowment" => Ok(VerifyMode::Endowment),
            other => Err(CoreError::Validation(format!(
                "unknown mode {other:?}; expected integral, fractional or endowment"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CoreError::Validation(format!("unknown format {other:?}; expected json or csv"))),
        }
    }
}

/// Where the instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// JSON text of an instance file.
    Json(String),
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub source: Option<InstanceSource>,
    pub constraint: Option<SolverKind>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub format: Option<OutputFormat>,
    pub outcome: Option<Vec<usize>>,
    pub weights: Option<Vec<f64>>,
    pub mode: Option<VerifyMode>,
    /// Fill the bench wall-time column.
    pub timing: bool,
    pub caps: SizeCaps,
}

impl RunOptions {
    fn instance(&self) -> Result<Instance<f64>> {
        match &self.source {
            Some(InstanceSource::Json(text)) => Instance::from_json(text),
            Some(InstanceSource::Generator(spec)) => generate(spec),
            None => Err(CoreError::Validation("an instance is required (--instance FILE or --gen NAME)".into())),
        }
    }

    fn seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| CoreError::Validation(format!("{command} is randomized and needs --seed")))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}

/// Runs one command and returns what it prints.
pub fn run(command: Command, opts: &RunOptions) -> Result<String> {
    if opts.format == Some(OutputFormat::Csv) && command != Command::Bench {
        return Err(CoreError::Validation("csv output is only available for bench".into()));
    }
    match command {
        Command::Gen => {
            let inst = opts.instance()?;
            let mut text = inst.to_json_pretty();
            text.push('\n');
            Ok(text)
        }
        Command::Solve => {
            let inst = opts.instance()?;
            let kind = opts.constraint.unwrap_or_else(|| SolverKind::infer(&inst));
            Ok(to_json(&solve(&inst, kind, opts)?))
        }
        Command::Verify => Ok(verify(&opts.instance()?, opts)?),
        Command::Mpf => Ok(to_json(&mpf(&packing_view(&opts.instance()?)?)?)),
        Command::Fractional => {
            let inst = packing_view(&opts.instance()?)?;
            let config = FractionalMnwConfig::new(opts.delta.unwrap_or(0.05), opts.epsilon.unwrap_or(0.01))?;
            Ok(to_json(&fractional_mnw_report(&inst, &config)?))
        }
        Command::Round => {
            let inst = packing_view(&opts.instance()?)?;
            Ok(to_json(&solve(&inst, SolverKind::Packing, opts)?))
        }
        Command::Bench => {
            let format = match opts.format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => BenchFormat::Csv,
                OutputFormat::Json => BenchFormat::Json,
            };
            bench(opts, format)
        }
    }
}

/// The instance itself if it is a packing instance, else its packing
/// relaxation.
fn packing_view(inst: &Instance<f64>) -> Result<Instance<f64>> {
    match inst.constraint() {
        ConstraintSpec::Packing { .. } => Ok(inst.clone()),
        _ => inst.with_constraint(inst.packing_relaxation()?),
    }
}

/// Runs the solver family `kind`. Packing on a non-packing instance runs on
/// its packing relaxation.
pub fn solve(inst: &Instance<f64>, kind: SolverKind, opts: &RunOptions) -> Result<SolverReport<f64>> {
    match kind {
        SolverKind::Matroid => {
            let oracle = MatroidOracle::from_instance(inst)?;
            local_search_matroid(inst, &oracle, opts.epsilon.unwrap_or(0.1))
        }
        SolverKind::Matching => local_search_matching(inst, opts.delta.unwrap_or(1.0)),
        SolverKind::Packing => {
            let inst = packing_view(inst)?;
            let mut config = RoundingConfig::new(opts.delta.unwrap_or(0.5), opts.seed("packing rounding")?)?;
            if let Some(t) = opts.trials {
                config = config.with_retries(t);
            }
            solve_packing_with(&inst, &config, opts.epsilon.unwrap_or(1.0))
        }
    }
}

fn verify(inst: &Instance<f64>, opts: &RunOptions) -> Result<String> {
    let delta = opts.delta.unwrap_or(0.0);
    let alpha = opts.alpha.unwrap_or(0.0);
    let verifier = Verifier::new(opts.caps);
    let mode = opts.mode.unwrap_or(VerifyMode::Integral);
    let cert = match (&opts.outcome, &opts.weights) {
        (Some(elements), None) => {
            let outcome = IntegralOutcome::new(elements.iter().copied());
            match mode {
                VerifyMode::Integral => verifier.find_blocking_coalition(inst, &outcome, delta, alpha, DeviationMode::Integral)?,
                VerifyMode::Fractional => verifier.find_blocking_coalition(inst, &outcome, delta, alpha, DeviationMode::Fractional)?,
                VerifyMode::Endowment => endowment_core_check_with(inst, &outcome, delta, alpha, &opts.caps)?,
            }
        }
        (None, Some(weights)) => {
            let outcome = FractionalOutcome::new(weights.clone());
            match mode {
                VerifyMode::Integral => verifier.find_blocking_coalition(inst, &outcome, delta, alpha, DeviationMode::Integral)?,
                VerifyMode::Fractional => verifier.find_blocking_coalition(inst, &outcome, delta, alpha, DeviationMode::Fractional)?,
                VerifyMode::Endowment => endowment_core_check_with(inst, &outcome, delta, alpha, &opts.caps)?,
            }
        }
        _ => {
            return Err(CoreError::Validation(
                "verify needs exactly one of --outcome or --weights".into(),
            ))
        }
    };
    Ok(to_json(&cert))
}

/// Parses `"0,2,5"`.
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CoreError::Validation(format!("bad list entry {x:?} in {text:?}")))
        })
        .collect()
}

/// Error body printed on failure.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl From<&CoreError> for ErrorReport {
    fn from(e: &CoreError) -> Self {
        ErrorReport {
            error: e.kind(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts_for(name: &str) -> RunOptions {
        RunOptions {
            source: Some(InstanceSource::Generator(GeneratorSpec::new(name))),
            ..RunOptions::default()
        }
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<usize>("0, 2,5").unwrap(), vec![0, 2, 5]);
        assert!(parse_list::<usize>("").unwrap().is_empty());
        assert!(parse_list::<usize>("1,x").is_err());
    }

    #[test]
    fn packing_solve_requires_seed() {
        let err = run(Command::Solve, &opts_for("cyclic_pb")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn verify_needs_an_outcome() {
        assert!(run(Command::Verify, &opts_for("k22")).is_err());
    }
}
