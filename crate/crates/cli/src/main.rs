use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use corefair::harness::{
    parse_list, run, Command, ErrorReport, GeneratorSpec, InstanceSource, OutputFormat, RunOptions, SolverKind, VerifyMode,
};
use corefair::{CoreError, SizeCaps};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    Verify,
    Mpf,
    Fractional,
    Round,
    Gen,
    Bench,
}

/// Approximate-core solvers and verifiers for public goods allocation.
#[derive(Debug, Parser)]
#[command(name = "corefair", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,

    /// Instance JSON file.
    #[arg(long, conflicts_with = "gen")]
    instance: Option<PathBuf>,

    /// Generator name followed by key=value parameters.
    #[arg(long, num_args = 1.., value_name = "NAME [KEY=VAL]...")]
    gen: Option<Vec<String>>,

    /// Solver family: matroid, matching or packing.
    #[arg(long)]
    constraint: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,

    /// Required by randomized commands.
    #[arg(long)]
    seed: Option<u64>,

    /// Rounding retries, or instances per family for bench.
    #[arg(long)]
    trials: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// json or csv (csv only for bench).
    #[arg(long)]
    format: Option<String>,

    /// Integral outcome to verify, as comma-separated element indices.
    #[arg(long, conflicts_with = "weights")]
    outcome: Option<String>,

    /// Fractional outcome to verify, as comma-separated weights.
    #[arg(long)]
    weights: Option<String>,

    /// Deviation model for verify: integral, fractional or endowment.
    #[arg(long)]
    mode: Option<String>,

    /// Record wall-clock time in bench output.
    #[arg(long)]
    timing: bool,
}

fn options(cli: &Cli) -> Result<RunOptions, CoreError> {
    let source = match (&cli.instance, &cli.gen) {
        (Some(path), _) => Some(InstanceSource::Json(
            fs::read_to_string(path).map_err(|e| CoreError::Validation(format!("cannot read {}: {e}", path.display())))?,
        )),
        (None, Some(words)) => {
            let (name, pairs) = words.split_first().expect("clap requires a value");
            Some(InstanceSource::Generator(GeneratorSpec::parse(name, pairs.iter().map(String::as_str))?))
        }
        (None, None) => None,
    };
    Ok(RunOptions {
        source,
        constraint: cli.constraint.as_deref().map(str::parse::<SolverKind>).transpose()?,
        delta: cli.delta,
        alpha: cli.alpha,
        epsilon: cli.epsilon,
        seed: cli.seed,
        trials: cli.trials,
        format: cli.format.as_deref().map(str::parse::<OutputFormat>).transpose()?,
        outcome: cli.outcome.as_deref().map(parse_list).transpose()?,
        weights: cli.weights.as_deref().map(parse_list).transpose()?,
        mode: cli.mode.as_deref().map(str::parse::<VerifyMode>).transpose()?,
        timing: cli.timing,
        caps: SizeCaps::from_env(),
    })
}

fn execute(cli: &Cli) -> Result<(), CoreError> {
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Verify => Command::Verify,
        Cmd::Mpf => Command::Mpf,
        Cmd::Fractional => Command::Fractional,
        Cmd::Round => Command::Round,
        Cmd::Gen => Command::Gen,
        Cmd::Bench => Command::Bench,
    };
    let text = run(command, &options(cli)?)?;
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CoreError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport::from(&e);
            eprintln!("{}", serde_json::to_string(&report).expect("serializable error"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
