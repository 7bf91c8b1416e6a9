//! Benchmark sweeps: solve, then measure the smallest additive slack the
//! verifier accepts at the solver's multiplicative slack.
//!
//! CSV columns: `instance_id,solver,delta,alpha_achieved,iterations,wall_ms,seed`.
//! `wall_ms` is empty unless timing was requested, keeping output
//! reproducible. Rows are sorted by instance id, then solver.

use std::time::Instant;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::verifier::Verifier;

use super::commands::{solve, InstanceSource, RunOptions, SolverKind};
use super::generators::{generate, GeneratorSpec};

pub const BENCH_HEADER: [&str; 7] = ["instance_id", "solver", "delta", "alpha_achieved", "iterations", "wall_ms", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub solver: String,
    pub delta: f64,
    /// Outcome is in the `(delta, alpha)`-core for every larger `alpha`.
    pub alpha_achieved: f64,
    pub iterations: usize,
    pub wall_ms: Option<f64>,
    pub seed: Option<u64>,
}

const FAMILIES: [(&str, SolverKind); 3] = [
    ("random_matroid", SolverKind::Matroid),
    ("random_matching", SolverKind::Matching),
    ("random_knapsack", SolverKind::Packing),
];

/// Runs the sweep described by `opts` and returns the rendered table.
///
/// With an instance source, benchmarks that instance once. Otherwise draws
/// `trials` (default 3) instances from each random family with generator
/// seeds `seed, seed + 1, ...`.
pub fn bench(opts: &RunOptions, format: BenchFormat) -> Result<String> {
    let rows = bench_rows(opts)?;
    match format {
        BenchFormat::Json => {
            let mut text = serde_json::to_string_pretty(&rows).expect("serializable rows");
            text.push('\n');
            Ok(text)
        }
        BenchFormat::Csv => render_csv(&rows),
    }
}

pub fn bench_rows(opts: &RunOptions) -> Result<Vec<BenchRow>> {
    let mut jobs: Vec<(String, SourceJob)> = Vec::new();
    match &opts.source {
        Some(InstanceSource::Json(text)) => jobs.push(("instance".into(), SourceJob::Json(text.clone()))),
        Some(InstanceSource::Generator(spec)) => jobs.push((spec.id(), SourceJob::Generator(spec.clone()))),
        None => {
            let base = opts
                .seed
                .ok_or_else(|| CoreError::Validation("bench over random families needs --seed".into()))?;
            for (name, _) in FAMILIES {
                for t in 0..opts.trials.unwrap_or(3) as u64 {
                    let spec = GeneratorSpec::new(name).with("seed", base.wrapping_add(t));
                    jobs.push((spec.id(), SourceJob::Generator(spec)));
                }
            }
        }
    }
    let verifier = Verifier::new(opts.caps);
    let mut rows = Vec::with_capacity(jobs.len());
    for (id, job) in jobs {
        let inst = match &job {
            SourceJob::Json(text) => crate::instance::Instance::from_json(text)?,
            SourceJob::Generator(spec) => generate(spec)?,
        };
        let kind = match (&opts.source, &job) {
            (Some(_), _) => opts.constraint.unwrap_or_else(|| SolverKind::infer(&inst)),
            (None, SourceJob::Generator(spec)) => FAMILIES.iter().find(|(n, _)| *n == spec.name).map(|f| f.1).unwrap(),
            (None, SourceJob::Json(_)) => unreachable!("random families are generated"),
        };
        let delta = opts.delta.unwrap_or(kind.default_delta());
        let mut job_opts = opts.clone();
        job_opts.delta = Some(delta);
        let generator_seed = match &job {
            SourceJob::Generator(spec) => spec.params.get("seed").and_then(|s| s.parse().ok()),
            SourceJob::Json(_) => None,
        };
        // Family sweeps reuse each generator seed for the solver.
        if opts.source.is_none() || opts.seed.is_none() {
            job_opts.seed = generator_seed;
        }
        // In a sweep `trials` counts instances, not rounding retries.
        if opts.source.is_none() {
            job_opts.trials = None;
        }
        let start = Instant::now();
        let report = solve(&inst, kind, &job_opts)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let outcome = report
            .outcome
            .clone()
            .ok_or_else(|| CoreError::Validation("solver returned no integral outcome".into()))?;
        let alpha_achieved = verifier.core_deficit(&inst, &outcome, delta)?;
        rows.push(BenchRow {
            instance_id: id,
            solver: report.solver.to_string(),
            delta,
            alpha_achieved,
            iterations: report.iterations,
            wall_ms: opts.timing.then_some(wall_ms),
            seed: report.seed.or(generator_seed),
        });
    }
    rows.sort_by(|a, b| a.instance_id.cmp(&b.instance_id).then_with(|| a.solver.cmp(&b.solver)));
    Ok(rows)
}

enum SourceJob {
    Json(String),
    Generator(GeneratorSpec),
}

fn render_csv(rows: &[BenchRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CoreError::Validation(format!("csv output failed: {e}"));
    writer.write_record(BENCH_HEADER).map_err(csv_err)?;
    for row in rows {
        writer
            .write_record([
                row.instance_id.clone(),
                row.solver.clone(),
                row.delta.to_string(),
                row.alpha_achieved.to_string(),
                row.iterations.to_string(),
                row.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
                row.seed.map(|s| s.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CoreError::Validation(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Parses a table written by [`bench`] in CSV form.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: String| CoreError::Validation(format!("bad bench csv: {e}"));
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(BENCH_HEADER) {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    reader
        .records()
        .map(|record| {
            let r = record.map_err(|e| bad(e.to_string()))?;
            let num = |k: usize| -> Result<f64> { r[k].parse().map_err(|_| bad(format!("column {k}: {:?}", &r[k]))) };
            Ok(BenchRow {
                instance_id: r[0].to_string(),
                solver: r[1].to_string(),
                delta: num(2)?,
                alpha_achieved: num(3)?,
                iterations: r[4].parse().map_err(|_| bad(format!("iterations {:?}", &r[4])))?,
                wall_ms: if r[5].is_empty() { None } else { Some(num(5)?) },
                seed: if r[6].is_empty() {
                    None
                } else {
                    Some(r[6].parse().map_err(|_| bad(format!("seed {:?}", &r[6])))?)
                },
            })
        })
        .collect()
}
