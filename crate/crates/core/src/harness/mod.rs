//! Instance generators, command dispatch and benchmark sweeps used by the
//! command-line binary.

pub mod bench;
pub mod commands;
pub mod generators;

pub use bench::{bench, bench_rows, parse_csv, BenchFormat, BenchRow, BENCH_HEADER};
pub use commands::{parse_list, run, solve, Command, ErrorReport, InstanceSource, OutputFormat, RunOptions, SolverKind, VerifyMode};
pub use generators::{generate, GeneratorSpec, GENERATOR_NAMES};
