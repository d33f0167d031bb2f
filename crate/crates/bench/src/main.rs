use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bench_cli::{
    emit_report, load_dimacs, run_benchmark_with, run_sp_dimacs, BenchError, BenchName,
    BenchReport, BenchmarkSpec, OutputFormat, Scheduler, UpdateMix,
};

/// Drive oracle-verified benchmarks of the dataflow constraint engine.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a named benchmark over a seeded random instance.
    Run {
        /// Benchmark to run.
        #[arg(long, value_enum)]
        name: BenchName,
        /// Input size (list length, tree nodes, graph nodes, or matrix
        /// entries).
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Updates to apply after the initial build.
        #[arg(long, default_value_t = 500)]
        updates: usize,
        /// Updates grouped per atomic block.
        #[arg(long, default_value_t = 1)]
        batch: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Scheduler::Lru)]
        scheduler: Scheduler,
        /// Check outputs against the from-scratch oracle after every batch.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Trials to average timings over.
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Replay weight decreases over a DIMACS `p sp` graph, verifying
    /// distances against a fresh Dijkstra run after each one.
    Sp {
        /// Path to the DIMACS file.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1000)]
        decreases: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Scheduler::MinDist)]
        scheduler: Scheduler,
        /// Source node (1-based, as in the file).
        #[arg(long, default_value_t = 1)]
        source: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Trials to average timings over.
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((spec, report, format)) => {
            println!("{}", emit_report(&spec, &report, format));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                BenchError::VerificationFailed { .. }
                | BenchError::Engine(_)
                | BenchError::App(_) => 1,
                BenchError::InvalidSpec(_) | BenchError::Parse { .. } | BenchError::Io(_) => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(BenchmarkSpec, BenchReport, OutputFormat), BenchError> {
    match cli.cmd {
        Cmd::Run { name, n, updates, batch, seed, scheduler, verify, format, trials } => {
            let spec = BenchmarkSpec {
                name,
                n,
                updates,
                batch,
                seed,
                scheduler,
                verify,
                mix: UpdateMix::Mixed,
            };
            let report = run_benchmark_with(&spec, trials)?;
            Ok((spec, report, format))
        }
        Cmd::Sp { graph, decreases, seed, scheduler, source, format, trials } => {
            let parsed = load_dimacs(&graph)?;
            for warning in &parsed.warnings {
                eprintln!("warning: {warning}");
            }
            if source < 1 {
                return Err(BenchError::InvalidSpec("source nodes are 1-based".into()));
            }
            let (spec, report) =
                run_sp_dimacs(&parsed, source - 1, decreases, seed, scheduler, trials)?;
            Ok((spec, report, format))
        }
    }
}
