use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use subsum_core::harness::{bench, format_answers, run_engine, to_csv, verify, Engine};
use subsum_core::reduction::reduce_trace;
use subsum_core::trace::{generate_trace, parse_trace, serialize_trace, GenSpec, Mode, Trace};

#[derive(Parser)]
#[command(name = "subsum", version, about = "Dynamic subset sum and bounded k-sum engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one engine over a trace and print or write its answers.
    Run {
        #[arg(long)]
        engine: Engine,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded random trace.
    Gen {
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        oprs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        query_ratio: Option<f64>,
        #[arg(long)]
        delete_ratio: Option<f64>,
        /// Number of sets for ksum traces.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every applicable engine against the brute-force oracle.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time engines on traces and write a CSV.
    Bench {
        #[arg(long, num_args = 1.., required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        engines: Vec<Engine>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rewrite a 3sum or ksum trace as a subset-sum trace.
    Reduce {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<Trace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_trace(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn trace_id(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Returns whether everything verified.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run { engine, trace, seed, out } => {
            let t = load(&trace)?;
            let result = run_engine(engine, &t, &trace_id(&trace), seed)?;
            let answers = format_answers(&result.answers);
            match out {
                Some(path) => write(&path, &answers)?,
                None => print!("{answers}"),
            }
            let r = &result.record;
            eprintln!(
                "{}: {} ops, {} ns total, {:.1} ns/op, {} rebuilds",
                r.engine, r.ops, r.total_ns, r.amortized_ns, r.rebuilds
            );
            Ok(true)
        }
        Command::Gen { mode, bound, oprs, seed, query_ratio, delete_ratio, k, out } => {
            let mut spec = GenSpec::new(mode, bound, oprs, seed);
            if let Some(q) = query_ratio {
                spec.query_ratio = q;
            }
            if let Some(d) = delete_ratio {
                spec.delete_ratio = d;
            }
            if k.is_some() {
                spec.k = k;
            }
            write(&out, &serialize_trace(&generate_trace(&spec)?))?;
            Ok(true)
        }
        Command::Verify { trace, seed } => {
            let report = verify(&load(&trace)?, seed);
            print!("{report}");
            Ok(report.passed())
        }
        Command::Bench { traces, engines, csv, seed } => {
            let loaded = traces
                .iter()
                .map(|p| Ok((trace_id(p), load(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let records = bench(&loaded, &engines, seed)?;
            write(&csv, &to_csv(&records))?;
            Ok(true)
        }
        Command::Reduce { trace, out } => {
            let (reduced, tmax) = reduce_trace(&load(&trace)?)?;
            write(&out, &serialize_trace(&reduced))?;
            eprintln!("tmax {tmax}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
