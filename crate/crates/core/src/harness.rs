//! Runs engines on traces: answers, timing records, oracle comparison and CSV.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::answer::Answer;
use crate::dyn_subset_sum::{DynError, DynSubsetSum};
use crate::k_sum::KSum;
use crate::offline_subset_sum::{run_offline_detailed, OfflineError};
use crate::oracle::{naive_set_trace, naive_subset_sum_trace};
use crate::reduction::ReductionError;
use crate::three_sum::{SumSetError, ThreeSum};
use crate::trace::{Mode, Trace, TraceError};

pub const CSV_HEADER: &str = "engine,trace,ops,total_ns,amortized_ns,rebuilds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Dynamic,
    Offline,
    Naive,
    ThreeSum,
    KSum,
}

impl Engine {
    pub const ALL: [Engine; 5] = [Engine::Dynamic, Engine::Offline, Engine::Naive, Engine::ThreeSum, Engine::KSum];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Dynamic => "dynamic",
            Engine::Offline => "offline",
            Engine::Naive => "naive",
            Engine::ThreeSum => "3sum",
            Engine::KSum => "ksum",
        }
    }

    /// Whether the engine can answer a trace of this mode.
    pub fn supports(self, trace: &Trace) -> bool {
        let mode = trace.header.mode;
        match self {
            Engine::Dynamic | Engine::Offline => mode == Mode::SubsetSum,
            Engine::Naive => true,
            Engine::ThreeSum => mode == Mode::ThreeSum || (mode == Mode::KSum && trace.header.k == Some(3)),
            Engine::KSum => matches!(mode, Mode::ThreeSum | Mode::KSum),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::UnknownEngine(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown engine `{0}` (expected dynamic, offline, naive, 3sum or ksum)")]
    UnknownEngine(String),
    #[error("engine {engine} cannot run a {mode} trace")]
    Unsupported { engine: Engine, mode: Mode },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error(transparent)]
    SumSet(#[from] SumSetError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Timing for one engine on one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub engine: Engine,
    pub trace: String,
    pub ops: usize,
    pub total_ns: u128,
    pub amortized_ns: f64,
    pub rebuilds: usize,
}

impl BenchRecord {
    pub fn new(engine: Engine, trace: &str, ops: usize, total_ns: u128, rebuilds: usize) -> Self {
        let amortized_ns = if ops == 0 { 0.0 } else { total_ns as f64 / ops as f64 };
        Self { engine, trace: trace.to_string(), ops, total_ns, amortized_ns, rebuilds }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{}",
            self.engine, self.trace, self.ops, self.total_ns, self.amortized_ns, self.rebuilds
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub answers: Vec<Answer>,
    pub record: BenchRecord,
}

/// Runs one engine over a whole trace; only the engine work is timed.
pub fn run_engine(engine: Engine, trace: &Trace, trace_id: &str, seed: u64) -> Result<RunOutput, HarnessError> {
    if !engine.supports(trace) {
        return Err(HarnessError::Unsupported { engine, mode: trace.header.mode });
    }
    let bound = trace.header.bound;
    let ops = trace.ops.len();
    let start = Instant::now();
    let (answers, rebuilds) = match engine {
        Engine::Dynamic => {
            let mut e = DynSubsetSum::new(bound as usize, seed)?;
            let answers = e.run(trace.sum_ops().expect("subset-sum trace"))?;
            (answers, e.rebuilds())
        }
        Engine::Offline => {
            let run = run_offline_detailed(trace.sum_ops().expect("subset-sum trace"), bound as usize, false)?;
            (run.answers, run.table.solves)
        }
        Engine::Naive => match trace.sum_ops() {
            Some(sum_ops) => (naive_subset_sum_trace(sum_ops, bound), trace.ops.query_count()),
            None => {
                let (_, answers) = naive_set_trace(trace.set_ops().expect("set trace"), trace.header.set_count());
                (answers, 0)
            }
        },
        Engine::ThreeSum => {
            let mut e = ThreeSum::new(bound)?;
            let answers = e.run(trace.set_ops().expect("set trace"))?;
            (answers, e.rebuilds())
        }
        Engine::KSum => {
            let mut e = KSum::new(trace.header.set_count(), bound)?;
            let answers = e.run(trace.set_ops().expect("set trace"))?;
            (answers, e.rebuilds())
        }
    };
    let total_ns = start.elapsed().as_nanos();
    Ok(RunOutput { answers, record: BenchRecord::new(engine, trace_id, ops, total_ns, rebuilds) })
}

/// One line per answer, `Y` or `N`.
pub fn format_answers(answers: &[Answer]) -> String {
    answers.iter().map(|a| format!("{a}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineCheck {
    pub engine: Engine,
    /// Index of the first query answered differently from the oracle.
    pub first_mismatch: Option<usize>,
    pub error: Option<String>,
}

impl EngineCheck {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub queries: usize,
    pub checks: Vec<EngineCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EngineCheck::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match (&c.error, c.first_mismatch) {
                (Some(e), _) => writeln!(f, "{}: error: {e}", c.engine)?,
                (None, Some(q)) => writeln!(f, "{}: MISMATCH at query {q}", c.engine)?,
                (None, None) => writeln!(f, "{}: ok ({} queries)", c.engine, self.queries)?,
            }
        }
        Ok(())
    }
}

/// Compares every applicable non-oracle engine against the naive answers.
pub fn verify(trace: &Trace, seed: u64) -> VerifyReport {
    let oracle = match run_engine(Engine::Naive, trace, "", seed) {
        Ok(out) => out.answers,
        Err(e) => {
            let check = EngineCheck { engine: Engine::Naive, first_mismatch: None, error: Some(e.to_string()) };
            return VerifyReport { queries: 0, checks: vec![check] };
        }
    };
    let checks = Engine::ALL
        .into_iter()
        .filter(|&e| e != Engine::Naive && e.supports(trace))
        .map(|engine| match run_engine(engine, trace, "", seed) {
            Ok(out) => EngineCheck {
                engine,
                first_mismatch: out
                    .answers
                    .iter()
                    .zip(&oracle)
                    .position(|(a, b)| a != b)
                    .or((out.answers.len() != oracle.len()).then_some(out.answers.len().min(oracle.len()))),
                error: None,
            },
            Err(e) => EngineCheck { engine, first_mismatch: None, error: Some(e.to_string()) },
        })
        .collect();
    VerifyReport { queries: oracle.len(), checks }
}

/// Times every supported `(engine, trace)` pair after one untimed warm-up run.
/// Pairs the engine cannot run are skipped.
pub fn bench(traces: &[(String, Trace)], engines: &[Engine], seed: u64) -> Result<Vec<BenchRecord>, HarnessError> {
    let mut records = Vec::new();
    for (id, trace) in traces {
        for &engine in engines {
            if !engine.supports(trace) {
                continue;
            }
            run_engine(engine, trace, id, seed)?;
            records.push(run_engine(engine, trace, id, seed)?.record);
        }
    }
    Ok(records)
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
