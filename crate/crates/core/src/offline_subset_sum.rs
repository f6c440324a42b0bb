//! Insert/query subset sum when the whole operation sequence is known up front.
//!
//! Prefix solutions are computed from scratch at `lambda` milestones, the
//! prefixes where the number of reachable sums first crosses `i * tmax / lambda`.
//! Between two milestones an insert can only set sums from a small, precomputed
//! delta set, so only that set is scanned.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::answer::Answer;
use crate::bitmap::SolutionBitmap;
use crate::static_solver::solve_all;
use crate::trace::SumOp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OfflineError {
    #[error("tmax must be at least 1")]
    ZeroBound,
    #[error("operation {index} is a deletion")]
    Deletion { index: usize },
    #[error("operation {index}: value {value} exceeds tmax {tmax}")]
    OutOfRange { index: usize, value: u64, tmax: usize },
}

/// Positions of the inserts that can matter and of the queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilteredTrace {
    pub inserts: Vec<usize>,
    pub queries: Vec<usize>,
}

/// Drops every insert of weight `w` beyond the first `tmax / w`; such items can
/// never be part of a subset summing to at most `tmax`.
pub fn filter_operations(ops: &[SumOp], tmax: usize) -> Result<FilteredTrace, OfflineError> {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut out = FilteredTrace::default();
    for (index, op) in ops.iter().enumerate() {
        match *op {
            SumOp::Insert(w) => {
                if w > tmax as u64 {
                    return Err(OfflineError::OutOfRange { index, value: w, tmax });
                }
                let c = seen.entry(w).or_insert(0);
                *c += 1;
                if w > 0 && *c <= tmax / w as usize {
                    out.inserts.push(index);
                }
            }
            SumOp::Query(t) => {
                if t > tmax as u64 {
                    return Err(OfflineError::OutOfRange { index, value: t, tmax });
                }
                out.queries.push(index);
            }
            SumOp::Delete(_) => return Err(OfflineError::Deletion { index }),
        }
    }
    Ok(out)
}

/// `max(1, ceil(sqrt(min(oprs, tmax))))`.
pub fn choose_lambda(oprs: usize, tmax: usize) -> usize {
    let m = oprs.min(tmax);
    let mut r = m.isqrt();
    if r * r < m {
        r += 1;
    }
    r.max(1)
}

/// Reachable-set size a prefix must reach to pass milestone `i`; the empty
/// sum is counted.
pub fn milestone_threshold(i: usize, tmax: usize, lambda: usize) -> usize {
    (i * tmax).div_ceil(lambda) + 1
}

/// Memoized from-scratch solutions of operation prefixes.
struct PrefixSolver<'a> {
    ops: &'a [SumOp],
    effective: Vec<bool>,
    tmax: usize,
    memo: HashMap<usize, SolutionBitmap>,
    solves: usize,
}

impl<'a> PrefixSolver<'a> {
    fn new(ops: &'a [SumOp], filtered: &FilteredTrace, tmax: usize) -> Self {
        let mut effective = vec![false; ops.len()];
        for &i in &filtered.inserts {
            effective[i] = true;
        }
        Self { ops, effective, tmax, memo: HashMap::new(), solves: 0 }
    }

    /// Reachable sums after the first `len` operations.
    fn solve(&mut self, len: usize) -> &SolutionBitmap {
        if !self.memo.contains_key(&len) {
            let weights: Vec<u64> = self.ops[..len]
                .iter()
                .enumerate()
                .filter(|&(i, _)| self.effective[i])
                .map(|(_, op)| match *op {
                    SumOp::Insert(w) => w,
                    _ => unreachable!("only inserts are effective"),
                })
                .collect();
            self.memo.insert(len, solve_all(&weights, self.tmax));
            self.solves += 1;
        }
        &self.memo[&len]
    }

    fn size(&mut self, len: usize) -> usize {
        self.solve(len).count_ones()
    }
}

/// Milestone prefixes, the sums each segment may gain, and the snapshots
/// taken at and just before every milestone.
#[derive(Debug, Clone)]
pub struct MilestoneTable {
    pub lambda: usize,
    /// Prefix length at which milestone `i + 1` is reached, or `oprs` if never.
    pub milestones: Vec<usize>,
    pub reached: Vec<bool>,
    /// Sums gained between milestone `i` and just before milestone `i + 1`, ascending.
    pub deltas: Vec<Vec<usize>>,
    pub snapshots: BTreeMap<usize, SolutionBitmap>,
    /// Number of from-scratch solves performed.
    pub solves: usize,
}

impl MilestoneTable {
    pub fn delta_bound(&self, tmax: usize) -> usize {
        tmax.div_ceil(self.lambda)
    }
}

/// Binary-searches every milestone over prefix lengths, solving each probe
/// from scratch.
pub fn find_milestones(ops: &[SumOp], filtered: &FilteredTrace, tmax: usize, lambda: usize) -> MilestoneTable {
    assert!(lambda >= 1);
    let oprs = ops.len();
    let mut solver = PrefixSolver::new(ops, filtered, tmax);
    let final_size = solver.size(oprs);
    let mut milestones = Vec::with_capacity(lambda);
    let mut reached = Vec::with_capacity(lambda);
    let mut lo = 0;
    for i in 1..=lambda {
        let need = milestone_threshold(i, tmax, lambda);
        if final_size < need {
            milestones.push(oprs);
            reached.push(false);
            lo = oprs;
            continue;
        }
        // Least prefix length in (lo, oprs] whose reachable set is big enough.
        let (mut a, mut b) = (lo, oprs);
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if solver.size(mid) >= need {
                b = mid;
            } else {
                a = mid;
            }
        }
        let m = if solver.size(a) >= need { a } else { b };
        milestones.push(m);
        reached.push(true);
        lo = m;
    }

    let mut snapshots = BTreeMap::new();
    let mut deltas = Vec::with_capacity(lambda);
    let mut prev = 0;
    for (&m, &hit) in milestones.iter().zip(&reached) {
        let upper = if hit { m - 1 } else { oprs };
        let base = solver.solve(prev).clone();
        let gained = solver.solve(upper).difference(&base);
        deltas.push(gained);
        if hit {
            for len in [m - 1, m] {
                snapshots.entry(len).or_insert_with(|| solver.solve(len).clone());
            }
        }
        prev = m;
    }
    MilestoneTable { lambda, milestones, reached, deltas, snapshots, solves: solver.solves }
}

/// Outcome of an offline run with its work counters.
#[derive(Debug, Clone)]
pub struct OfflineRun {
    pub answers: Vec<Answer>,
    pub table: MilestoneTable,
    /// Delta-set entries examined, summed over streamed inserts.
    pub touched: usize,
    /// Inserts handled by scanning a delta set.
    pub streamed: usize,
    /// `A` after every operation, when requested.
    pub trajectory: Option<Vec<SolutionBitmap>>,
}

pub fn run_offline(ops: &[SumOp], tmax: usize) -> Result<Vec<Answer>, OfflineError> {
    Ok(run_offline_detailed(ops, tmax, false)?.answers)
}

pub fn run_offline_detailed(ops: &[SumOp], tmax: usize, keep_trajectory: bool) -> Result<OfflineRun, OfflineError> {
    if tmax == 0 {
        return Err(OfflineError::ZeroBound);
    }
    let filtered = filter_operations(ops, tmax)?;
    let lambda = choose_lambda(ops.len().max(1), tmax);
    let table = find_milestones(ops, &filtered, tmax, lambda);
    Ok(stream(ops, &filtered, tmax, table, keep_trajectory))
}

fn stream(ops: &[SumOp], filtered: &FilteredTrace, tmax: usize, table: MilestoneTable, keep: bool) -> OfflineRun {
    let mut effective = vec![false; ops.len()];
    for &i in &filtered.inserts {
        effective[i] = true;
    }
    let mut reach = SolutionBitmap::new(tmax);
    let mut active = 0;
    let (mut touched, mut streamed) = (0, 0);
    let mut answers = Vec::with_capacity(filtered.queries.len());
    let mut trajectory = keep.then(Vec::new);
    for (j, op) in ops.iter().enumerate() {
        let len = j + 1;
        match *op {
            SumOp::Query(t) => answers.push(Answer::from(reach.get(t as usize))),
            SumOp::Insert(w) if effective[j] => {
                if let Some(snap) = table.snapshots.get(&len) {
                    reach = snap.clone();
                    while active < table.lambda && table.reached[active] && table.milestones[active] <= len {
                        active += 1;
                    }
                } else if active < table.lambda {
                    let w = w as usize;
                    let delta = &table.deltas[active];
                    touched += delta.len();
                    streamed += 1;
                    for &x in delta.iter().rev() {
                        if x >= w && !reach.get(x) && reach.get(x - w) {
                            reach.set(x);
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(tr) = trajectory.as_mut() {
            tr.push(reach.clone());
        }
    }
    OfflineRun { answers, table, touched, streamed, trajectory }
}
