//! Fully dynamic 3-sum over `A`, `B`, `C` with values in `[0, rmax]`: keep the
//! number of triples with `a + b = c` exact under inserts and deletes.
//!
//! `C` is stored negated so every triple satisfies `x + y + z = 0`. Single-set
//! and pairwise-sum counting vectors are frozen every `ceil(sqrt(rmax))`
//! operations; changes since then sit in a pile and are corrected for
//! explicitly.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::answer::Answer;
use crate::conv::ConvError;
use crate::counting::CountVector;
use crate::trace::SetOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetLabel {
    A,
    B,
    C,
}

impl SetLabel {
    pub const ALL: [SetLabel; 3] = [SetLabel::A, SetLabel::B, SetLabel::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The two other labels, in order.
    fn others(self) -> (SetLabel, SetLabel) {
        match self {
            SetLabel::A => (SetLabel::B, SetLabel::C),
            SetLabel::B => (SetLabel::A, SetLabel::C),
            SetLabel::C => (SetLabel::A, SetLabel::B),
        }
    }

    fn normalize(self, value: u64) -> i64 {
        match self {
            SetLabel::C => -(value as i64),
            _ => value as i64,
        }
    }
}

impl fmt::Display for SetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumSetError {
    #[error("rmax must be at least 1")]
    ZeroBound,
    #[error("set index {0} does not exist")]
    NoSuchSet(usize),
    #[error("value {value} exceeds rmax {rmax}")]
    OutOfRange { value: u64, rmax: u64 },
    #[error("{value} is already in set {set}")]
    DuplicateInsert { set: String, value: u64 },
    #[error("{value} is not in set {set}")]
    AbsentDelete { set: String, value: u64 },
    #[error("k = {0} is outside [3, 6]")]
    Arity(usize),
    #[error(transparent)]
    Conv(#[from] ConvError),
}

/// Smallest `c` with `c^e >= n`.
pub(crate) fn ceil_root(n: u64, e: u32) -> usize {
    let mut c = (n as f64).powf(1.0 / e as f64).floor() as u64;
    while (c as u128).pow(e) < n as u128 {
        c += 1;
    }
    while c > 1 && ((c - 1) as u128).pow(e) >= n as u128 {
        c -= 1;
    }
    c.max(1) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PileEntry {
    insert: bool,
    label: SetLabel,
    value: i64,
}

#[derive(Debug, Clone)]
pub struct ThreeSum {
    rmax: u64,
    cadence: usize,
    live: [HashSet<i64>; 3],
    single: [CountVector; 3],
    /// `pair[l]` counts sums of the two sets other than `l`.
    pair: [CountVector; 3],
    pile: Vec<PileEntry>,
    pile_counts: HashMap<PileEntry, i64>,
    cnt: u64,
    ops_since: usize,
    rebuilds: usize,
}

impl ThreeSum {
    pub fn new(rmax: u64) -> Result<Self, SumSetError> {
        if rmax == 0 {
            return Err(SumSetError::ZeroBound);
        }
        let r = rmax as i64;
        let single = std::array::from_fn(|_| CountVector::zeros(-2 * r, 2 * r));
        let pair = single.clone();
        Ok(Self {
            rmax,
            cadence: ceil_root(rmax, 2),
            live: Default::default(),
            single,
            pair,
            pile: Vec::new(),
            pile_counts: HashMap::new(),
            cnt: 0,
            ops_since: 0,
            rebuilds: 0,
        })
    }

    /// Rebuild after every `cadence` operations instead of `ceil(sqrt(rmax))`.
    pub fn with_cadence(mut self, cadence: usize) -> Self {
        self.cadence = cadence.max(1);
        self
    }

    pub fn cadence(&self) -> usize {
        self.cadence
    }

    pub fn cnt(&self) -> u64 {
        self.cnt
    }

    pub fn pile_len(&self) -> usize {
        self.pile.len()
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn query(&mut self) -> Result<Answer, SumSetError> {
        let answer = Answer::from(self.cnt > 0);
        self.tick()?;
        Ok(answer)
    }

    pub fn insert(&mut self, label: SetLabel, value: u64) -> Result<(), SumSetError> {
        self.modify(label, value, true)
    }

    pub fn delete(&mut self, label: SetLabel, value: u64) -> Result<(), SumSetError> {
        self.modify(label, value, false)
    }

    pub fn apply(&mut self, op: &SetOp) -> Result<Option<Answer>, SumSetError> {
        match *op {
            SetOp::Query => self.query().map(Some),
            SetOp::Insert { set, value } => {
                let label = SetLabel::from_index(set).ok_or(SumSetError::NoSuchSet(set))?;
                self.insert(label, value).map(|_| None)
            }
            SetOp::Delete { set, value } => {
                let label = SetLabel::from_index(set).ok_or(SumSetError::NoSuchSet(set))?;
                self.delete(label, value).map(|_| None)
            }
        }
    }

    pub fn run(&mut self, ops: &[SetOp]) -> Result<Vec<Answer>, SumSetError> {
        let mut answers = Vec::new();
        for op in ops {
            if let Some(a) = self.apply(op)? {
                answers.push(a);
            }
        }
        Ok(answers)
    }

    fn modify(&mut self, label: SetLabel, value: u64, insert: bool) -> Result<(), SumSetError> {
        if value > self.rmax {
            return Err(SumSetError::OutOfRange { value, rmax: self.rmax });
        }
        let w = label.normalize(value);
        let set = &mut self.live[label.index()];
        if insert && !set.insert(w) {
            return Err(SumSetError::DuplicateInsert { set: label.to_string(), value });
        }
        if !insert && !set.remove(&w) {
            return Err(SumSetError::AbsentDelete { set: label.to_string(), value });
        }
        let entry = PileEntry { insert, label, value: w };
        self.pile.push(entry);
        *self.pile_counts.entry(entry).or_insert(0) += 1;
        let triples = self.count_triples(w, label);
        debug_assert!(triples >= 0);
        if insert {
            self.cnt += triples as u64;
        } else {
            self.cnt -= triples as u64;
        }
        self.tick()
    }

    fn tick(&mut self) -> Result<(), SumSetError> {
        self.ops_since += 1;
        if self.ops_since >= self.cadence {
            self.rebuild_auxiliary()?;
        }
        Ok(())
    }

    fn pile_count(&self, insert: bool, label: SetLabel, value: i64) -> i64 {
        self.pile_counts.get(&PileEntry { insert, label, value }).copied().unwrap_or(0)
    }

    /// Pairs `(y, z)` from the two sets other than `which` with `w + y + z = 0`,
    /// against the live sets. `w` is in normalized form.
    pub fn count_triples(&self, w: i64, which: SetLabel) -> i64 {
        let (y_set, z_set) = which.others();
        let frozen_y = &self.single[y_set.index()];
        let frozen_z = &self.single[z_set.index()];
        let mut triples = self.pair[which.index()].get(-w) as i64;
        for e in &self.pile {
            let v = -w - e.value;
            if e.label == y_set {
                if e.insert {
                    triples += frozen_z.get(v) as i64 - self.pile_count(false, z_set, v) + self.pile_count(true, z_set, v);
                } else {
                    triples += -(frozen_z.get(v) as i64) + self.pile_count(false, z_set, v);
                }
            } else if e.label == z_set {
                if e.insert {
                    triples += frozen_y.get(v) as i64 - self.pile_count(false, y_set, v);
                } else {
                    triples -= frozen_y.get(v) as i64;
                }
            }
        }
        triples
    }

    /// Folds the pile into the frozen vectors and recomputes the pairwise sums.
    pub fn rebuild_auxiliary(&mut self) -> Result<(), SumSetError> {
        let r = self.rmax as i64;
        for label in SetLabel::ALL {
            self.single[label.index()] =
                CountVector::from_values(self.live[label.index()].iter().copied(), -2 * r, 2 * r);
        }
        for label in SetLabel::ALL {
            let (y, z) = label.others();
            self.pair[label.index()] =
                CountVector::sumset(&self.single[y.index()], &self.single[z.index()], -2 * r, 2 * r)?;
        }
        self.pile.clear();
        self.pile_counts.clear();
        self.ops_since = 0;
        self.rebuilds += 1;
        Ok(())
    }

    /// Frozen counts of `x + y` for two distinct labels.
    pub fn pair_vector(&self, x: SetLabel, y: SetLabel) -> &CountVector {
        assert_ne!(x, y);
        let missing = SetLabel::ALL.into_iter().find(|&l| l != x && l != y).unwrap();
        &self.pair[missing.index()]
    }

    /// Live contents of a set, ascending, in original (non-negated) form.
    pub fn members(&self, label: SetLabel) -> Vec<u64> {
        let mut v: Vec<u64> = self.live[label.index()].iter().map(|&x| x.unsigned_abs()).collect();
        v.sort_unstable();
        v
    }

    /// Recounts the triples from the live sets with one convolution.
    pub fn audit(&self) -> Result<u64, SumSetError> {
        let r = self.rmax as i64;
        let vec = |l: SetLabel| CountVector::from_values(self.live[l.index()].iter().copied(), -2 * r, 2 * r);
        let ab = CountVector::sumset(&vec(SetLabel::A), &vec(SetLabel::B), -2 * r, 2 * r)?;
        Ok(self.live[SetLabel::C.index()].iter().map(|&z| ab.get(-z)).sum())
    }
}
