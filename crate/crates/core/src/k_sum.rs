//! Fully dynamic bounded k-sum: sets `A_1..A_k` with values in `[0, rmax]`,
//! counting tuples with `a_1 + ... + a_{k-1} = a_k`.
//!
//! The last set is stored negated. For every nonempty subset `S` of the sets
//! a frozen vector counts the sums `sum_{z in S} a_z`; changes since the last
//! rebuild are kept as signed per-set deltas.

use std::collections::{HashMap, HashSet};

use crate::answer::Answer;
use crate::counting::CountVector;
use crate::three_sum::{ceil_root, SumSetError};
use crate::trace::SetOp;

pub const MIN_K: usize = 3;
pub const MAX_K: usize = 6;

#[derive(Debug, Clone)]
pub struct KSum {
    k: usize,
    rmax: u64,
    cadence: usize,
    live: Vec<HashSet<i64>>,
    /// Indexed by subset bitmask; entry 0 is unused.
    subset_sums: Vec<CountVector>,
    /// Net change per set since the last rebuild: `+1` inserted, `-1` deleted.
    deltas: Vec<HashMap<i64, i64>>,
    pile_len: usize,
    cnt: u64,
    ops_since: usize,
    rebuilds: usize,
}

impl KSum {
    pub fn new(k: usize, rmax: u64) -> Result<Self, SumSetError> {
        if !(MIN_K..=MAX_K).contains(&k) {
            return Err(SumSetError::Arity(k));
        }
        if rmax == 0 {
            return Err(SumSetError::ZeroBound);
        }
        let (lo, hi) = Self::range(k, rmax);
        Ok(Self {
            k,
            rmax,
            cadence: ceil_root(rmax, k as u32 - 1),
            live: vec![HashSet::new(); k],
            subset_sums: vec![CountVector::zeros(lo, hi); 1 << k],
            deltas: vec![HashMap::new(); k],
            pile_len: 0,
            cnt: 0,
            ops_since: 0,
            rebuilds: 0,
        })
    }

    fn range(k: usize, rmax: u64) -> (i64, i64) {
        let r = k as i64 * rmax as i64;
        (-r, r)
    }

    pub fn with_cadence(mut self, cadence: usize) -> Self {
        self.cadence = cadence.max(1);
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cadence(&self) -> usize {
        self.cadence
    }

    pub fn cnt(&self) -> u64 {
        self.cnt
    }

    pub fn pile_len(&self) -> usize {
        self.pile_len
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    fn normalize(&self, set: usize, value: u64) -> i64 {
        if set + 1 == self.k {
            -(value as i64)
        } else {
            value as i64
        }
    }

    /// Frozen counts of the subset sum for the sets in `mask` (bit `i` is set `i`).
    pub fn subset_sum(&self, mask: usize) -> &CountVector {
        assert!(mask > 0 && mask < 1 << self.k);
        &self.subset_sums[mask]
    }

    pub fn query(&mut self) -> Result<Answer, SumSetError> {
        let answer = Answer::from(self.cnt > 0);
        self.tick()?;
        Ok(answer)
    }

    pub fn insert(&mut self, set: usize, value: u64) -> Result<(), SumSetError> {
        self.modify(set, value, true)
    }

    pub fn delete(&mut self, set: usize, value: u64) -> Result<(), SumSetError> {
        self.modify(set, value, false)
    }

    pub fn apply(&mut self, op: &SetOp) -> Result<Option<Answer>, SumSetError> {
        match *op {
            SetOp::Query => self.query().map(Some),
            SetOp::Insert { set, value } => self.insert(set, value).map(|_| None),
            SetOp::Delete { set, value } => self.delete(set, value).map(|_| None),
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

    fn modify(&mut self, set: usize, value: u64, insert: bool) -> Result<(), SumSetError> {
        if set >= self.k {
            return Err(SumSetError::NoSuchSet(set));
        }
        if value > self.rmax {
            return Err(SumSetError::OutOfRange { value, rmax: self.rmax });
        }
        let w = self.normalize(set, value);
        let name = (set + 1).to_string();
        if insert && !self.live[set].insert(w) {
            return Err(SumSetError::DuplicateInsert { set: name, value });
        }
        if !insert && !self.live[set].remove(&w) {
            return Err(SumSetError::AbsentDelete { set: name, value });
        }
        let tuples = self.count_tuples(w, set);
        debug_assert!(tuples >= 0);
        if insert {
            self.cnt += tuples as u64;
        } else {
            self.cnt -= tuples as u64;
        }
        let d = self.deltas[set].entry(w).or_insert(0);
        *d += if insert { 1 } else { -1 };
        if *d == 0 {
            self.deltas[set].remove(&w);
        }
        self.pile_len += 1;
        self.tick()
    }

    fn tick(&mut self) -> Result<(), SumSetError> {
        self.ops_since += 1;
        if self.ops_since >= self.cadence {
            self.build_subset_sums()?;
        }
        Ok(())
    }

    /// Tuples over the live sets other than `which` whose values sum to `-w`.
    ///
    /// Each live set is its frozen contents plus its delta, so the count
    /// expands over which coordinates come from the frozen side: frozen
    /// coordinates are answered by one subset-sum lookup and the remaining
    /// ones are enumerated from the deltas.
    pub fn count_tuples(&self, w: i64, which: usize) -> i64 {
        let others: Vec<usize> = (0..self.k).filter(|&j| j != which).collect();
        let mut total = 0;
        for pick in 0..1usize << others.len() {
            let mut frozen = 0usize;
            let mut fresh = Vec::new();
            for (b, &j) in others.iter().enumerate() {
                if pick >> b & 1 == 1 {
                    frozen |= 1 << j;
                } else {
                    fresh.push(j);
                }
            }
            total += self.expand(frozen, &fresh, -w, 1);
        }
        total
    }

    fn expand(&self, frozen: usize, fresh: &[usize], residual: i64, sign: i64) -> i64 {
        match fresh.split_first() {
            None => sign * self.subset_sums[frozen].get(residual) as i64,
            Some((&j, [])) if frozen == 0 => sign * self.deltas[j].get(&residual).copied().unwrap_or(0),
            Some((&j, rest)) => self.deltas[j]
                .iter()
                .map(|(&v, &d)| self.expand(frozen, rest, residual - v, sign * d))
                .sum(),
        }
    }

    /// Recomputes every subset-sum vector from the live sets and clears the deltas.
    pub fn build_subset_sums(&mut self) -> Result<(), SumSetError> {
        let (lo, hi) = Self::range(self.k, self.rmax);
        for mask in 1..1usize << self.k {
            let top = usize::BITS - 1 - mask.leading_zeros();
            let rest = mask & !(1 << top);
            self.subset_sums[mask] = if rest == 0 {
                CountVector::from_values(self.live[top as usize].iter().copied(), lo, hi)
            } else {
                CountVector::sumset(&self.subset_sums[rest], &self.subset_sums[1 << top], lo, hi)?
            };
        }
        for d in &mut self.deltas {
            d.clear();
        }
        self.pile_len = 0;
        self.ops_since = 0;
        self.rebuilds += 1;
        Ok(())
    }

    /// Live contents of set `i`, ascending, in original (non-negated) form.
    pub fn members(&self, set: usize) -> Vec<u64> {
        let mut v: Vec<u64> = self.live[set].iter().map(|&x| x.unsigned_abs()).collect();
        v.sort_unstable();
        v
    }
}
