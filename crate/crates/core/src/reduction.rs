//! Encodes a bounded k-sum trace as a subset-sum trace with a single query
//! target. An item from set `i` becomes `(c + k^i) * rmax + w` (the last set
//! subtracts `w`), with `c = k^(k+1)`. The offsets force any subset hitting
//! the target to take exactly one item from every set.

use thiserror::Error;

use crate::answer::Answer;
use crate::dyn_subset_sum::{DynError, DynSubsetSum};
use crate::k_sum::{KSum, MAX_K, MIN_K};
use crate::three_sum::SumSetError;
use crate::trace::{Mode, Ops, SetOp, SumOp, Trace, TraceHeader};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("k = {0} is outside [3, 6]")]
    Arity(usize),
    #[error("rmax must be at least 1")]
    ZeroBound,
    #[error("k = {k} with rmax = {rmax} does not fit in 63 bits")]
    TooLarge { k: usize, rmax: u64 },
    #[error("set index {0} does not exist")]
    NoSuchSet(usize),
    #[error("value {value} exceeds rmax {rmax}")]
    OutOfRange { value: u64, rmax: u64 },
    #[error("expected a 3sum or ksum trace")]
    NotSetTrace,
    #[error("answer comparison needs an insert/query trace")]
    Deletion,
    #[error(transparent)]
    KSum(#[from] SumSetError),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionParams {
    k: usize,
    rmax: u64,
}

impl ReductionParams {
    pub fn new(k: usize, rmax: u64) -> Result<Self, ReductionError> {
        if !(MIN_K..=MAX_K).contains(&k) {
            return Err(ReductionError::Arity(k));
        }
        if rmax == 0 {
            return Err(ReductionError::ZeroBound);
        }
        let scale = (k as u128).pow(k as u32 + 2) * rmax as u128;
        if scale >= 1 << 62 {
            return Err(ReductionError::TooLarge { k, rmax });
        }
        Ok(Self { k, rmax })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rmax(&self) -> u64 {
        self.rmax
    }

    /// Shared offset `k^(k+1)`.
    pub fn base(&self) -> u64 {
        (self.k as u64).pow(self.k as u32 + 1)
    }

    /// Offset of the 0-based set `set`: `base + k^(set+1)`.
    pub fn offset(&self, set: usize) -> u64 {
        self.base() + (self.k as u64).pow(set as u32 + 1)
    }

    /// The single subset-sum query target; also the subset-sum bound.
    pub fn target(&self) -> u64 {
        (0..self.k).map(|i| self.offset(i)).sum::<u64>() * self.rmax
    }

    pub fn tmax(&self) -> u64 {
        self.target()
    }

    pub fn weight(&self, set: usize, value: u64) -> Result<u64, ReductionError> {
        if set >= self.k {
            return Err(ReductionError::NoSuchSet(set));
        }
        if value > self.rmax {
            return Err(ReductionError::OutOfRange { value, rmax: self.rmax });
        }
        let scaled = self.offset(set) * self.rmax;
        Ok(if set + 1 == self.k { scaled - value } else { scaled + value })
    }

    pub fn reduce_ops(&self, ops: &[SetOp]) -> Result<Vec<SumOp>, ReductionError> {
        ops.iter()
            .map(|op| {
                Ok(match *op {
                    SetOp::Insert { set, value } => SumOp::Insert(self.weight(set, value)?),
                    SetOp::Delete { set, value } => SumOp::Delete(self.weight(set, value)?),
                    SetOp::Query => SumOp::Query(self.target()),
                })
            })
            .collect()
    }
}

/// Reduces a 3sum or ksum trace; returns the subset-sum trace and its `tmax`.
pub fn reduce_trace(trace: &Trace) -> Result<(Trace, u64), ReductionError> {
    let ops = trace.set_ops().ok_or(ReductionError::NotSetTrace)?;
    let k = match trace.header.mode {
        Mode::ThreeSum => 3,
        Mode::KSum => trace.header.k.ok_or(ReductionError::NotSetTrace)?,
        _ => return Err(ReductionError::NotSetTrace),
    };
    let params = ReductionParams::new(k, trace.header.bound)?;
    let reduced = params.reduce_ops(ops)?;
    let mode = if reduced.iter().any(|o| matches!(o, SumOp::Delete(_))) {
        Mode::SubsetSumFull
    } else {
        Mode::SubsetSum
    };
    let header = TraceHeader { mode, bound: params.tmax(), k: None, seed: trace.header.seed };
    Ok((Trace { header, ops: Ops::Sum(reduced) }, params.tmax()))
}

/// Answers from the k-sum engine and from the dynamic subset-sum engine on the
/// reduced trace.
pub fn reduction_answers(
    k: usize,
    rmax: u64,
    ops: &[SetOp],
    seed: u64,
) -> Result<(Vec<Answer>, Vec<Answer>), ReductionError> {
    if ops.iter().any(|o| matches!(o, SetOp::Delete { .. })) {
        return Err(ReductionError::Deletion);
    }
    let params = ReductionParams::new(k, rmax)?;
    let reduced = params.reduce_ops(ops)?;
    let direct = KSum::new(k, rmax)?.run(ops)?;
    let via = DynSubsetSum::new(params.tmax() as usize, seed)?.run(&reduced)?;
    Ok((direct, via))
}

/// Whether both sides of the reduction answer every query identically.
pub fn verify_reduction(k: usize, rmax: u64, ops: &[SetOp], seed: u64) -> Result<bool, ReductionError> {
    let (direct, via) = reduction_answers(k, rmax, ops, seed)?;
    Ok(direct == via)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate_trace, GenSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_set_offsets() {
        let p = ReductionParams::new(3, 10).unwrap();
        assert_eq!(p.base(), 81);
        assert_eq!((0..3).map(|i| p.offset(i)).collect::<Vec<_>>(), vec![84, 90, 108]);
        assert_eq!(p.target(), 2820);
        assert_eq!(p.weight(0, 5).unwrap(), 845);
        assert_eq!(p.weight(2, 5).unwrap(), 1075);
        assert_eq!(p.weight(0, 11).unwrap_err(), ReductionError::OutOfRange { value: 11, rmax: 10 });
    }

    #[test]
    fn parameter_checks() {
        assert_eq!(ReductionParams::new(2, 5).unwrap_err(), ReductionError::Arity(2));
        assert_eq!(ReductionParams::new(3, 0).unwrap_err(), ReductionError::ZeroBound);
        assert!(matches!(ReductionParams::new(6, 1 << 45), Err(ReductionError::TooLarge { .. })));
        for k in 3..=6 {
            for rmax in [1, 7, 30, 1000] {
                let p = ReductionParams::new(k, rmax).unwrap();
                let kk = k as u64;
                assert!(p.tmax() < (kk.pow(k as u32 + 2) + kk.pow(k as u32 + 1)) * rmax);
            }
        }
    }

    #[test]
    fn empty_and_example() {
        assert!(verify_reduction(3, 5, &[], 0).unwrap());
        let ops = [
            SetOp::Insert { set: 0, value: 1 },
            SetOp::Insert { set: 1, value: 2 },
            SetOp::Insert { set: 2, value: 3 },
            SetOp::Query,
            SetOp::Insert { set: 3, value: 6 },
            SetOp::Query,
        ];
        let (direct, via) = reduction_answers(4, 10, &ops, 1).unwrap();
        assert_eq!(direct, vec![Answer::No, Answer::Yes]);
        assert_eq!(via, direct);
    }

    #[test]
    fn random_traces_agree() {
        for k in 3..=4 {
            for seed in 0..25 {
                let mut spec = GenSpec::new(Mode::KSum, 1 + seed % 20, 60, seed);
                spec.k = Some(k);
                spec.query_ratio = 0.3;
                let trace = generate_trace(&spec).unwrap();
                assert!(verify_reduction(k, spec.bound, trace.set_ops().unwrap(), seed).unwrap());
            }
        }
    }

    #[test]
    fn target_subsets_take_one_per_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let k = rng.gen_range(3..=4);
            let rmax = rng.gen_range(1..=6);
            let p = ReductionParams::new(k, rmax).unwrap();
            let items: Vec<(usize, u64)> = (0..14).map(|_| (rng.gen_range(0..k), rng.gen_range(0..=rmax))).collect();
            let weights: Vec<u64> = items.iter().map(|&(s, v)| p.weight(s, v).unwrap()).collect();
            for mask in 0u32..1 << items.len() {
                let sum: u64 = (0..items.len()).filter(|&j| mask >> j & 1 == 1).map(|j| weights[j]).sum();
                if sum == p.target() {
                    let mut per_set = vec![0; k];
                    for j in (0..items.len()).filter(|&j| mask >> j & 1 == 1) {
                        per_set[items[j].0] += 1;
                    }
                    assert!(per_set.iter().all(|&c| c == 1));
                }
            }
        }
    }

    #[test]
    fn trace_level() {
        let text = "mode 3sum\nrmax 10\n+ A 5\n+ C 5\n- C 5\n?\n";
        let trace = crate::trace::parse_trace(text).unwrap();
        let (reduced, tmax) = reduce_trace(&trace).unwrap();
        assert_eq!(tmax, 2820);
        assert_eq!(reduced.header.mode, Mode::SubsetSumFull);
        assert_eq!(
            reduced.sum_ops().unwrap(),
            &[SumOp::Insert(845), SumOp::Insert(1075), SumOp::Delete(1075), SumOp::Query(2820)]
        );
    }
}
