//! Online insert/query subset sum over targets `[0, tmax]`.
//!
//! Inserting weight `w` must set every `i` with `A[i] = 0` and `A[i - w] = 1`.
//! While the operation count is small that set is found by a word-parallel
//! scan. Later a flip detector over `A` names the new positions directly when
//! there are at most `k` of them, and is rebuilt after enough flips. The
//! operation-count estimate doubles whenever it is reached, and the whole
//! history is then replayed under the new parameters.

use std::collections::HashMap;

use thiserror::Error;

use crate::answer::Answer;
use crate::bitmap::SolutionBitmap;
use crate::flip::{BitSeq, FlipDetectorStar, FlipError};
use crate::trace::SumOp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynError {
    #[error("tmax must be at least 1")]
    ZeroBound,
    #[error("weight {w} exceeds tmax {tmax}")]
    WeightTooLarge { w: u64, tmax: usize },
    #[error("target {t} exceeds tmax {tmax}")]
    TargetTooLarge { t: u64, tmax: usize },
    #[error("deletions are not supported")]
    Deletion,
    #[error(transparent)]
    Detector(#[from] FlipError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    Naive,
    Detector,
}

/// Counters describing the work an engine has done.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DynStats {
    /// Flip-triggered detector rebuilds in the current epoch.
    pub epoch_rebuilds: usize,
    /// Times the operation estimate doubled.
    pub doublings: usize,
    /// Every detector construction, across all epochs.
    pub detector_builds: usize,
    /// Inserts answered through the detector's locate path.
    pub located: usize,
    /// Inserts whose new positions were found by a full scan in detector mode.
    pub scans: usize,
    /// Scans caused by a failed locate.
    pub fallbacks: usize,
    /// Bits flipped in `A` in the current epoch.
    pub flips: usize,
}

/// Smallest `c` with `c^3 >= tmax^2`.
pub fn cube_root_squared(tmax: usize) -> usize {
    let target = (tmax as u128).pow(2);
    let mut c = (target as f64).cbrt() as u128;
    while c.pow(3) < target {
        c += 1;
    }
    while c > 0 && (c - 1).pow(3) >= target {
        c -= 1;
    }
    c as usize
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct DynSubsetSum {
    tmax: usize,
    seed: u64,
    reach: SolutionBitmap,
    detector: Option<FlipDetectorStar>,
    oprs_hat: usize,
    history: Vec<SumOp>,
    weight_counts: HashMap<u64, usize>,
    edit_count: usize,
    k: usize,
    threshold: usize,
    mode: EngineMode,
    epoch_seed: u64,
    stats: DynStats,
}

impl DynSubsetSum {
    pub fn new(tmax: usize, seed: u64) -> Result<Self, DynError> {
        if tmax == 0 {
            return Err(DynError::ZeroBound);
        }
        let mut engine = Self {
            tmax,
            seed,
            reach: SolutionBitmap::new(tmax),
            detector: None,
            oprs_hat: 1,
            history: Vec::new(),
            weight_counts: HashMap::new(),
            edit_count: 0,
            k: 1,
            threshold: 1,
            mode: EngineMode::Naive,
            epoch_seed: 0,
            stats: DynStats::default(),
        };
        engine.reset()?;
        Ok(engine)
    }

    pub fn tmax(&self) -> usize {
        self.tmax
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    pub fn oprs_hat(&self) -> usize {
        self.oprs_hat
    }

    /// Locate capacity of the detector.
    pub fn capacity(&self) -> usize {
        self.k
    }

    pub fn rebuild_threshold(&self) -> usize {
        self.threshold
    }

    pub fn stats(&self) -> DynStats {
        self.stats
    }

    /// Rebuilds in the current epoch plus doublings.
    pub fn rebuilds(&self) -> usize {
        self.stats.epoch_rebuilds + self.stats.doublings
    }

    pub fn reachable_count(&self) -> usize {
        self.reach.count_ones()
    }

    pub fn reachable(&self) -> &SolutionBitmap {
        &self.reach
    }

    pub fn insert(&mut self, w: u64) -> Result<(), DynError> {
        if w > self.tmax as u64 {
            return Err(DynError::WeightTooLarge { w, tmax: self.tmax });
        }
        self.history.push(SumOp::Insert(w));
        self.absorb(w)?;
        self.after_op()
    }

    pub fn query(&mut self, t: u64) -> Result<Answer, DynError> {
        if t > self.tmax as u64 {
            return Err(DynError::TargetTooLarge { t, tmax: self.tmax });
        }
        self.history.push(SumOp::Query(t));
        let answer = Answer::from(self.reach.get(t as usize));
        self.after_op()?;
        Ok(answer)
    }

    /// Feeds a whole operation list, returning the answers to its queries.
    pub fn run(&mut self, ops: &[SumOp]) -> Result<Vec<Answer>, DynError> {
        let mut answers = Vec::new();
        for op in ops {
            match *op {
                SumOp::Insert(w) => self.insert(w)?,
                SumOp::Query(t) => answers.push(self.query(t)?),
                SumOp::Delete(_) => return Err(DynError::Deletion),
            }
        }
        Ok(answers)
    }

    fn after_op(&mut self) -> Result<(), DynError> {
        if self.history.len() < self.oprs_hat {
            return Ok(());
        }
        self.oprs_hat *= 2;
        self.stats.doublings += 1;
        self.reset()?;
        let history = std::mem::take(&mut self.history);
        for op in &history {
            if let SumOp::Insert(w) = *op {
                self.absorb(w)?;
            }
        }
        self.history = history;
        Ok(())
    }

    fn reset(&mut self) -> Result<(), DynError> {
        let t23 = cube_root_squared(self.tmax);
        self.reach = SolutionBitmap::new(self.tmax);
        self.weight_counts.clear();
        self.edit_count = 0;
        self.epoch_seed = mix(self.seed, self.oprs_hat as u64);
        self.stats = DynStats { doublings: self.stats.doublings, detector_builds: self.stats.detector_builds, ..DynStats::default() };
        self.detector = None;
        if self.oprs_hat < t23 {
            self.mode = EngineMode::Naive;
            return Ok(());
        }
        // With delta = oprs_hat / t23 the capacity and rebuild period reduce
        // to tmax / t23 and t23.
        self.mode = EngineMode::Detector;
        self.k = self.tmax.div_ceil(t23).max(1);
        self.threshold = t23.max(1);
        self.build_detector()
    }

    fn build_detector(&mut self) -> Result<(), DynError> {
        let z = BitSeq::new(self.reach.to_bools());
        let seed = mix(self.epoch_seed, self.stats.epoch_rebuilds as u64);
        self.detector = Some(FlipDetectorStar::build(z, self.k, seed)?);
        self.stats.detector_builds += 1;
        self.edit_count = 0;
        Ok(())
    }

    fn absorb(&mut self, w: u64) -> Result<(), DynError> {
        if w == 0 {
            return Ok(());
        }
        let used = self.weight_counts.entry(w).or_insert(0);
        if *used >= self.tmax / w as usize {
            return Ok(());
        }
        *used += 1;
        let w = w as usize;
        let Some(det) = self.detector.as_mut() else {
            self.stats.flips += self.reach.absorb(w);
            return Ok(());
        };
        let count = det.star_count(w as i64)?;
        if count == 0 {
            return Ok(());
        }
        let gains = if count as usize <= self.k {
            match det.star_locate(w as i64) {
                Ok(found) => {
                    self.stats.located += 1;
                    found
                }
                Err(FlipError::DetectionFailed { .. }) => {
                    self.stats.fallbacks += 1;
                    self.stats.scans += 1;
                    self.reach.gains(w)
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            self.stats.scans += 1;
            self.reach.gains(w)
        };
        for &i in &gains {
            self.reach.set(i);
            det.star_flip(i)?;
        }
        self.edit_count += gains.len();
        self.stats.flips += gains.len();
        if self.edit_count > self.threshold {
            self.stats.epoch_rebuilds += 1;
            self.build_detector()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{naive_subset_sum_trace, reachable_sums};
    use crate::trace::{generate_trace, GenSpec, Mode};

    #[test]
    fn fresh_engine() {
        let mut e = DynSubsetSum::new(10, 0).unwrap();
        assert_eq!(e.reachable_count(), 1);
        assert_eq!(e.query(0).unwrap(), Answer::Yes);
        assert_eq!(e.query(1).unwrap(), Answer::No);
        assert_eq!(DynSubsetSum::new(0, 0).unwrap_err(), DynError::ZeroBound);
        assert_eq!(e.query(11).unwrap_err(), DynError::TargetTooLarge { t: 11, tmax: 10 });
        assert_eq!(e.insert(11).unwrap_err(), DynError::WeightTooLarge { w: 11, tmax: 10 });
    }

    #[test]
    fn small_examples() {
        let mut e = DynSubsetSum::new(10, 1).unwrap();
        e.insert(3).unwrap();
        e.insert(5).unwrap();
        assert_eq!(e.query(8).unwrap(), Answer::Yes);
        assert_eq!(e.query(4).unwrap(), Answer::No);
        assert_eq!(e.query(3).unwrap(), Answer::Yes);

        let mut e = DynSubsetSum::new(20, 1).unwrap();
        for w in [3, 5, 7] {
            e.insert(w).unwrap();
        }
        assert_eq!(e.query(15).unwrap(), Answer::Yes);
        let mut e = DynSubsetSum::new(20, 1).unwrap();
        e.insert(4).unwrap();
        e.insert(6).unwrap();
        assert_eq!(e.query(5).unwrap(), Answer::No);

        let mut e = DynSubsetSum::new(3, 0).unwrap();
        e.insert(1).unwrap();
        assert_eq!(e.reachable_count(), 2);
        e.insert(2).unwrap();
        assert_eq!(e.reachable_count(), 4);

        let mut e = DynSubsetSum::new(9, 0).unwrap();
        e.insert(9).unwrap();
        assert_eq!(e.query(9).unwrap(), Answer::Yes);
    }

    #[test]
    fn repeated_weight_is_capped() {
        let mut capped = DynSubsetSum::new(6, 0).unwrap();
        let mut exact = DynSubsetSum::new(6, 0).unwrap();
        for _ in 0..10 {
            capped.insert(2).unwrap();
        }
        for _ in 0..3 {
            exact.insert(2).unwrap();
        }
        assert_eq!(capped.reachable(), exact.reachable());
    }

    #[test]
    fn zero_weight_is_a_no_op() {
        let mut e = DynSubsetSum::new(5, 0).unwrap();
        e.insert(0).unwrap();
        assert_eq!(e.reachable_count(), 1);
    }

    #[test]
    fn cube_root_squared_is_exact_ceiling() {
        assert_eq!(cube_root_squared(1), 1);
        assert_eq!(cube_root_squared(8), 4);
        assert_eq!(cube_root_squared(9), 5);
        assert_eq!(cube_root_squared(1 << 15), 1024);
        assert_eq!(cube_root_squared(1000), 100);
        assert_eq!(cube_root_squared(1001), 101);
    }

    #[test]
    fn matches_oracle_after_every_op() {
        for seed in 0..40u64 {
            let tmax = [8, 17, 64, 100, 128][seed as usize % 5];
            let mut spec = GenSpec::new(Mode::SubsetSum, tmax, 300, seed);
            spec.query_ratio = 0.3;
            let trace = generate_trace(&spec).unwrap();
            let mut e = DynSubsetSum::new(tmax as usize, seed).unwrap();
            let mut items = Vec::new();
            let mut last = 1;
            for op in trace.sum_ops().unwrap() {
                match *op {
                    SumOp::Insert(w) => {
                        e.insert(w).unwrap();
                        items.push(w);
                    }
                    SumOp::Query(t) => {
                        e.query(t).unwrap();
                    }
                    SumOp::Delete(_) => unreachable!(),
                }
                assert_eq!(e.reachable().to_bools(), reachable_sums(&items, tmax as usize));
                assert!(e.reachable_count() >= last);
                last = e.reachable_count();
            }
        }
    }

    #[test]
    fn detector_mode_is_exercised_and_exact() {
        let tmax = 4096;
        let mut spec = GenSpec::new(Mode::SubsetSum, tmax, 3000, 8);
        spec.query_ratio = 0.2;
        let trace = generate_trace(&spec).unwrap();
        let mut e = DynSubsetSum::new(tmax as usize, 8).unwrap();
        let answers = e.run(trace.sum_ops().unwrap()).unwrap();
        assert_eq!(e.mode(), EngineMode::Detector);
        assert!(e.stats().located > 0, "{:?}", e.stats());
        assert_eq!(answers, naive_subset_sum_trace(trace.sum_ops().unwrap(), tmax));
    }

    #[test]
    fn replay_is_deterministic() {
        let spec = GenSpec::new(Mode::SubsetSum, 512, 1500, 3);
        let trace = generate_trace(&spec).unwrap();
        let run = || {
            let mut e = DynSubsetSum::new(512, 99).unwrap();
            let a = e.run(trace.sum_ops().unwrap()).unwrap();
            (a, e.stats())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rebuilds_stay_bounded() {
        let tmax = 2048usize;
        let spec = GenSpec::new(Mode::SubsetSum, tmax as u64, 4096, 4);
        let trace = generate_trace(&spec).unwrap();
        let mut e = DynSubsetSum::new(tmax, 4).unwrap();
        e.run(trace.sum_ops().unwrap()).unwrap();
        let per_epoch = tmax.div_ceil(e.rebuild_threshold());
        assert!(e.stats().epoch_rebuilds <= per_epoch);
        assert_eq!(e.stats().doublings, 13);
    }

    #[test]
    fn deletions_rejected() {
        let mut e = DynSubsetSum::new(5, 0).unwrap();
        assert_eq!(e.run(&[SumOp::Delete(1)]).unwrap_err(), DynError::Deletion);
    }
}
