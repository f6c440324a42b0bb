//! Flip detectors: for a shift `alpha`, count and locate the indices `i` with
//! `Y[i] = 0` and `X[i - alpha] = 1`.
//!
//! All indices are 0-based. The count at shift `alpha` is read off one
//! convolution of `X` with `Y` reversed and complemented; locating uses
//! randomly subsampled copies of that convolution plus one extra convolution
//! per bit of the (1-based) answer index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conv::{ConvError, PreparedKernel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlipError {
    #[error("input sequence is empty")]
    Empty,
    #[error("shift {alpha} outside [{lo}, {hi}]")]
    ShiftOutOfRange { alpha: i64, lo: i64, hi: i64 },
    #[error("index {index} outside a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("restricted count is {count}, not 1")]
    NotIsolated { count: i64 },
    #[error("{count} satisfying indices exceed capacity {capacity}")]
    CapacityExceeded { count: u64, capacity: usize },
    #[error("no instance isolates a remaining index at shift {alpha}")]
    DetectionFailed { alpha: i64 },
    #[error(transparent)]
    Conv(#[from] ConvError),
}

/// A 0/1 sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSeq(Vec<bool>);

impl BitSeq {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for BitSeq {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl From<&[u8]> for BitSeq {
    fn from(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }
}

/// Which of the two sequences a flip targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    X,
    Y,
}

/// Number of planes needed to spell every 1-based index of a length-`len` sequence.
pub fn plane_count(len: usize) -> usize {
    (usize::BITS - len.leading_zeros()) as usize
}

/// Instances per basket: `10 * ceil(log2(max(len, 2)))`.
pub fn basket_size(len: usize) -> usize {
    10 * (usize::BITS - (len.max(2) - 1).leading_zeros()) as usize
}

/// Range of shifts a detector answers, plus the machinery to turn a masked
/// `Y` into a vector of per-shift counts.
#[derive(Debug, Clone)]
struct ShiftTable {
    lo: i64,
    hi: i64,
    len_y: usize,
    /// `X` truncated to the prefix that can reach the window.
    kernel: PreparedKernel,
    /// How much of the reversed `Y` is needed.
    rev_len: usize,
}

impl ShiftTable {
    fn new(x: &BitSeq, len_y: usize, lo: i64, hi: i64) -> Result<Self, FlipError> {
        debug_assert!(lo <= hi && hi < len_y as i64 && lo > -(x.len() as i64));
        // Convolution position p = len_y - 1 - alpha; only p <= p_hi matters.
        let p_hi = (len_y as i64 - 1 - lo) as usize;
        let xs: Vec<u64> = x.as_slice()[..x.len().min(p_hi + 1)].iter().map(|&b| b as u64).collect();
        let rev_len = len_y.min(p_hi + 1);
        let kernel = PreparedKernel::new(&xs, rev_len)?;
        Ok(Self { lo, hi, len_y, kernel, rev_len })
    }

    #[inline]
    fn slot(&self, alpha: i64) -> Result<usize, FlipError> {
        if alpha < self.lo || alpha > self.hi {
            return Err(FlipError::ShiftOutOfRange { alpha, lo: self.lo, hi: self.hi });
        }
        Ok((alpha - self.lo) as usize)
    }

    /// Per-shift counts of `i` with `keep(i)`, `Y[i] = 0` and `X[i - alpha] = 1`.
    fn counts(&self, y: &BitSeq, keep: impl Fn(usize) -> bool) -> Result<Vec<u32>, FlipError> {
        let rev: Vec<u64> = (0..self.rev_len)
            .map(|m| {
                let i = self.len_y - 1 - m;
                (!y.get(i) && keep(i)) as u64
            })
            .collect();
        let r = self.kernel.convolve(&rev)?;
        Ok((self.lo..=self.hi)
            .map(|alpha| {
                let p = (self.len_y as i64 - 1 - alpha) as usize;
                r.get(p).copied().unwrap_or(0) as u32
            })
            .collect())
    }
}

#[inline]
fn live_hit(x: &BitSeq, y: &BitSeq, i: usize, alpha: i64) -> bool {
    let j = i as i64 - alpha;
    !y.get(i) && j >= 0 && (j as usize) < x.len() && x.get(j as usize)
}

fn decode(bits: impl Iterator<Item = i64>) -> Option<usize> {
    let mut code = 0usize;
    for (gamma, v) in bits.enumerate() {
        match v {
            0 => {}
            1 => code |= 1 << gamma,
            _ => return None,
        }
    }
    code.checked_sub(1)
}

/// Exact counts for every shift of a fixed pair `(X, Y)`.
#[derive(Debug, Clone)]
pub struct ZeroDetector {
    table: ShiftTable,
    counts: Vec<u32>,
    len_x: usize,
}

impl ZeroDetector {
    /// Preprocess for all shifts in `[1 - |X|, |Y| - 1]`.
    pub fn build(x: &BitSeq, y: &BitSeq) -> Result<Self, FlipError> {
        if x.is_empty() || y.is_empty() {
            return Err(FlipError::Empty);
        }
        let table = ShiftTable::new(x, y.len(), 1 - x.len() as i64, y.len() as i64 - 1)?;
        let counts = table.counts(y, |_| true)?;
        Ok(Self { table, counts, len_x: x.len() })
    }

    pub fn zero_count(&self, alpha: i64) -> Result<u64, FlipError> {
        Ok(self.counts[self.table.slot(alpha)?] as u64)
    }

    pub fn len_x(&self) -> usize {
        self.len_x
    }

    pub fn len_y(&self) -> usize {
        self.table.len_y
    }

    /// Smallest and largest valid shift.
    pub fn shift_range(&self) -> (i64, i64) {
        (self.table.lo, self.table.hi)
    }
}

/// A detector restricted to a subset of `Y` indices that can name the unique
/// satisfying index whenever there is exactly one.
#[derive(Debug, Clone)]
pub struct OneDetector {
    base: ZeroDetector,
    planes: Vec<Vec<u32>>,
    mask: Vec<bool>,
}

impl OneDetector {
    /// `mask[i]` says whether `Y` index `i` takes part.
    pub fn build(x: &BitSeq, y: &BitSeq, mask: Vec<bool>) -> Result<Self, FlipError> {
        if x.is_empty() || y.is_empty() {
            return Err(FlipError::Empty);
        }
        assert_eq!(mask.len(), y.len(), "mask length must match Y");
        let table = ShiftTable::new(x, y.len(), 1 - x.len() as i64, y.len() as i64 - 1)?;
        let counts = table.counts(y, |i| mask[i])?;
        let planes = (0..plane_count(y.len()))
            .map(|g| table.counts(y, |i| mask[i] && (i + 1) >> g & 1 == 1))
            .collect::<Result<_, _>>()?;
        Ok(Self { base: ZeroDetector { table, counts, len_x: x.len() }, planes, mask })
    }

    /// Satisfying indices inside the mask.
    pub fn restricted_count(&self, alpha: i64) -> Result<u64, FlipError> {
        self.base.zero_count(alpha)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }

    /// The unique masked satisfying index; fails unless there is exactly one.
    pub fn one_locate(&self, alpha: i64) -> Result<usize, FlipError> {
        let slot = self.base.table.slot(alpha)?;
        let count = self.base.counts[slot] as i64;
        if count != 1 {
            return Err(FlipError::NotIsolated { count });
        }
        decode(self.planes.iter().map(|p| p[slot] as i64)).ok_or(FlipError::NotIsolated { count })
    }
}

/// When a basket instance switches from bitset lookups to convolution tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TablePolicy {
    /// Build the count and plane tables the first time an instance is used.
    Immediate,
    /// Answer lookups from bitsets until an instance has served this many,
    /// then build its tables.
    AfterLookups(usize),
}

impl TablePolicy {
    /// Lookups after which tables pay for themselves on a length-`len` sequence.
    pub fn for_len(len: usize) -> Self {
        TablePolicy::AfterLookups(256 * (usize::BITS - (2 * len).leading_zeros()) as usize)
    }
}

fn pack(bits: impl Iterator<Item = bool>, len: usize) -> Vec<u64> {
    let mut words = vec![0u64; len.div_ceil(64).max(1)];
    for (i, b) in bits.enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// The 64 bits of `src` starting at bit `start`; bits outside `src` read as 0.
#[inline]
fn window_word(src: &[u64], start: i64) -> u64 {
    let get = |i: i64| if i >= 0 && (i as usize) < src.len() { src[i as usize] } else { 0 };
    let (q, r) = (start.div_euclid(64), start.rem_euclid(64) as u32);
    if r == 0 {
        get(q)
    } else {
        get(q) >> r | get(q + 1) << (64 - r)
    }
}

/// Subsampled instance, created on first use. Its restricted counts and
/// planes are read either from convolution tables or straight off the
/// original sequences.
#[derive(Debug, Clone)]
struct Instance {
    mask: Vec<bool>,
    mask_words: Vec<u64>,
    lookups: usize,
    counts: Option<Vec<u32>>,
    planes: Option<Vec<Vec<u32>>>,
}

/// Counting and locating against sequences that keep changing after
/// preprocessing. Each flip is O(1); queries pay for the flips made since
/// the build.
#[derive(Debug, Clone)]
pub struct KDetectorStar {
    capacity: usize,
    per_basket: usize,
    seed: u64,
    policy: TablePolicy,
    table: ShiftTable,
    counts: Vec<u32>,
    orig_x: BitSeq,
    orig_y: BitSeq,
    x_words: Vec<u64>,
    open_y_words: Vec<u64>,
    plane_words: Vec<Vec<u64>>,
    cur_x: BitSeq,
    cur_y: BitSeq,
    change_log: Vec<(Side, usize, bool)>,
    touched_x: Vec<usize>,
    touched_y: Vec<usize>,
    mark_x: Vec<bool>,
    mark_y: Vec<bool>,
    instances: Vec<Option<Box<Instance>>>,
    built: usize,
    tables: usize,
}

impl KDetectorStar {
    /// Detector over all shifts `[1 - |X|, |Y| - 1]` able to locate up to `k` indices.
    pub fn build(x: BitSeq, y: BitSeq, k: usize, seed: u64) -> Result<Self, FlipError> {
        if x.is_empty() || y.is_empty() {
            return Err(FlipError::Empty);
        }
        let (lo, hi) = (1 - x.len() as i64, y.len() as i64 - 1);
        Self::build_window(x, y, k, seed, lo, hi)
    }

    fn build_window(x: BitSeq, y: BitSeq, k: usize, seed: u64, lo: i64, hi: i64) -> Result<Self, FlipError> {
        if k == 0 {
            return Err(FlipError::ZeroCapacity);
        }
        let table = ShiftTable::new(&x, y.len(), lo, hi)?;
        let counts = table.counts(&y, |_| true)?;
        let per_basket = basket_size(y.len());
        let len_y = y.len();
        Ok(Self {
            capacity: k,
            per_basket,
            seed,
            policy: TablePolicy::for_len(len_y),
            table,
            counts,
            x_words: pack(x.as_slice().iter().copied(), x.len()),
            open_y_words: pack(y.as_slice().iter().map(|&b| !b), len_y),
            plane_words: (0..plane_count(len_y))
                .map(|g| pack((0..len_y).map(|i| (i + 1) >> g & 1 == 1), len_y))
                .collect(),
            mark_x: vec![false; x.len()],
            mark_y: vec![false; len_y],
            cur_x: x.clone(),
            cur_y: y.clone(),
            orig_x: x,
            orig_y: y,
            change_log: Vec::new(),
            touched_x: Vec::new(),
            touched_y: Vec::new(),
            instances: vec![None; k * per_basket],
            built: 0,
            tables: 0,
        })
    }

    pub fn with_policy(mut self, policy: TablePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> TablePolicy {
        self.policy
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Instances per basket.
    pub fn basket_len(&self) -> usize {
        self.per_basket
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shift_range(&self) -> (i64, i64) {
        (self.table.lo, self.table.hi)
    }

    pub fn live(&self, side: Side) -> &BitSeq {
        match side {
            Side::X => &self.cur_x,
            Side::Y => &self.cur_y,
        }
    }

    pub fn change_log(&self) -> &[(Side, usize, bool)] {
        &self.change_log
    }

    /// How many basket instances have been created so far.
    pub fn materialized(&self) -> usize {
        self.built
    }

    /// How many instances have convolution tables.
    pub fn tabulated(&self) -> usize {
        self.tables
    }

    /// Inclusion mask of instance `slot` in basket `basket` (1-based basket).
    /// Each `Y` index is kept independently with probability `1 / basket`.
    pub fn inclusion_mask(&self, basket: usize, slot: usize) -> Vec<bool> {
        assert!((1..=self.capacity).contains(&basket) && slot < self.per_basket);
        let len = self.orig_y.len();
        if basket == 1 {
            return vec![true; len];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((basket - 1) * self.per_basket + slot) as u64);
        (0..len).map(|_| rng.gen_range(0..basket) == 0).collect()
    }

    pub fn apply_flip(&mut self, side: Side, index: usize) -> Result<(), FlipError> {
        let (seq, mark, touched) = match side {
            Side::X => (&mut self.cur_x, &mut self.mark_x, &mut self.touched_x),
            Side::Y => (&mut self.cur_y, &mut self.mark_y, &mut self.touched_y),
        };
        if index >= seq.len() {
            return Err(FlipError::IndexOutOfRange { index, len: seq.len() });
        }
        seq.flip(index);
        if !mark[index] {
            mark[index] = true;
            touched.push(index);
        }
        self.change_log.push((side, index, seq.get(index)));
        Ok(())
    }

    /// `(i, now - then)` for every `Y` index whose condition may have changed.
    fn deltas(&self, alpha: i64) -> Vec<(usize, i32)> {
        let len_y = self.cur_y.len() as i64;
        let mut out = Vec::new();
        let mut visit = |i: usize| {
            let d = live_hit(&self.cur_x, &self.cur_y, i, alpha) as i32
                - live_hit(&self.orig_x, &self.orig_y, i, alpha) as i32;
            if d != 0 {
                out.push((i, d));
            }
        };
        for &i in &self.touched_y {
            visit(i);
        }
        for &j in &self.touched_x {
            let i = j as i64 + alpha;
            if (0..len_y).contains(&i) && !self.mark_y[i as usize] {
                visit(i as usize);
            }
        }
        out
    }

    /// Exact number of live satisfying indices at `alpha`.
    pub fn k_count(&self, alpha: i64) -> Result<u64, FlipError> {
        let slot = self.table.slot(alpha)?;
        let fix: i64 = self.deltas(alpha).iter().map(|&(_, d)| d as i64).sum();
        Ok((self.counts[slot] as i64 + fix) as u64)
    }

    /// Satisfying indices of the original sequences at `alpha`, as a bitset over `Y`.
    fn original_hits(&self, alpha: i64) -> Vec<u64> {
        self.open_y_words
            .iter()
            .enumerate()
            .map(|(wi, &open)| open & window_word(&self.x_words, wi as i64 * 64 - alpha))
            .collect()
    }

    fn instance(&mut self, basket: usize, slot: usize) -> usize {
        // Basket 1 keeps every index, so all of its instances coincide.
        let slot = if basket == 1 { 0 } else { slot };
        let id = (basket - 1) * self.per_basket + slot;
        if self.instances[id].is_none() {
            let mask = self.inclusion_mask(basket, slot);
            let mask_words = pack(mask.iter().copied(), mask.len());
            self.instances[id] =
                Some(Box::new(Instance { mask, mask_words, lookups: 0, counts: None, planes: None }));
            self.built += 1;
        }
        id
    }

    /// Counts of the original sequences restricted to instance `id`'s mask,
    /// then to each plane, at table position `pos`.
    fn original_counts(&mut self, id: usize, pos: usize, hits: &[u64], with_planes: bool) -> Result<(i64, Vec<i64>), FlipError> {
        let inst = self.instances[id].as_mut().expect("instance exists");
        inst.lookups += 1;
        let due = match self.policy {
            TablePolicy::Immediate => true,
            TablePolicy::AfterLookups(n) => inst.lookups > n,
        };
        if due && inst.counts.is_none() {
            let mask = &inst.mask;
            inst.counts = Some(self.table.counts(&self.orig_y, |i| mask[i])?);
            self.tables += 1;
        }
        if due && with_planes && inst.planes.is_none() {
            let mask = &inst.mask;
            let planes = (0..plane_count(self.orig_y.len()))
                .map(|g| self.table.counts(&self.orig_y, |i| mask[i] && (i + 1) >> g & 1 == 1))
                .collect::<Result<Vec<_>, _>>()?;
            inst.planes = Some(planes);
        }
        let inst = self.instances[id].as_ref().unwrap();
        let masked = || inst.mask_words.iter().zip(hits).map(|(m, h)| m & h);
        let count = match &inst.counts {
            Some(c) => c[pos] as i64,
            None => masked().map(|w| w.count_ones() as i64).sum(),
        };
        if !with_planes {
            return Ok((count, Vec::new()));
        }
        let planes = match &inst.planes {
            Some(p) => p.iter().map(|plane| plane[pos] as i64).collect(),
            None => self
                .plane_words
                .iter()
                .map(|bits| masked().zip(bits).map(|(w, b)| (w & b).count_ones() as i64).sum())
                .collect(),
        };
        Ok((count, planes))
    }

    /// Every live satisfying index at `alpha`, ascending. Requires the count
    /// to be at most the capacity. Each reported index is checked against the
    /// live sequences; anything inconsistent surfaces as `DetectionFailed`.
    pub fn k_locate_all(&mut self, alpha: i64) -> Result<Vec<usize>, FlipError> {
        let pos = self.table.slot(alpha)?;
        let deltas = self.deltas(alpha);
        let total = (self.counts[pos] as i64 + deltas.iter().map(|&(_, d)| d as i64).sum::<i64>()) as u64;
        if total > self.capacity as u64 {
            return Err(FlipError::CapacityExceeded { count: total, capacity: self.capacity });
        }
        if total == 0 {
            return Ok(Vec::new());
        }
        let hits = self.original_hits(alpha);
        let mut found: Vec<usize> = Vec::with_capacity(total as usize);
        for remaining in (1..=total as usize).rev() {
            let mut hit = None;
            let tries = if remaining == 1 { 1 } else { self.per_basket };
            for slot in 0..tries {
                let id = self.instance(remaining, slot);
                let (count, _) = self.original_counts(id, pos, &hits, false)?;
                let mask = &self.instances[id].as_ref().unwrap().mask;
                let restricted = count
                    + deltas.iter().filter(|&&(i, _)| mask[i]).map(|&(_, d)| d as i64).sum::<i64>()
                    - found.iter().filter(|&&s| mask[s]).count() as i64;
                if restricted != 1 {
                    continue;
                }
                let (_, planes) = self.original_counts(id, pos, &hits, true)?;
                let mask = &self.instances[id].as_ref().unwrap().mask;
                let bits = planes.iter().enumerate().map(|(g, &plane)| {
                    let on = |i: usize| mask[i] && (i + 1) >> g & 1 == 1;
                    plane + deltas.iter().filter(|&&(i, _)| on(i)).map(|&(_, d)| d as i64).sum::<i64>()
                        - found.iter().filter(|&&s| on(s)).count() as i64
                });
                hit = Some(
                    decode(bits)
                        .filter(|&s| {
                            s < self.cur_y.len()
                                && mask[s]
                                && live_hit(&self.cur_x, &self.cur_y, s, alpha)
                                && !found.contains(&s)
                        })
                        .ok_or(FlipError::DetectionFailed { alpha })?,
                );
                break;
            }
            found.push(hit.ok_or(FlipError::DetectionFailed { alpha })?);
        }
        found.sort_unstable();
        Ok(found)
    }
}

/// Detector for the single-sequence condition `Z[i] = 0`, `Z[i - alpha] = 1`
/// over shifts `alpha` in `[0, |Z| - 1]`.
#[derive(Debug, Clone)]
pub struct FlipDetectorStar {
    inner: KDetectorStar,
}

impl FlipDetectorStar {
    pub fn build(z: BitSeq, k: usize, seed: u64) -> Result<Self, FlipError> {
        if z.is_empty() {
            return Err(FlipError::Empty);
        }
        // Shift 0 is answered directly, so the tables start at 1.
        let len = z.len() as i64;
        let lo = if len > 1 { 1 } else { 0 };
        let inner = KDetectorStar::build_window(z.clone(), z, k, seed, lo, len - 1)?;
        Ok(Self { inner })
    }

    pub fn len(&self) -> usize {
        self.inner.cur_y.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn capacity(&self) -> usize {
        self.inner.capacity
    }

    pub fn live(&self) -> &BitSeq {
        &self.inner.cur_y
    }

    pub fn inner(&self) -> &KDetectorStar {
        &self.inner
    }

    pub fn with_policy(mut self, policy: TablePolicy) -> Self {
        self.inner.policy = policy;
        self
    }

    pub fn materialized(&self) -> usize {
        self.inner.built
    }

    fn check(&self, alpha: i64) -> Result<bool, FlipError> {
        let hi = self.len() as i64 - 1;
        if !(0..=hi).contains(&alpha) {
            return Err(FlipError::ShiftOutOfRange { alpha, lo: 0, hi });
        }
        Ok(alpha == 0)
    }

    pub fn star_count(&self, alpha: i64) -> Result<u64, FlipError> {
        if self.check(alpha)? {
            return Ok(0);
        }
        self.inner.k_count(alpha)
    }

    pub fn star_locate(&mut self, alpha: i64) -> Result<Vec<usize>, FlipError> {
        if self.check(alpha)? {
            return Ok(Vec::new());
        }
        self.inner.k_locate_all(alpha)
    }

    pub fn star_flip(&mut self, i: usize) -> Result<(), FlipError> {
        self.inner.apply_flip(Side::X, i)?;
        self.inner.apply_flip(Side::Y, i)
    }
}
