//! Exact convolution of nonnegative integer sequences.
//!
//! Short inputs go through a checked schoolbook loop. Longer inputs use a
//! number-theoretic transform over one of two primes, picked from an a-priori
//! bound on the output entries:
//!
//! * `998_244_353` when every output entry is provably below it, and
//! * the 64-bit prime `2^64 - 2^32 + 1` when the bound is below `2^62`.
//!
//! Anything larger is rejected with [`ConvError::Overflow`]; results never wrap.

use thiserror::Error;

/// Inputs where either side is shorter than this use the schoolbook loop.
pub const SCHOOLBOOK_CUTOFF: usize = 64;

/// Largest output entry the engine will produce.
pub const MAX_ENTRY: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConvError {
    #[error("convolution entries may reach {bound}, above the exact limit 2^62")]
    Overflow { bound: u128 },
    #[error("integer sequence must have at least one entry")]
    Empty,
}

/// A dense run of counts; entry `j` counts occurrences of the value `offset + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSeq {
    values: Vec<u64>,
    offset: i64,
}

impl IntSeq {
    pub fn new(values: Vec<u64>, offset: i64) -> Result<Self, ConvError> {
        if values.is_empty() {
            return Err(ConvError::Empty);
        }
        Ok(Self { values, offset })
    }

    /// Sequence starting at value 0.
    pub fn from_values(values: Vec<u64>) -> Result<Self, ConvError> {
        Self::new(values, 0)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Count stored for `value`, zero outside the represented range.
    pub fn get(&self, value: i64) -> u64 {
        let idx = value - self.offset;
        if idx < 0 {
            return 0;
        }
        self.values.get(idx as usize).copied().unwrap_or(0)
    }

    pub fn sum(&self) -> u128 {
        self.values.iter().map(|&v| v as u128).sum()
    }
}

/// Upper bound on every entry of `a * b`.
fn entry_bound(a: &[u64], b: &[u64]) -> u128 {
    let sum = |s: &[u64]| s.iter().map(|&v| v as u128).sum::<u128>();
    let max = |s: &[u64]| s.iter().copied().max().unwrap_or(0) as u128;
    (sum(a) * max(b)).min(sum(b) * max(a))
}

/// Exact linear convolution: `out[k] = sum_j a[j] * b[k - j]`, offsets add.
pub fn convolve(a: &IntSeq, b: &IntSeq) -> Result<IntSeq, ConvError> {
    let values = convolve_slices(&a.values, &b.values)?;
    Ok(IntSeq {
        values,
        offset: a.offset + b.offset,
    })
}

/// Slice form of [`convolve`]; both inputs must be nonempty.
pub fn convolve_slices(a: &[u64], b: &[u64]) -> Result<Vec<u64>, ConvError> {
    if a.is_empty() || b.is_empty() {
        return Err(ConvError::Empty);
    }
    let bound = entry_bound(a, b);
    if bound >= MAX_ENTRY as u128 {
        return Err(ConvError::Overflow { bound });
    }
    if a.len().min(b.len()) < SCHOOLBOOK_CUTOFF {
        return Ok(schoolbook(a, b));
    }
    if bound < Small::P as u128 {
        Ok(ntt_convolve::<Small>(a, b))
    } else {
        Ok(ntt_convolve::<Goldilocks>(a, b))
    }
}

fn schoolbook(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            // The entry bound was checked by the caller, so this cannot overflow.
            out[i + j] += x * y;
        }
    }
    out
}

/// A fixed left operand whose transform is reused across many convolutions.
///
/// Only sequences with small entries benefit; right operands that would push
/// the output past the small prime fall back to [`convolve_slices`].
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    raw: Vec<u64>,
    sum: u128,
    max: u128,
    other_len: usize,
    size: usize,
    transformed: Vec<u64>,
}

impl PreparedKernel {
    /// Prepare `kernel` for convolution against right operands of length `other_len`.
    pub fn new(kernel: &[u64], other_len: usize) -> Result<Self, ConvError> {
        if kernel.is_empty() || other_len == 0 {
            return Err(ConvError::Empty);
        }
        let size = (kernel.len() + other_len - 1).next_power_of_two();
        let mut transformed = vec![0u64; size];
        for (dst, &v) in transformed.iter_mut().zip(kernel) {
            *dst = v % Small::P;
        }
        ntt::<Small>(&mut transformed, false);
        Ok(Self {
            raw: kernel.to_vec(),
            sum: kernel.iter().map(|&v| v as u128).sum(),
            max: kernel.iter().copied().max().unwrap_or(0) as u128,
            other_len,
            size,
            transformed,
        })
    }

    pub fn kernel(&self) -> &[u64] {
        &self.raw
    }

    /// `kernel * other`, exactly as [`convolve_slices`] would compute it.
    pub fn convolve(&self, other: &[u64]) -> Result<Vec<u64>, ConvError> {
        if other.len() != self.other_len || self.raw.len().min(other.len()) < SCHOOLBOOK_CUTOFF {
            return convolve_slices(&self.raw, other);
        }
        let osum: u128 = other.iter().map(|&v| v as u128).sum();
        let omax = other.iter().copied().max().unwrap_or(0) as u128;
        let bound = (self.sum * omax).min(osum * self.max);
        if bound >= Small::P as u128 {
            return convolve_slices(&self.raw, other);
        }
        let mut fb = vec![0u64; self.size];
        fb[..other.len()].copy_from_slice(other);
        ntt::<Small>(&mut fb, false);
        for (x, &y) in fb.iter_mut().zip(&self.transformed) {
            *x = Small::mul(*x, y);
        }
        ntt::<Small>(&mut fb, true);
        fb.truncate(self.raw.len() + other.len() - 1);
        Ok(fb)
    }
}

trait PrimeField {
    const P: u64;
    const GENERATOR: u64;
    fn mul(a: u64, b: u64) -> u64;

    #[inline]
    fn add(a: u64, b: u64) -> u64 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= Self::P {
            s.wrapping_sub(Self::P)
        } else {
            s
        }
    }

    #[inline]
    fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(Self::P)
        }
    }

    fn pow(mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = Self::mul(acc, base);
            }
            base = Self::mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

struct Small;

impl PrimeField for Small {
    const P: u64 = 998_244_353;
    const GENERATOR: u64 = 3;

    #[inline]
    fn mul(a: u64, b: u64) -> u64 {
        a * b % Self::P
    }
}

struct Goldilocks;

impl Goldilocks {
    const EPSILON: u64 = 0xFFFF_FFFF;
}

impl PrimeField for Goldilocks {
    const P: u64 = 0xFFFF_FFFF_0000_0001;
    const GENERATOR: u64 = 7;

    #[inline]
    fn mul(a: u64, b: u64) -> u64 {
        // 2^64 = 2^32 - 1 and 2^96 = -1 modulo P.
        let x = a as u128 * b as u128;
        let lo = x as u64;
        let hi = (x >> 64) as u64;
        let hi_hi = hi >> 32;
        let hi_lo = hi & Self::EPSILON;
        let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
        if borrow {
            t0 = t0.wrapping_sub(Self::EPSILON);
        }
        let t1 = hi_lo * Self::EPSILON;
        let (mut res, carry) = t0.overflowing_add(t1);
        if carry {
            res = res.wrapping_add(Self::EPSILON);
        }
        if res >= Self::P {
            res - Self::P
        } else {
            res
        }
    }
}

fn ntt_convolve<F: PrimeField>(a: &[u64], b: &[u64]) -> Vec<u64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    for (d, &v) in fa.iter_mut().zip(a) {
        *d = v % F::P;
    }
    for (d, &v) in fb.iter_mut().zip(b) {
        *d = v % F::P;
    }
    ntt::<F>(&mut fa, false);
    ntt::<F>(&mut fb, false);
    for (x, &y) in fa.iter_mut().zip(&fb) {
        *x = F::mul(*x, y);
    }
    ntt::<F>(&mut fa, true);
    fa.truncate(out_len);
    fa
}

/// In-place iterative radix-2 transform; `values.len()` must be a power of two.
fn ntt<F: PrimeField>(values: &mut [u64], inverse: bool) {
    let n = values.len();
    if n <= 1 {
        return;
    }
    debug_assert!(n.is_power_of_two());
    let log_n = n.trailing_zeros();

    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - log_n);
        if i < j {
            values.swap(i, j);
        }
    }

    let mut root = F::pow(F::GENERATOR, (F::P - 1) / n as u64);
    if inverse {
        root = F::pow(root, F::P - 2);
    }
    // twiddles[j] = root^j for j < n/2; stage with half-length h reads every (n/2h)-th.
    let half = n / 2;
    let mut twiddles = Vec::with_capacity(half);
    let mut w = 1u64;
    for _ in 0..half {
        twiddles.push(w);
        w = F::mul(w, root);
    }

    let mut len = 2;
    while len <= n {
        let h = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for j in 0..h {
                let u = values[start + j];
                let v = F::mul(values[start + j + h], twiddles[j * step]);
                values[start + j] = F::add(u, v);
                values[start + j + h] = F::sub(u, v);
            }
        }
        len <<= 1;
    }

    if inverse {
        let n_inv = F::pow(n as u64 % F::P, F::P - 2);
        for v in values.iter_mut() {
            *v = F::mul(*v, n_inv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for i in 0..a.len() {
            for j in 0..b.len() {
                out[i + j] += a[i] * b[j];
            }
        }
        out
    }

    fn seq(v: &[u64], off: i64) -> IntSeq {
        IntSeq::new(v.to_vec(), off).unwrap()
    }

    #[test]
    fn identity_element() {
        let out = convolve(&seq(&[1], 0), &seq(&[3, 0, 2], 0)).unwrap();
        assert_eq!(out.values(), &[3, 0, 2]);
        assert_eq!(out.offset(), 0);
    }

    #[test]
    fn small_examples() {
        let out = convolve(&seq(&[1, 1], 0), &seq(&[1, 0, 1], 0)).unwrap();
        assert_eq!(out.values(), &[1, 1, 1, 1]);

        let out = convolve(&seq(&[2, 3], -1), &seq(&[1, 1], 5)).unwrap();
        assert_eq!(out.values(), &[2, 5, 3]);
        assert_eq!(out.offset(), 4);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(IntSeq::new(vec![], 0), Err(ConvError::Empty));
        assert_eq!(convolve_slices(&[], &[1]), Err(ConvError::Empty));
    }

    #[test]
    fn overflow_is_reported() {
        let big = vec![1u64 << 40; 100];
        let err = convolve_slices(&big, &big).unwrap_err();
        assert!(matches!(err, ConvError::Overflow { .. }));
    }

    #[test]
    fn ntt_paths_match_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(la, lb, max) in &[(100usize, 130usize, 1u64), (300, 257, 50), (129, 64, 1 << 20), (70, 200, 1 << 25)] {
            let a: Vec<u64> = (0..la).map(|_| rng.gen_range(0..=max)).collect();
            let b: Vec<u64> = (0..lb).map(|_| rng.gen_range(0..=max)).collect();
            assert_eq!(convolve_slices(&a, &b).unwrap(), naive(&a, &b), "{la} {lb} {max}");
        }
    }

    #[test]
    fn goldilocks_near_limit() {
        // bound just under 2^62 forces the 64-bit prime.
        let a = vec![1u64 << 28; 64];
        let b = vec![1u64 << 27; 64];
        let out = convolve_slices(&a, &b).unwrap();
        assert_eq!(out, naive(&a, &b));
        assert_eq!(out[63], 64u64 << 55);
    }

    #[test]
    fn random_against_double_loop_1000_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let la = rng.gen_range(1..=64);
            let lb = rng.gen_range(1..=64);
            let a: Vec<u64> = (0..la).map(|_| rng.gen_range(0..=10)).collect();
            let b: Vec<u64> = (0..lb).map(|_| rng.gen_range(0..=10)).collect();
            assert_eq!(convolve_slices(&a, &b).unwrap(), naive(&a, &b));
        }
    }

    #[test]
    fn prepared_kernel_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<u64> = (0..500).map(|_| rng.gen_range(0..=1)).collect();
        let k = PreparedKernel::new(&x, 400).unwrap();
        for _ in 0..5 {
            let y: Vec<u64> = (0..400).map(|_| rng.gen_range(0..=1)).collect();
            assert_eq!(k.convolve(&y).unwrap(), naive(&x, &y));
        }
        // Mismatched length falls back to the plain path.
        let y = vec![1u64; 10];
        assert_eq!(k.convolve(&y).unwrap(), naive(&x, &y));
    }

    proptest! {
        #[test]
        fn commutative_and_sum_preserving(
            a in prop::collection::vec(0u64..=10, 1..150),
            b in prop::collection::vec(0u64..=10, 1..150),
            oa in -50i64..50,
            ob in -50i64..50,
        ) {
            let sa = seq(&a, oa);
            let sb = seq(&b, ob);
            let ab = convolve(&sa, &sb).unwrap();
            let ba = convolve(&sb, &sa).unwrap();
            prop_assert_eq!(&ab, &ba);
            prop_assert_eq!(ab.len(), a.len() + b.len() - 1);
            prop_assert_eq!(ab.offset(), oa + ob);
            prop_assert_eq!(ab.sum(), sa.sum() * sb.sum());
            // Deterministic across calls.
            prop_assert_eq!(convolve(&sa, &sb).unwrap(), ab);
        }
    }
}
