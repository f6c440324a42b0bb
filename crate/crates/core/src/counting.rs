use crate::conv::{convolve_slices, ConvError};

/// Dense counts over the integer range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    lo: i64,
    counts: Vec<u64>,
}

impl CountVector {
    pub fn zeros(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        Self { lo, counts: vec![0; (hi - lo + 1) as usize] }
    }

    /// How often each value occurs; values must lie in `[lo, hi]`.
    pub fn from_values(values: impl IntoIterator<Item = i64>, lo: i64, hi: i64) -> Self {
        let mut v = Self::zeros(lo, hi);
        for x in values {
            assert!((lo..=hi).contains(&x), "value {x} outside [{lo}, {hi}]");
            v.counts[(x - lo) as usize] += 1;
        }
        v
    }

    /// Counts of `a + b` over pairs, windowed to `[lo, hi]`.
    pub fn sumset(a: &CountVector, b: &CountVector, lo: i64, hi: i64) -> Result<Self, ConvError> {
        let mut out = Self::zeros(lo, hi);
        let (Some((a0, a1)), Some((b0, b1))) = (a.support(), b.support()) else {
            return Ok(out);
        };
        let prod = convolve_slices(&a.counts[a0..=a1], &b.counts[b0..=b1])?;
        let base = a.lo + a0 as i64 + b.lo + b0 as i64;
        for (j, &c) in prod.iter().enumerate() {
            if c != 0 {
                let v = base + j as i64;
                assert!((lo..=hi).contains(&v), "sum {v} outside [{lo}, {hi}]");
                out.counts[(v - lo) as usize] = c;
            }
        }
        Ok(out)
    }

    /// First and last nonzero positions.
    fn support(&self) -> Option<(usize, usize)> {
        let first = self.counts.iter().position(|&c| c != 0)?;
        let last = self.counts.iter().rposition(|&c| c != 0)?;
        Some((first, last))
    }

    #[inline]
    pub fn get(&self, value: i64) -> u64 {
        let idx = value - self.lo;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.counts.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(value, count)` for every nonzero entry.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| (self.lo + j as i64, c))
    }
}
