/// Bit array over sums `[0, tmax]`; bit `i` set iff some sub-multiset of the
/// items sums to `i`. Bit 0 is always set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionBitmap {
    words: Vec<u64>,
    len: usize,
}

impl SolutionBitmap {
    /// `(1, 0, ..., 0)` over `[0, tmax]`.
    pub fn new(tmax: usize) -> Self {
        let len = tmax + 1;
        let mut words = vec![0u64; len.div_ceil(64)];
        words[0] = 1;
        Self { words, len }
    }

    pub fn tmax(&self) -> usize {
        self.len - 1
    }

    /// Number of positions, `tmax + 1`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} outside [0, {}]", self.len - 1);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Word `wi` of `self << shift`, truncated to `len`.
    #[inline]
    fn shifted_word(&self, wi: usize, shift: usize) -> u64 {
        let q = shift / 64;
        let r = shift % 64;
        if wi < q {
            return 0;
        }
        let src = wi - q;
        let mut w = self.words[src] << r;
        if r != 0 && src > 0 {
            w |= self.words[src - 1] >> (64 - r);
        }
        w
    }

    fn tail_mask(&self, wi: usize) -> u64 {
        let last = self.words.len() - 1;
        if wi == last && !self.len.is_multiple_of(64) {
            (1u64 << (self.len % 64)) - 1
        } else {
            u64::MAX
        }
    }

    /// Indices `i` with `A[i] = 0` and `A[i - w] = 1`, ascending.
    pub fn gains(&self, w: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if w == 0 || w >= self.len {
            return out;
        }
        for wi in 0..self.words.len() {
            let mut fresh = self.shifted_word(wi, w) & !self.words[wi] & self.tail_mask(wi);
            while fresh != 0 {
                out.push(wi * 64 + fresh.trailing_zeros() as usize);
                fresh &= fresh - 1;
            }
        }
        out
    }

    /// `A |= A << w` for one item of weight `w`; returns how many bits were gained.
    pub fn absorb(&mut self, w: usize) -> usize {
        if w == 0 || w >= self.len {
            return 0;
        }
        let mut gained = 0;
        // High to low so every read sees the pre-item state.
        for wi in (0..self.words.len()).rev() {
            let add = self.shifted_word(wi, w) & self.tail_mask(wi) & !self.words[wi];
            gained += add.count_ones() as usize;
            self.words[wi] |= add;
        }
        gained
    }

    /// True iff every bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &SolutionBitmap) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Positions set in `self` but not in `base`, ascending.
    pub fn difference(&self, base: &SolutionBitmap) -> Vec<usize> {
        assert_eq!(self.len, base.len);
        let mut out = Vec::new();
        for (wi, (&a, &b)) in self.words.iter().zip(&base.words).enumerate() {
            let mut d = a & !b;
            while d != 0 {
                out.push(wi * 64 + d.trailing_zeros() as usize);
                d &= d - 1;
            }
        }
        out
    }
}
