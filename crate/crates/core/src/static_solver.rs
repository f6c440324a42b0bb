//! From-scratch computation of every reachable subset sum up to `tmax`.

use crate::bitmap::SolutionBitmap;

/// Reachable sums of a weight list, as a bitmap over `[0, tmax]`.
///
/// Word-parallel 0/1 knapsack: one shifted OR per item, `O(n * tmax / 64)`.
/// Zero weights and weights above `tmax` never change the result.
pub fn solve_all(weights: &[u64], tmax: usize) -> SolutionBitmap {
    let mut reach = SolutionBitmap::new(tmax);
    for &w in weights {
        if w == 0 || w > tmax as u64 {
            continue;
        }
        reach.absorb(w as usize);
        if reach.count_ones() == reach.len() {
            break;
        }
    }
    reach
}
