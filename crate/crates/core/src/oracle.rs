//! Brute-force reference implementations.
//!
//! These are deliberately plain: boolean vectors, nested loops and full
//! recomputation, sharing no code with the fast engines they arbitrate.

use std::collections::BTreeSet;

use crate::answer::Answer;
use crate::trace::{SetOp, SumOp};

/// All reachable subset sums of `weights`, capped at `tmax`, by 0/1 knapsack DP.
pub fn reachable_sums(weights: &[u64], tmax: usize) -> Vec<bool> {
    let mut reach = vec![false; tmax + 1];
    reach[0] = true;
    for &w in weights {
        let w = w as usize;
        if w == 0 || w > tmax {
            continue;
        }
        for t in (w..=tmax).rev() {
            if reach[t - w] {
                reach[t] = true;
            }
        }
    }
    reach
}

/// Every subset sum by explicit `2^n` enumeration. Intended for `n <= 20`.
pub fn enumerate_subset_sums(weights: &[u64]) -> BTreeSet<u64> {
    assert!(weights.len() <= 24, "enumeration oracle is exponential");
    let mut sums = BTreeSet::new();
    for mask in 0u32..(1u32 << weights.len()) {
        let s = weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &w)| w)
            .sum();
        sums.insert(s);
    }
    sums
}

/// Answers a subset-sum trace by rerunning the DP from scratch at every query.
/// Deletions remove one live copy of the weight.
pub fn naive_subset_sum_trace(ops: &[SumOp], tmax: u64) -> Vec<Answer> {
    let tmax = tmax as usize;
    let mut items: Vec<u64> = Vec::new();
    let mut answers = Vec::new();
    for op in ops {
        match *op {
            SumOp::Insert(w) => items.push(w),
            SumOp::Delete(w) => {
                if let Some(pos) = items.iter().position(|&x| x == w) {
                    items.swap_remove(pos);
                }
            }
            SumOp::Query(t) => {
                let reach = reachable_sums(&items, tmax);
                answers.push(Answer::from(reach.get(t as usize).copied().unwrap_or(false)));
            }
        }
    }
    answers
}

/// Number of triples `(a, b, c)` with `a + b = c`.
pub fn naive_3sum_count(a: &[u64], b: &[u64], c: &[u64]) -> u64 {
    let mut count = 0;
    for &x in a {
        for &y in b {
            for &z in c {
                if x + y == z {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Number of tuples with `a_1 + ... + a_{k-1} = a_k`, one element per set.
pub fn naive_ksum_count(sets: &[Vec<u64>]) -> u64 {
    fn walk(sets: &[Vec<u64>], depth: usize, partial: u64) -> u64 {
        if depth + 1 == sets.len() {
            return sets[depth].iter().filter(|&&v| v == partial).count() as u64;
        }
        sets[depth].iter().map(|&v| walk(sets, depth + 1, partial + v)).sum()
    }
    if sets.len() < 2 {
        return 0;
    }
    walk(sets, 0, 0)
}

/// Scan for indices `i` with `Y[i] = 0` and `X[i - alpha] = 1`, both in range.
pub fn naive_flip_scan(x: &[bool], y: &[bool], alpha: i64) -> (usize, Vec<usize>) {
    let mut hits = Vec::new();
    for (i, &yi) in y.iter().enumerate() {
        let j = i as i64 - alpha;
        if j < 0 || j >= x.len() as i64 {
            continue;
        }
        if !yi && x[j as usize] {
            hits.push(i);
        }
    }
    (hits.len(), hits)
}

/// Replays a set trace, returning the exact tuple count after every operation
/// and the answer to every query.
pub fn naive_set_trace(ops: &[SetOp], sets: usize) -> (Vec<u64>, Vec<Answer>) {
    let mut live: Vec<Vec<u64>> = vec![Vec::new(); sets];
    let mut counts = Vec::with_capacity(ops.len());
    let mut answers = Vec::new();
    let count = |live: &Vec<Vec<u64>>| {
        if sets == 3 {
            naive_3sum_count(&live[0], &live[1], &live[2])
        } else {
            naive_ksum_count(live)
        }
    };
    let mut current = 0;
    for op in ops {
        match *op {
            SetOp::Insert { set, value } => {
                live[set].push(value);
                current = count(&live);
            }
            SetOp::Delete { set, value } => {
                if let Some(p) = live[set].iter().position(|&v| v == value) {
                    live[set].swap_remove(p);
                }
                current = count(&live);
            }
            SetOp::Query => answers.push(Answer::from(current > 0)),
        }
        counts.push(current);
    }
    (counts, answers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subset_trace_examples() {
        assert!(naive_subset_sum_trace(&[], 5).is_empty());
        assert_eq!(
            naive_subset_sum_trace(&[SumOp::Insert(3), SumOp::Query(3)], 5),
            vec![Answer::Yes]
        );
        let ops = [
            SumOp::Insert(3),
            SumOp::Query(3),
            SumOp::Query(4),
            SumOp::Insert(1),
            SumOp::Query(4),
            SumOp::Delete(3),
            SumOp::Query(4),
        ];
        use Answer::*;
        assert_eq!(naive_subset_sum_trace(&ops, 8), vec![Yes, No, Yes, No]);
    }

    #[test]
    fn dp_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(0..=15);
            let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
            let tmax = rng.gen_range(1..=80);
            let reach = reachable_sums(&weights, tmax);
            let sums = enumerate_subset_sums(&weights);
            for (t, &r) in reach.iter().enumerate() {
                assert_eq!(r, sums.contains(&(t as u64)), "{weights:?} t={t}");
            }
        }
    }

    #[test]
    fn three_sum_counts() {
        assert_eq!(naive_3sum_count(&[], &[], &[]), 0);
        assert_eq!(naive_3sum_count(&[1], &[2], &[3]), 1);
        // (0,0,0) (0,1,1) (1,0,1) (1,1,2)
        assert_eq!(naive_3sum_count(&[0, 1], &[0, 1], &[0, 1, 2]), 4);
    }

    #[test]
    fn ksum_counts() {
        assert_eq!(naive_ksum_count(&[vec![1], vec![2], vec![3]]), 1);
        assert_eq!(naive_ksum_count(&[vec![1], vec![2], vec![3], vec![6]]), 1);
        assert_eq!(naive_ksum_count(&[vec![0, 1], vec![0, 1], vec![0, 1, 2]]), 4);
        assert_eq!(naive_ksum_count(&[vec![], vec![2], vec![3]]), 0);
    }

    #[test]
    fn flip_scan_examples() {
        assert_eq!(naive_flip_scan(&[true], &[false], 0), (1, vec![0]));
        let x = [true, false, true];
        let y = [false, false, true, false];
        let counts: Vec<usize> = (-2..=3).map(|a| naive_flip_scan(&x, &y, a).0).collect();
        // alpha = -2..=3, frozen from a hand scan of the definition.
        assert_eq!(counts, vec![1, 1, 1, 2, 0, 1]);
        assert_eq!(naive_flip_scan(&[true, false], &[true, false], 1), (1, vec![1]));
    }
}
