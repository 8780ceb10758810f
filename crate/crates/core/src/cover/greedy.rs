//! Standard and lazy greedy max-k-cover, plus prefix truncation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cover::{SampleBitmap, Solution};
use crate::error::{Error, Result};
use crate::sampling::CoveringSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyMode {
    Lazy,
    Standard,
}

struct HeapEntry {
    gain: u64,
    vertex: u32,
    idx: usize,
}

// max by gain, then min by vertex id
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.cmp(&other.gain).then_with(|| other.vertex.cmp(&self.vertex))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.vertex == other.vertex
    }
}
impl Eq for HeapEntry {}

/// Greedy max-k-cover: iteratively the vertex with maximum marginal coverage,
/// ties broken by smallest vertex id. Both modes return the identical seed
/// sequence; lazy re-evaluates stale heap keys instead of rescanning.
pub fn lazy_greedy_max_cover(
    universe_size: usize,
    sets: &[CoveringSet],
    k: usize,
    mode: GreedyMode,
) -> Solution {
    greedy_with(universe_size, sets, k, mode, |_, _, _| {})
}

/// Greedy with a per-selection callback `(order_index, set, marginal)`,
/// invoked the moment each seed is chosen. This is what lets a sender stream
/// seeds while its local selection is still running.
pub fn greedy_with(
    universe_size: usize,
    sets: &[CoveringSet],
    k: usize,
    mode: GreedyMode,
    mut on_select: impl FnMut(usize, &CoveringSet, u64),
) -> Solution {
    let mut solution = Solution::empty(universe_size as u64);
    if k == 0 || sets.is_empty() {
        return solution;
    }

    // scan order: ascending vertex id, so "first maximum found" is the
    // smallest-id maximum
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_unstable_by_key(|&i| sets[i].vertex);

    let mut covered = SampleBitmap::new(universe_size);
    let mut select = |idx: usize, covered: &mut SampleBitmap, solution: &mut Solution| {
        let gained = covered.insert_all(&sets[idx].samples);
        let pos = solution.seeds.len();
        solution.seeds.push(sets[idx].vertex);
        solution.marginals.push(gained);
        solution.coverage += gained;
        on_select(pos, &sets[idx], gained);
    };

    match mode {
        GreedyMode::Standard => {
            let mut taken = vec![false; sets.len()];
            for _ in 0..k {
                let mut best: Option<(u64, usize)> = None;
                for &idx in &order {
                    if taken[idx] {
                        continue;
                    }
                    let gain = covered.count_missing(&sets[idx].samples);
                    if best.is_none_or(|(bg, _)| gain > bg) {
                        best = Some((gain, idx));
                    }
                }
                match best {
                    Some((gain, idx)) if gain > 0 => {
                        taken[idx] = true;
                        select(idx, &mut covered, &mut solution);
                    }
                    _ => break,
                }
            }
        }
        GreedyMode::Lazy => {
            let mut heap: BinaryHeap<HeapEntry> = order
                .iter()
                .map(|&idx| HeapEntry {
                    gain: sets[idx].samples.len() as u64,
                    vertex: sets[idx].vertex,
                    idx,
                })
                .collect();
            while solution.seeds.len() < k {
                let Some(top) = heap.pop() else { break };
                let fresh = covered.count_missing(&sets[top.idx].samples);
                if fresh == 0 {
                    continue;
                }
                // Heap keys are upper bounds on true gains, so `top` is the
                // smallest-id maximum exactly when its fresh gain beats the
                // next key, or ties it with a smaller vertex id.
                let take = match heap.peek() {
                    None => true,
                    Some(next) => fresh > next.gain || (fresh == next.gain && top.vertex < next.vertex),
                };
                if take {
                    select(top.idx, &mut covered, &mut solution);
                } else {
                    heap.push(HeapEntry { gain: fresh, vertex: top.vertex, idx: top.idx });
                }
            }
        }
    }
    solution
}

/// Number of seeds streamed under truncation factor `alpha` and budget `k`.
pub fn truncated_len(alpha: f64, k: usize) -> usize {
    // the epsilon absorbs float noise in alpha * k (e.g. 0.1 * 30)
    (alpha * k as f64 - 1e-9).ceil().max(0.0) as usize
}

/// The first `ceil(alpha * k)` seeds of a greedy solution (or fewer if the
/// solution is shorter), with their marginals.
pub fn truncate_stream_order(solution: &Solution, alpha: f64, k: usize) -> Result<Solution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} must lie in (0, 1]")));
    }
    let keep = truncated_len(alpha, k).min(solution.seeds.len());
    let marginals: Vec<u64> = solution.marginals[..keep].to_vec();
    Ok(Solution {
        seeds: solution.seeds[..keep].to_vec(),
        coverage: marginals.iter().sum(),
        marginals,
        universe_size: solution.universe_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::brute_force_max_cover;
    use rand::Rng;

    fn abc_sets() -> Vec<CoveringSet> {
        vec![
            CoveringSet { vertex: 0, samples: vec![0, 1] }, // a
            CoveringSet { vertex: 1, samples: vec![1, 2] }, // b
            CoveringSet { vertex: 2, samples: vec![2] },    // c
        ]
    }

    #[test]
    fn picks_unique_maximum() {
        for mode in [GreedyMode::Lazy, GreedyMode::Standard] {
            let sol = lazy_greedy_max_cover(3, &abc_sets(), 1, mode);
            assert_eq!(sol.seeds, vec![0]);
            assert_eq!(sol.coverage, 2);
        }
    }

    #[test]
    fn two_seeds_reach_brute_force_optimum() {
        let opt = brute_force_max_cover(3, &abc_sets(), 2).unwrap();
        assert_eq!(opt.coverage, 3);
        for mode in [GreedyMode::Lazy, GreedyMode::Standard] {
            let sol = lazy_greedy_max_cover(3, &abc_sets(), 2, mode);
            assert_eq!(sol.seeds, vec![0, 1]);
            assert_eq!(sol.coverage, 3);
        }
    }

    #[test]
    fn zero_budget_is_empty() {
        let sol = lazy_greedy_max_cover(3, &abc_sets(), 0, GreedyMode::Lazy);
        assert!(sol.is_empty());
        assert_eq!(sol.coverage, 0);
    }

    #[test]
    fn stops_when_gains_vanish() {
        let sets = vec![
            CoveringSet { vertex: 0, samples: vec![0, 1, 2] },
            CoveringSet { vertex: 1, samples: vec![1] },
        ];
        for mode in [GreedyMode::Lazy, GreedyMode::Standard] {
            let sol = lazy_greedy_max_cover(3, &sets, 2, mode);
            assert_eq!(sol.seeds, vec![0], "mode {mode:?} kept a zero-gain seed");
        }
    }

    #[test]
    fn ties_break_to_smallest_vertex() {
        let sets = vec![
            CoveringSet { vertex: 5, samples: vec![0, 1] },
            CoveringSet { vertex: 2, samples: vec![2, 3] },
            CoveringSet { vertex: 9, samples: vec![4, 5] },
        ];
        for mode in [GreedyMode::Lazy, GreedyMode::Standard] {
            let sol = lazy_greedy_max_cover(6, &sets, 3, mode);
            assert_eq!(sol.seeds, vec![2, 5, 9]);
        }
    }

    #[test]
    fn marginals_are_non_increasing_and_sum_to_coverage() {
        let mut rng = crate::rng::keyed_rng(41, 0, 0);
        for _ in 0..50 {
            let universe = rng.gen_range(1..40usize);
            let nv = rng.gen_range(1..15u32);
            let sets: Vec<CoveringSet> = (0..nv)
                .map(|v| {
                    let mut ids: Vec<u32> =
                        (0..universe as u32).filter(|_| rng.gen_bool(0.3)).collect();
                    ids.dedup();
                    CoveringSet { vertex: v, samples: ids }
                })
                .collect();
            let sol = lazy_greedy_max_cover(universe, &sets, 5, GreedyMode::Lazy);
            assert!(sol.marginals.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(sol.coverage, sol.marginals.iter().sum::<u64>());
            assert!(sol.coverage <= universe as u64);
        }
    }

    #[test]
    fn lazy_and_standard_agree_on_random_instances() {
        let mut rng = crate::rng::keyed_rng(17, 0, 0);
        for round in 0..200 {
            let universe = rng.gen_range(1..40usize);
            let nv = rng.gen_range(1..18u32);
            let sets: Vec<CoveringSet> = (0..nv)
                .map(|v| {
                    let ids: Vec<u32> =
                        (0..universe as u32).filter(|_| rng.gen_bool(0.25)).collect();
                    CoveringSet { vertex: v, samples: ids }
                })
                .collect();
            let k = rng.gen_range(0..6usize);
            let lazy = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Lazy);
            let std = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Standard);
            assert_eq!(lazy.seeds, std.seeds, "sequences diverged in round {round}");
            assert_eq!(lazy.coverage, std.coverage);
        }
    }

    #[test]
    fn coverage_is_monotone_in_budget() {
        let sets = abc_sets();
        let mut prev = 0;
        for k in 0..5 {
            let sol = lazy_greedy_max_cover(3, &sets, k, GreedyMode::Lazy);
            assert!(sol.coverage >= prev);
            prev = sol.coverage;
        }
    }

    #[test]
    fn callback_fires_in_selection_order() {
        let mut seen = Vec::new();
        let sol = greedy_with(3, &abc_sets(), 2, GreedyMode::Lazy, |pos, set, gain| {
            seen.push((pos, set.vertex, gain));
        });
        assert_eq!(seen, vec![(0, 0, 2), (1, 1, 1)]);
        assert_eq!(sol.seeds, vec![0, 1]);
    }

    #[test]
    fn truncation_identity_at_full_alpha() {
        let sol = lazy_greedy_max_cover(3, &abc_sets(), 2, GreedyMode::Lazy);
        let t = truncate_stream_order(&sol, 1.0, 2).unwrap();
        assert_eq!(t, sol);
    }

    #[test]
    fn truncation_uses_ceiling() {
        assert_eq!(truncated_len(0.125, 100), 13);
        assert_eq!(truncated_len(0.34, 3), 2);
        assert_eq!(truncated_len(1.0, 100), 100);
        assert_eq!(truncated_len(0.1, 30), 3); // guards against 3.0000000000000004
    }

    #[test]
    fn truncation_rejects_bad_alpha() {
        let sol = Solution::empty(3);
        assert!(truncate_stream_order(&sol, 0.0, 2).is_err());
        assert!(truncate_stream_order(&sol, 1.5, 2).is_err());
    }

    #[test]
    fn truncated_prefix_meets_exponential_bound() {
        let mut rng = crate::rng::keyed_rng(29, 0, 0);
        for _ in 0..60 {
            let universe = rng.gen_range(4..36usize);
            let nv = rng.gen_range(2..14u32);
            let sets: Vec<CoveringSet> = (0..nv)
                .map(|v| {
                    let ids: Vec<u32> =
                        (0..universe as u32).filter(|_| rng.gen_bool(0.3)).collect();
                    CoveringSet { vertex: v, samples: ids }
                })
                .collect();
            let k = rng.gen_range(1..5usize);
            let opt = brute_force_max_cover(universe, &sets, k).unwrap();
            let sol = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Lazy);
            for alpha in [0.25, 0.5, 1.0] {
                let prefix = truncate_stream_order(&sol, alpha, k).unwrap();
                let bound = (1.0 - (-alpha).exp()) * opt.coverage as f64;
                assert!(
                    prefix.coverage as f64 >= bound - 1e-9,
                    "alpha {alpha}: prefix {} below bound {bound}",
                    prefix.coverage
                );
            }
        }
    }
}
