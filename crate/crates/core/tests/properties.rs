//! Property tests for the crate-wide invariants: sampling purity and
//! partition invariance, covering-set inversion, greedy mode equivalence,
//! sketch accounting, and wire-format round-trips.

use std::collections::HashSet;

use proptest::prelude::*;

use greediris::cover::{lazy_greedy_max_cover, GreedyMode, Solution, StreamingSketch};
use greediris::graph::{Graph, Model};
use greediris::runtime::wire::{decode_message, encode_message};
use greediris::runtime::{select_final, Message, SeedMessage, TerminationMessage};
use greediris::sampling::{build_covering_sets, generate_batch, CoveringSet};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..24, proptest::collection::vec((0u32..24, 0u32..24, 0.0f64..1.0), 1..60)).prop_map(
        |(n, raw)| {
            let edges: Vec<(u32, u32, f64)> = raw
                .into_iter()
                .map(|(s, d, w)| (s % n as u32, d % n as u32, w))
                .collect();
            Graph::prepared_from_edges(n, &edges, Model::IndependentCascade).unwrap()
        },
    )
}

fn arb_covering_sets() -> impl Strategy<Value = (usize, Vec<CoveringSet>)> {
    (1usize..48, 1u32..16).prop_flat_map(|(universe, nv)| {
        let sets = proptest::collection::vec(
            proptest::collection::btree_set(0..universe as u32, 0..universe.min(20)),
            nv as usize..=nv as usize,
        )
        .prop_map(move |members| {
            members
                .into_iter()
                .enumerate()
                .map(|(v, ids)| CoveringSet { vertex: v as u32, samples: ids.into_iter().collect() })
                .collect::<Vec<_>>()
        });
        (Just(universe), sets)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn batch_union_is_invariant_under_any_split(
        graph in arb_graph(),
        theta in 1u32..80,
        cut in 0u32..80,
        seed in 0u64..1000,
    ) {
        let cut = cut.min(theta);
        let whole = generate_batch(&graph, Model::IndependentCascade, 0, theta, seed).unwrap();
        let mut parts = generate_batch(&graph, Model::IndependentCascade, 0, cut, seed).unwrap();
        parts.extend(generate_batch(&graph, Model::IndependentCascade, cut, theta, seed).unwrap());
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn samples_are_sorted_sets_containing_their_root(
        graph in arb_graph(),
        theta in 1u32..60,
        seed in 0u64..1000,
    ) {
        for s in generate_batch(&graph, Model::IndependentCascade, 0, theta, seed).unwrap() {
            prop_assert!(s.members.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.members.binary_search(&s.root).is_ok());
            prop_assert!(s.members.iter().all(|&v| (v as usize) < graph.n()));
        }
    }

    #[test]
    fn inversion_preserves_membership_mass(
        graph in arb_graph(),
        theta in 1u32..60,
        seed in 0u64..1000,
    ) {
        let batch = generate_batch(&graph, Model::IndependentCascade, 0, theta, seed).unwrap();
        let sets = build_covering_sets(&batch, None).unwrap();
        let memberships: usize = batch.iter().map(|s| s.members.len()).sum();
        let coverings: usize = sets.iter().map(|c| c.samples.len()).sum();
        prop_assert_eq!(memberships, coverings);
        for c in &sets {
            prop_assert!(c.samples.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn lazy_and_standard_greedy_are_equivalent(
        (universe, sets) in arb_covering_sets(),
        k in 0usize..8,
    ) {
        let lazy = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Lazy);
        let std = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Standard);
        prop_assert_eq!(&lazy.seeds, &std.seeds);
        prop_assert_eq!(lazy.coverage, std.coverage);
        prop_assert!(lazy.marginals.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(lazy.coverage, lazy.marginals.iter().sum::<u64>());
    }

    #[test]
    fn sketch_coverage_is_monotone_and_recountable(
        (universe, sets) in arb_covering_sets(),
        k in 1usize..6,
        delta in 0.01f64..0.49,
    ) {
        let l = sets.iter().map(|s| s.samples.len() as u64).max().unwrap_or(1).max(1);
        let mut sketch = StreamingSketch::create(k, delta, l, universe).unwrap();
        let mut admitted: Vec<Vec<usize>> = vec![Vec::new(); sketch.bucket_len()];
        let mut prev = 0u64;
        for (i, set) in sets.iter().enumerate() {
            for b in sketch.insert(set.vertex, set) {
                admitted[b].push(i);
            }
            let cov = sketch.finalize().coverage;
            prop_assert!(cov >= prev);
            prev = cov;
        }
        for (b, bucket) in sketch.buckets().iter().enumerate() {
            let mut union: HashSet<u32> = HashSet::new();
            for &i in &admitted[b] {
                union.extend(sets[i].samples.iter().copied());
            }
            prop_assert_eq!(union.len() as u64, bucket.covered_count());
            prop_assert!(bucket.seeds().len() <= k);
        }
    }

    #[test]
    fn final_selection_dominates_all_candidates(
        coverages in proptest::collection::vec(0u64..100, 1..6),
        global_cov in 0u64..100,
    ) {
        let mk = |cov: u64| Solution {
            seeds: if cov > 0 { vec![0] } else { vec![] },
            marginals: if cov > 0 { vec![cov] } else { vec![] },
            coverage: cov,
            universe_size: 100,
        };
        let locals: Vec<Solution> = coverages.iter().map(|&c| mk(c)).collect();
        let global = mk(global_cov);
        let best = select_final(Some(&global), &locals).unwrap();
        prop_assert!(best.coverage >= global.coverage);
        for l in &locals {
            prop_assert!(best.coverage >= l.coverage);
        }
    }

    #[test]
    fn wire_codec_round_trips(
        rank in 1u32..16,
        order in 0u32..64,
        vertex in 0u32..1000,
        ids in proptest::collection::btree_set(0u32..10_000, 0..40),
        term_seeds in proptest::collection::vec((0u32..1000, 0u64..500), 0..10),
    ) {
        let seed = Message::Seed(SeedMessage {
            sender_rank: rank,
            order_index: order,
            seed: vertex,
            covering: CoveringSet { vertex, samples: ids.into_iter().collect() },
        });
        prop_assert_eq!(decode_message(&encode_message(&seed), 0).unwrap(), seed);

        let mut sol = Solution::empty(0);
        for (v, g) in term_seeds {
            sol.seeds.push(v);
            sol.marginals.push(g);
            sol.coverage += g;
        }
        let term = Message::Terminate(TerminationMessage { sender_rank: rank, local_solution: sol });
        prop_assert_eq!(decode_message(&encode_message(&term), 0).unwrap(), term);
    }
}
