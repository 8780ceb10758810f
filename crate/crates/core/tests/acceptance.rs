//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; every tolerance is pinned in code.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use greediris::cover::{
    brute_force_max_cover, bucket_count, lazy_greedy_max_cover, truncate_stream_order, GreedyMode,
    StreamingSketch,
};
use greediris::diffusion::expected_influence;
use greediris::driver::{combined_guarantee, run_imm, Mode, RunConfig};
use greediris::graph::{Graph, Model};
use greediris::rng::keyed_rng;
use greediris::runtime::{
    execute_selection, partition_vertices, rank_slice, run_round, Execution, RoundConfig,
};
use greediris::sampling::{build_covering_sets, dump_batch, generate_batch, CoveringSet, RrrSample};
use greediris::synthetic::scale_free_graph;

const E_RATIO: f64 = 0.632_120_558_828_557_7; // 1 - 1/e

fn pass(criterion: u32, what: &str) {
    println!("acceptance {criterion}: PASS — {what}");
}

/// Random covering instance within the brute-force guard.
fn random_instance(rng: &mut impl Rng, max_sets: u32, max_universe: usize) -> (usize, Vec<CoveringSet>) {
    let universe = rng.gen_range(2..=max_universe);
    let nv = rng.gen_range(1..=max_sets);
    let density = rng.gen_range(0.1..0.5);
    let sets = (0..nv)
        .map(|v| {
            let ids: Vec<u32> =
                (0..universe as u32).filter(|_| rng.gen_bool(density)).collect();
            CoveringSet { vertex: v, samples: ids }
        })
        .collect();
    (universe, sets)
}

#[test]
fn criterion_01_guarantee_arithmetic() {
    let got = combined_guarantee(E_RATIO, 0.5 - 0.077, 0.13).unwrap();
    assert!(
        (got - 0.123).abs() <= 0.001,
        "combined guarantee {got} not within 0.001 of 0.123"
    );
    pass(1, &format!("combined_guarantee(1-1/e, 1/2-0.077, 0.13) = {got:.6}"));
}

#[test]
fn criterion_02_bucket_count() {
    assert_eq!(bucket_count(100, 0.077), 63);
    let sketch = StreamingSketch::create(100, 0.077, 1, 16).unwrap();
    assert_eq!(sketch.bucket_len(), 63);
    pass(2, "k=100, delta=0.077 builds 63 buckets");
}

#[test]
fn criterion_03_greedy_bound_suite() {
    let mut rng = keyed_rng(0xACC3, 0, 0);
    for round in 0..500 {
        let (universe, sets) = random_instance(&mut rng, 18, 40);
        let k = rng.gen_range(1..=5usize);
        let opt = brute_force_max_cover(universe, &sets, k).unwrap();
        let lazy = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Lazy);
        let standard = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Standard);
        assert!(
            lazy.coverage as f64 >= E_RATIO * opt.coverage as f64 - 1e-9,
            "round {round}: lazy {} below (1-1/e) * {}",
            lazy.coverage,
            opt.coverage
        );
        assert_eq!(lazy.seeds, standard.seeds, "round {round}: sequences diverged");
        assert_eq!(lazy.coverage, standard.coverage);
    }
    pass(3, "500 instances: lazy >= (1-1/e) OPT and lazy == standard sequence");
}

#[test]
fn criterion_04_streaming_bound_suite() {
    let mut rng = keyed_rng(0xACC4, 0, 0);
    for round in 0..200 {
        let (universe, sets) = random_instance(&mut rng, 16, 40);
        let k = rng.gen_range(1..=5usize);
        let opt = brute_force_max_cover(universe, &sets, k).unwrap();
        let l = sets.iter().map(|s| s.samples.len() as u64).max().unwrap_or(1).max(1);
        for delta in [0.05, 0.1, 0.2] {
            for order_seed in 0..5u64 {
                let mut order: Vec<usize> = (0..sets.len()).collect();
                order.shuffle(&mut keyed_rng(order_seed, 1, round));
                let mut sketch = StreamingSketch::create(k, delta, l, universe).unwrap();
                for &i in &order {
                    sketch.insert(sets[i].vertex, &sets[i]);
                }
                let got = sketch.finalize().coverage as f64;
                let bound = (0.5 - delta) * opt.coverage as f64;
                assert!(
                    got >= bound - 1e-9,
                    "round {round} delta {delta} order {order_seed}: {got} < {bound}"
                );
            }
        }
    }
    pass(4, "200 instances x 5 orders: finalize >= (1/2 - delta) OPT for all deltas");
}

#[test]
fn criterion_05_truncation_bound_suite() {
    let mut rng = keyed_rng(0xACC5, 0, 0);
    for round in 0..200 {
        let (universe, sets) = random_instance(&mut rng, 16, 40);
        let k = rng.gen_range(1..=5usize);
        let opt = brute_force_max_cover(universe, &sets, k).unwrap();
        let greedy = lazy_greedy_max_cover(universe, &sets, k, GreedyMode::Lazy);
        for alpha in [0.25, 0.5, 1.0] {
            let prefix = truncate_stream_order(&greedy, alpha, k).unwrap();
            let bound = (1.0 - (-alpha).exp()) * opt.coverage as f64;
            assert!(
                prefix.coverage as f64 >= bound - 1e-9,
                "round {round} alpha {alpha}: prefix {} < {bound}",
                prefix.coverage
            );
        }
    }
    pass(5, "truncated prefixes clear (1 - e^-alpha) OPT for alpha in {0.25, 0.5, 1}");
}

fn random_graph(rng: &mut impl Rng, max_n: u32) -> Graph {
    let n = rng.gen_range(8..=max_n);
    let edges: Vec<(u32, u32, f64)> = (0..n * 4)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0.0..0.4)))
        .collect();
    Graph::prepared_from_edges(n as usize, &edges, Model::IndependentCascade).unwrap()
}

#[test]
fn criterion_06_distributed_equals_sequential_at_m2() {
    let mut rng = keyed_rng(0xACC6, 0, 0);
    for round in 0..20 {
        let g = random_graph(&mut rng, 256);
        let theta = rng.gen_range(64..512u32);
        let k = rng.gen_range(1..10usize);
        let cfg = RoundConfig {
            k,
            alpha: 1.0,
            delta: 0.077,
            m: 2,
            bucket_workers: 2,
            bucket_override: None,
            sampling_seed: round as u64,
            partition_seed: round as u64 + 1,
            execution: Execution::Threaded,
        };
        let outcome = run_round(&g, Model::IndependentCascade, theta, &cfg).unwrap();
        let whole = generate_batch(&g, Model::IndependentCascade, 0, theta, round as u64).unwrap();
        let sets = build_covering_sets(&whole, None).unwrap();
        let seq = lazy_greedy_max_cover(theta as usize, &sets, k, GreedyMode::Lazy);
        assert_eq!(
            outcome.solution.coverage, seq.coverage,
            "round {round}: m=2 coverage diverged from sequential"
        );
    }
    pass(6, "20 graphs: run_round(m=2) coverage equals sequential lazy greedy");
}

#[test]
fn criterion_07_sample_universe_invariance() {
    let mut rng = keyed_rng(0xACC7, 0, 0);
    let g = random_graph(&mut rng, 64);
    let theta = 240u32;
    let seed = 99u64;
    let mut reference: Option<(Vec<RrrSample>, String)> = None;
    for m in [2u32, 4, 8] {
        let mut union: Vec<RrrSample> = Vec::new();
        for p in 0..m {
            let (lo, hi) = rank_slice(theta, m, p);
            union.extend(generate_batch(&g, Model::IndependentCascade, lo, hi, seed).unwrap());
        }
        union.sort_by_key(|s| s.id);
        let dump = dump_batch(&union);
        match &reference {
            None => reference = Some((union, dump)),
            Some((samples, bytes)) => {
                assert_eq!(&union, samples, "m = {m}: sample multiset diverged");
                assert_eq!(&dump, bytes, "m = {m}: dump bytes diverged");
            }
        }
    }
    pass(7, "RRR multiset byte-identical for m in {2, 4, 8}");
}

#[test]
fn criterion_08_end_to_end_quality_parity() {
    let n = 10_000;
    let g = scale_free_graph(n, 5, Model::IndependentCascade, 0.0, 0.1, 0xE2E).unwrap();

    let mut seq_cfg = RunConfig::new(Model::IndependentCascade, Mode::Sequential, 0x5EED);
    seq_cfg.k = 50;
    seq_cfg.epsilon = 0.13;
    let seq = run_imm(&g, &seq_cfg).unwrap();

    let mut dist_cfg = RunConfig::new(Model::IndependentCascade, Mode::Imm, 0x5EED);
    dist_cfg.k = 50;
    dist_cfg.epsilon = 0.13;
    dist_cfg.m = 8;
    dist_cfg.alpha = 1.0;
    dist_cfg.bucket_workers = 2;
    let dist = run_imm(&g, &dist_cfg).unwrap();

    let trials = 10_000;
    let seq_inf =
        expected_influence(&g, &seq.solution.seeds, Model::IndependentCascade, trials, 0xE7A1)
            .unwrap();
    let dist_inf =
        expected_influence(&g, &dist.solution.seeds, Model::IndependentCascade, trials, 0xE7A1)
            .unwrap();
    let deviation = (dist_inf.mean - seq_inf.mean).abs() / seq_inf.mean;
    assert!(
        deviation <= 0.05,
        "distributed influence {:.2} deviates {:.2}% from sequential {:.2}",
        dist_inf.mean,
        deviation * 100.0,
        seq_inf.mean
    );
    pass(
        8,
        &format!(
            "influence parity {:.2} vs {:.2} ({:.2}% deviation, 5% allowed)",
            dist_inf.mean,
            seq_inf.mean,
            deviation * 100.0
        ),
    );
}

#[test]
fn criterion_09_two_stage_expectation_bound() {
    let mut rng = keyed_rng(0xACC9, 0, 0);
    // fixed brute-forceable instance: 16 vertices over a 40-sample universe
    let (universe, sets) = {
        let sets: Vec<CoveringSet> = (0..16u32)
            .map(|v| {
                let ids: Vec<u32> = (0..40u32).filter(|_| rng.gen_bool(0.25)).collect();
                CoveringSet { vertex: v, samples: ids }
            })
            .collect();
        (40usize, sets)
    };
    let k = 4;
    let delta = 0.077;
    let opt = brute_force_max_cover(universe, &sets, k).unwrap();
    let bound = (E_RATIO * (0.5 - delta)) / (E_RATIO + (0.5 - delta)) * opt.coverage as f64;

    let m = 5u32; // 4 senders plus the receiver
    let mut total = 0.0;
    let seeds_tested = 50;
    for partition_seed in 0..seeds_tested {
        let assignment = partition_vertices(16, m, partition_seed).unwrap();
        let mut owned: Vec<Vec<CoveringSet>> = vec![Vec::new(); m as usize];
        for set in &sets {
            owned[assignment.owner[set.vertex as usize] as usize].push(set.clone());
        }
        let cfg = RoundConfig {
            k,
            alpha: 1.0,
            delta,
            m,
            bucket_workers: 1,
            bucket_override: None,
            sampling_seed: 0,
            partition_seed,
            execution: Execution::Serialized { scheduler_seed: partition_seed },
        };
        let outcome = execute_selection(&owned, universe, &cfg).unwrap();
        total += outcome.solution.coverage as f64;
    }
    let mean = total / seeds_tested as f64;
    assert!(
        mean >= bound,
        "mean final coverage {mean:.3} below the two-stage expectation bound {bound:.3}"
    );
    pass(9, &format!("mean coverage {mean:.2} >= composed bound {bound:.2} (OPT {})", opt.coverage));
}

#[test]
fn criterion_10_diffusion_calibration() {
    // IC chain: closed-form expectation 1 + 0.5 + 0.25
    let chain =
        Graph::prepared_from_edges(3, &[(0, 1, 0.5), (1, 2, 0.5)], Model::IndependentCascade)
            .unwrap();
    let est = expected_influence(&chain, &[0], Model::IndependentCascade, 100_000, 0xCA1).unwrap();
    assert!((est.mean - 1.75).abs() <= 0.01, "chain mean {} not within 0.01 of 1.75", est.mean);

    // LT star: both leaves seeded always activate the center
    let star =
        Graph::prepared_from_edges(3, &[(0, 2, 0.5), (1, 2, 0.5)], Model::LinearThreshold).unwrap();
    let lt = expected_influence(&star, &[0, 1], Model::LinearThreshold, 2_000, 0xCA2).unwrap();
    assert_eq!(lt.mean, 3.0, "LT star must activate exactly 3 vertices every trial");
    pass(10, &format!("IC chain {:.4} (±0.01 of 1.75), LT star exactly 3", est.mean));
}

#[test]
fn criterion_11_protocol_fuzzing() {
    let mut rng = keyed_rng(0xACCB, 0, 0);
    let g = random_graph(&mut rng, 48);
    let theta = 160u32;
    let k = 5;
    let m = 4u32; // 3 senders

    // global inverted index for recounts
    let whole = generate_batch(&g, Model::IndependentCascade, 0, theta, 0xF0).unwrap();
    let global_sets = build_covering_sets(&whole, None).unwrap();
    let covering_of = |v: u32| -> &[u32] {
        global_sets
            .iter()
            .find(|s| s.vertex == v)
            .map(|s| s.samples.as_slice())
            .unwrap_or(&[])
    };

    for interleaving in 0..100u64 {
        let cfg = RoundConfig {
            k,
            alpha: 1.0,
            delta: 0.1,
            m,
            bucket_workers: 1,
            bucket_override: None,
            sampling_seed: 0xF0,
            partition_seed: 0xF1,
            execution: Execution::Serialized { scheduler_seed: interleaving },
        };
        let outcome = run_round(&g, Model::IndependentCascade, theta, &cfg)
            .unwrap_or_else(|e| panic!("interleaving {interleaving}: protocol error {e}"));

        // exactly-once: every seed message hit every bucket exactly once
        let diag = &outcome.receiver;
        assert_eq!(
            diag.applications,
            diag.seed_messages * diag.bucket_count as u64,
            "interleaving {interleaving}: applications drifted"
        );

        // recount every bucket's coverage from its admitted seeds
        for (b, seeds) in diag.bucket_seeds.iter().enumerate() {
            let mut union: HashSet<u32> = HashSet::new();
            for &s in seeds {
                union.extend(covering_of(s).iter().copied());
            }
            assert_eq!(
                union.len() as u64,
                diag.bucket_covered[b],
                "interleaving {interleaving}: bucket {b} recount mismatch"
            );
        }

        // final answer dominates every local solution
        for local in &outcome.locals {
            assert!(
                outcome.solution.coverage >= local.coverage,
                "interleaving {interleaving}: final lost to a local"
            );
        }
    }
    pass(11, "100 interleavings: no protocol errors, exactly-once verified, dominance held");
}
