//! Random reverse reachable (RRR) sample generation and the inverted
//! per-vertex covering-set view.
//!
//! Sample `i` is a pure function of `(global_seed, i)`: any partition of an id
//! range across workers reproduces exactly the single-worker batch. Under the
//! independent-cascade model a sample is a probabilistic BFS over reverse
//! adjacency; under linear threshold it is a live-edge walk that picks at most
//! one in-neighbor per reached vertex.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Model};
use crate::rng::{keyed_rng, stream};

/// One RRR set: the vertices that reach `root` in a sampled subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrrSample {
    /// Global sample index in `[0, theta)`.
    pub id: u32,
    pub root: u32,
    /// Sorted ascending, no duplicates, always contains `root`.
    pub members: Vec<u32>,
}

/// For a vertex `v`, the sorted ids of the samples containing `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSet {
    pub vertex: u32,
    pub samples: Vec<u32>,
}

impl CoveringSet {
    pub fn new(vertex: u32, samples: Vec<u32>) -> CoveringSet {
        debug_assert!(samples.windows(2).all(|w| w[0] < w[1]));
        CoveringSet { vertex, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reusable mark table so batch generation does not re-zero per sample.
#[derive(Debug, Default)]
pub struct SampleScratch {
    mark: Vec<u32>,
    epoch: u32,
}

impl SampleScratch {
    fn begin(&mut self, n: usize) -> u32 {
        if self.mark.len() < n {
            self.mark.resize(n, 0);
        }
        if self.epoch == u32::MAX {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }
}

/// Generate one RRR sample. Randomness is pure in `(global_seed, sample_id)`.
pub fn sample_rrr(graph: &Graph, model: Model, sample_id: u32, global_seed: u64) -> Result<RrrSample> {
    let mut scratch = SampleScratch::default();
    sample_rrr_with(graph, model, sample_id, global_seed, &mut scratch)
}

/// [`sample_rrr`] with caller-provided scratch space.
pub fn sample_rrr_with(
    graph: &Graph,
    model: Model,
    sample_id: u32,
    global_seed: u64,
    scratch: &mut SampleScratch,
) -> Result<RrrSample> {
    graph.require_prepared(model)?;
    let mut members = walk_ordered(graph, model, sample_id, global_seed, scratch);
    let root = members[0];
    members.sort_unstable();
    Ok(RrrSample { id: sample_id, root, members })
}

/// The traversal itself, members in visit order (root first).
fn walk_ordered(
    graph: &Graph,
    model: Model,
    sample_id: u32,
    global_seed: u64,
    scratch: &mut SampleScratch,
) -> Vec<u32> {
    let n = graph.n();
    let epoch = scratch.begin(n);
    let mut rng = keyed_rng(global_seed, stream::SAMPLE, sample_id as u64);
    let root = rng.gen_range(0..n as u32);
    let mut visited = vec![root];
    scratch.mark[root as usize] = epoch;

    match model {
        Model::IndependentCascade => {
            let mut frontier = 0usize;
            while frontier < visited.len() {
                let cur = visited[frontier];
                frontier += 1;
                for (src, w) in graph.in_edges(cur) {
                    if scratch.mark[src as usize] != epoch && rng.gen::<f64>() < w {
                        scratch.mark[src as usize] = epoch;
                        visited.push(src);
                    }
                }
            }
        }
        Model::LinearThreshold => {
            let mut cur = root;
            loop {
                let total = graph.in_weight_sum(cur);
                let x: f64 = rng.gen();
                if x >= total {
                    break; // no in-neighbor selected
                }
                let mut acc = 0.0;
                let mut picked = None;
                for (src, w) in graph.in_edges(cur) {
                    acc += w;
                    if x < acc {
                        picked = Some(src);
                        break;
                    }
                }
                match picked {
                    Some(src) if scratch.mark[src as usize] != epoch => {
                        scratch.mark[src as usize] = epoch;
                        visited.push(src);
                        cur = src;
                    }
                    _ => break, // revisit (or fp rounding starved the pick)
                }
            }
        }
    }
    visited
}

/// Generate samples for ids `[id_lo, id_hi)`.
pub fn generate_batch(
    graph: &Graph,
    model: Model,
    id_lo: u32,
    id_hi: u32,
    global_seed: u64,
) -> Result<Vec<RrrSample>> {
    if id_lo > id_hi {
        return Err(Error::Parameter(format!("bad id range [{id_lo}, {id_hi})")));
    }
    graph.require_prepared(model)?;
    let mut scratch = SampleScratch::default();
    let mut out = Vec::with_capacity((id_hi - id_lo) as usize);
    for id in id_lo..id_hi {
        out.push(sample_rrr_with(graph, model, id, global_seed, &mut scratch)?);
    }
    Ok(out)
}

/// Invert a batch into per-vertex covering sets, sorted by vertex id.
///
/// Without a filter, only vertices that appear in some sample are emitted.
/// With a filter, exactly the filtered vertices are emitted, including those
/// with empty lists.
pub fn build_covering_sets(
    samples: &[RrrSample],
    vertex_filter: Option<&HashSet<u32>>,
) -> Result<Vec<CoveringSet>> {
    let mut seen = HashSet::with_capacity(samples.len());
    for s in samples {
        if !seen.insert(s.id) {
            return Err(Error::Integrity(format!("duplicate sample id {}", s.id)));
        }
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_unstable_by_key(|&i| samples[i].id);

    let mut per_vertex: std::collections::BTreeMap<u32, Vec<u32>> = std::collections::BTreeMap::new();
    if let Some(filter) = vertex_filter {
        for &v in filter {
            per_vertex.insert(v, Vec::new());
        }
        for &i in &order {
            let s = &samples[i];
            for &v in &s.members {
                if let Some(list) = per_vertex.get_mut(&v) {
                    list.push(s.id);
                }
            }
        }
    } else {
        for &i in &order {
            let s = &samples[i];
            for &v in &s.members {
                per_vertex.entry(v).or_default().push(s.id);
            }
        }
    }

    Ok(per_vertex
        .into_iter()
        .map(|(vertex, samples)| CoveringSet { vertex, samples })
        .collect())
}

/// Debug dump, one line per sample: `id: root: v1,v2,...`.
pub fn dump_batch(samples: &[RrrSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&format!("{}: {}: ", s.id, s.root));
        let members: Vec<String> = s.members.iter().map(|v| v.to_string()).collect();
        out.push_str(&members.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_ic(p: f64) -> Graph {
        // a(0) -> b(1) -> c(2)
        Graph::prepared_from_edges(3, &[(0, 1, p), (1, 2, p)], Model::IndependentCascade).unwrap()
    }

    fn find_sample_rooted_at(graph: &Graph, model: Model, root: u32, seed: u64) -> RrrSample {
        for id in 0..10_000 {
            let s = sample_rrr(graph, model, id, seed).unwrap();
            if s.root == root {
                return s;
            }
        }
        panic!("no sample rooted at {root} in 10k ids");
    }

    #[test]
    fn zero_probability_edges_give_singleton() {
        let g = chain_ic(0.0);
        for id in 0..64 {
            let s = sample_rrr(&g, Model::IndependentCascade, id, 5).unwrap();
            assert_eq!(s.members, vec![s.root]);
        }
    }

    #[test]
    fn certain_chain_reaches_everything_from_tail() {
        let g = chain_ic(1.0);
        let s = find_sample_rooted_at(&g, Model::IndependentCascade, 2, 7);
        assert_eq!(s.members, vec![0, 1, 2]);
    }

    #[test]
    fn edge_crossing_frequency_matches_probability() {
        // a(0) -> b(1) with p = 0.3; among samples rooted at b, the fraction
        // containing a estimates the Bernoulli parameter
        let g = Graph::prepared_from_edges(2, &[(0, 1, 0.3)], Model::IndependentCascade).unwrap();
        let mut rooted_b = 0u32;
        let mut contains_a = 0u32;
        for id in 0..10_000 {
            let s = sample_rrr(&g, Model::IndependentCascade, id, 13).unwrap();
            if s.root == 1 {
                rooted_b += 1;
                if s.members.contains(&0) {
                    contains_a += 1;
                }
            }
        }
        let frac = contains_a as f64 / rooted_b as f64;
        assert!((frac - 0.3).abs() < 0.015, "fraction {frac} off from 0.3");
    }

    #[test]
    fn sampling_is_pure() {
        let g = chain_ic(0.5);
        for id in [0u32, 3, 17, 4091] {
            let a = sample_rrr(&g, Model::IndependentCascade, id, 21).unwrap();
            let b = sample_rrr(&g, Model::IndependentCascade, id, 21).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn batches_are_partition_invariant() {
        let g = chain_ic(0.5);
        let whole = generate_batch(&g, Model::IndependentCascade, 0, 4, 9).unwrap();
        let mut split = generate_batch(&g, Model::IndependentCascade, 0, 2, 9).unwrap();
        split.extend(generate_batch(&g, Model::IndependentCascade, 2, 4, 9).unwrap());
        assert_eq!(whole, split);
    }

    #[test]
    fn empty_range_gives_empty_batch() {
        let g = chain_ic(0.5);
        let batch = generate_batch(&g, Model::IndependentCascade, 7, 7, 9).unwrap();
        assert!(batch.is_empty());
    }

    #[test]
    fn unprepared_graph_is_rejected() {
        let g = Graph::from_edge_list(crate::graph::EdgeList {
            n: 2,
            edges: vec![(0, 1, Some(0.5))],
            labels: vec![0, 1],
        });
        assert!(matches!(
            sample_rrr(&g, Model::IndependentCascade, 0, 0),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn roots_are_uniform_on_star() {
        // center 0, leaves 1..=9 each pointing at the center with p = 1
        let edges: Vec<(u32, u32, f64)> = (1..10).map(|l| (l, 0, 1.0)).collect();
        let g = Graph::prepared_from_edges(10, &edges, Model::IndependentCascade).unwrap();
        let batch = generate_batch(&g, Model::IndependentCascade, 0, 1000, 31).unwrap();
        let center_hits = batch.iter().filter(|s| s.root == 0).count() as f64;
        let expect = 1000.0 / 10.0;
        let sigma = (1000.0 * 0.1 * 0.9f64).sqrt();
        assert!(
            (center_hits - expect).abs() <= 3.0 * sigma,
            "center rooted {center_hits} times, expected {expect} +- {:.1}",
            3.0 * sigma
        );
    }

    #[test]
    fn lt_walk_is_a_reverse_path() {
        // random-ish LT graph; the live-edge walk must produce a chain where
        // each step follows one in-edge of the previous vertex
        let edges = [
            (0u32, 1u32, 0.4f64),
            (1, 2, 0.5),
            (2, 0, 0.3),
            (3, 1, 0.4),
            (0, 3, 0.9),
            (2, 3, 0.1),
        ];
        let g = Graph::prepared_from_edges(4, &edges, Model::LinearThreshold).unwrap();
        let mut scratch = SampleScratch::default();
        for id in 0..200 {
            let ordered = walk_ordered(&g, Model::LinearThreshold, id, 3, &mut scratch);
            for pair in ordered.windows(2) {
                let (reached, via) = (pair[0], pair[1]);
                assert!(
                    g.in_edges(reached).any(|(src, _)| src == via),
                    "{via} is not an in-neighbor of {reached}"
                );
            }
        }
    }

    #[test]
    fn lt_respects_selection_probability() {
        // b(1) has one in-edge from a(0) with weight 0.6: samples rooted at b
        // contain a with probability 0.6
        let g = Graph::prepared_from_edges(2, &[(0, 1, 0.6)], Model::LinearThreshold).unwrap();
        let mut rooted = 0u32;
        let mut carried = 0u32;
        for id in 0..10_000 {
            let s = sample_rrr(&g, Model::LinearThreshold, id, 17).unwrap();
            if s.root == 1 {
                rooted += 1;
                if s.members.contains(&0) {
                    carried += 1;
                }
            }
        }
        let frac = carried as f64 / rooted as f64;
        assert!((frac - 0.6).abs() < 0.02, "selection frequency {frac} off from 0.6");
    }

    #[test]
    fn covering_sets_invert_membership() {
        let samples = vec![
            RrrSample { id: 0, root: 0, members: vec![0, 1] },
            RrrSample { id: 1, root: 1, members: vec![1] },
        ];
        let sets = build_covering_sets(&samples, None).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0], CoveringSet { vertex: 0, samples: vec![0] });
        assert_eq!(sets[1], CoveringSet { vertex: 1, samples: vec![0, 1] });
    }

    #[test]
    fn vertex_filter_restricts_and_pads() {
        let samples = vec![
            RrrSample { id: 0, root: 0, members: vec![0, 1] },
            RrrSample { id: 1, root: 1, members: vec![1] },
        ];
        let filter: HashSet<u32> = [0u32, 3].into_iter().collect();
        let sets = build_covering_sets(&samples, Some(&filter)).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0], CoveringSet { vertex: 0, samples: vec![0] });
        assert_eq!(sets[1], CoveringSet { vertex: 3, samples: vec![] });
    }

    #[test]
    fn duplicate_sample_ids_are_rejected() {
        let samples = vec![
            RrrSample { id: 4, root: 0, members: vec![0] },
            RrrSample { id: 4, root: 1, members: vec![1] },
        ];
        assert!(matches!(build_covering_sets(&samples, None), Err(Error::Integrity(_))));
    }

    #[test]
    fn inversion_round_trips_membership_matrix() {
        let g = chain_ic(0.5);
        let batch = generate_batch(&g, Model::IndependentCascade, 0, 200, 23).unwrap();
        let sets = build_covering_sets(&batch, None).unwrap();

        // re-expand and compare against the original membership
        let mut rebuilt: std::collections::BTreeMap<u32, Vec<u32>> = std::collections::BTreeMap::new();
        for cs in &sets {
            for &sid in &cs.samples {
                rebuilt.entry(sid).or_default().push(cs.vertex);
            }
        }
        for s in &batch {
            let mut members = rebuilt.remove(&s.id).unwrap_or_default();
            members.sort_unstable();
            assert_eq!(members, s.members, "sample {} membership drifted", s.id);
        }
        assert!(rebuilt.is_empty());

        // mass balance both ways
        let total_memberships: usize = batch.iter().map(|s| s.members.len()).sum();
        let total_coverings: usize = sets.iter().map(|c| c.samples.len()).sum();
        assert_eq!(total_memberships, total_coverings);
    }

    #[test]
    fn dump_format_is_line_per_sample() {
        let samples = vec![RrrSample { id: 3, root: 1, members: vec![0, 1, 4] }];
        assert_eq!(dump_batch(&samples), "3: 1: 0,1,4\n");
    }
}
