//! Synthetic graph generation for benchmarks, demos, and end-to-end tests.

use rand::Rng;

use crate::error::Result;
use crate::graph::{EdgeList, Graph, Model};
use crate::rng::keyed_rng;

/// Preferential-attachment edges: a seed clique of `attach + 1` vertices, then
/// each new vertex links to `attach` distinct existing vertices chosen
/// proportionally to degree. Both edge directions are emitted, so the average
/// out-degree is about `2 * attach`.
pub fn scale_free_edges(n: usize, attach: usize, seed: u64) -> Vec<(u32, u32, Option<f64>)> {
    let attach = attach.max(1).min(n.saturating_sub(1));
    let mut rng = keyed_rng(seed, 0x5F, 0);
    let mut edges: Vec<(u32, u32, Option<f64>)> = Vec::new();
    // endpoint list: each vertex appears once per incident undirected edge
    let mut endpoints: Vec<u32> = Vec::new();

    let core = attach + 1;
    for u in 0..core.min(n) {
        for v in 0..u {
            edges.push((u as u32, v as u32, None));
            edges.push((v as u32, u as u32, None));
            endpoints.push(u as u32);
            endpoints.push(v as u32);
        }
    }
    for u in core..n {
        let mut picked: Vec<u32> = Vec::with_capacity(attach);
        while picked.len() < attach {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !picked.contains(&t) {
                picked.push(t);
            }
        }
        for &v in &picked {
            edges.push((u as u32, v, None));
            edges.push((v, u as u32, None));
            endpoints.push(u as u32);
            endpoints.push(v);
        }
    }
    edges
}

/// A prepared scale-free graph with uniform `[lo, hi]` edge weights.
pub fn scale_free_graph(
    n: usize,
    attach: usize,
    model: Model,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<Graph> {
    let edges = scale_free_edges(n, attach, seed);
    let list = EdgeList { n, edges, labels: (0..n as u64).collect() };
    Graph::from_edge_list(list).prepare_weights(model, lo, hi, seed)
}
