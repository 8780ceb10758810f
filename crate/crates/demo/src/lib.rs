//! Browser bindings: three interactive operations over the core pipeline.
//!
//! `generate_network` builds a scale-free graph with a force layout,
//! `select_seeds` runs the martingale loop with distributed-streaming seed
//! selection (serialized scheduler: no threads in wasm), and
//! `simulate_cascade` Monte-Carlo scores the chosen seeds and returns one
//! cascade, wave by wave, for animation. Results cross to JS as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use greediris::diffusion::{cascade_waves, expected_influence};
use greediris::driver::{run_imm, worst_case_guarantee, Mode, RunConfig};
use greediris::graph::{Graph, Model};
use greediris::rng::keyed_rng;
use greediris::runtime::Execution;
use greediris::synthetic::scale_free_graph;

use rand::Rng;

fn to_js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

fn stringify(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(stringify)
}

#[derive(Serialize)]
struct NetworkView {
    n: usize,
    edge_count: usize,
    /// Deduplicated vertex pairs for drawing.
    edges: Vec<(u32, u32)>,
    /// Unit-square layout positions.
    positions: Vec<(f32, f32)>,
    out_degrees: Vec<u32>,
    model: String,
}

#[derive(Serialize)]
struct RoundView {
    round: u32,
    theta_hat: u64,
    coverage: u64,
    lower_bound: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SelectionView {
    seeds: Vec<u32>,
    marginals: Vec<u64>,
    coverage: u64,
    universe: u64,
    converged: bool,
    final_theta: u64,
    rounds: Vec<RoundView>,
    local_coverages: Vec<u64>,
    global_coverage: Option<u64>,
    bucket_occupancy: Vec<usize>,
    stream_lower_bound: Option<u64>,
    worst_case_guarantee: f64,
}

#[derive(Serialize)]
struct CascadeView {
    mean: f64,
    stderr: f64,
    trials: u64,
    waves: Vec<Vec<u32>>,
}

#[derive(Serialize)]
struct GuaranteePoint {
    alpha: f64,
    guarantee: f64,
}

/// Demo session: one graph, its layout, and the last selected seeds.
#[wasm_bindgen]
pub struct Demo {
    graph: Option<Graph>,
    model: Model,
    seeds: Vec<u32>,
}

impl Default for Demo {
    fn default() -> Self {
        Self::new()
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo { graph: None, model: Model::IndependentCascade, seeds: Vec::new() }
    }

    /// Build a scale-free network with uniform `[0, weight_hi]` edge weights
    /// and return nodes, edges, and layout as JSON.
    pub fn generate_network(
        &mut self,
        n: u32,
        attach: u32,
        model: &str,
        weight_hi: f64,
        seed: u32,
    ) -> Result<String, JsValue> {
        self.generate_network_impl(n, attach, model, weight_hi, seed).map_err(to_js)
    }

    /// Run the martingale loop and distributed-streaming selection, returning
    /// seeds, per-round progress, and receiver bucket occupancy as JSON.
    #[allow(clippy::too_many_arguments)]
    pub fn select_seeds(
        &mut self,
        k: u32,
        epsilon: f64,
        delta: f64,
        alpha: f64,
        workers: u32,
        seed: u32,
    ) -> Result<String, JsValue> {
        self.select_seeds_impl(k, epsilon, delta, alpha, workers, seed).map_err(to_js)
    }

    /// Monte-Carlo influence of the selected seeds plus one cascade replay.
    pub fn simulate_cascade(&self, trials: u32, seed: u32) -> Result<String, JsValue> {
        self.simulate_cascade_impl(trials, seed).map_err(to_js)
    }
}

impl Demo {
    fn generate_network_impl(
        &mut self,
        n: u32,
        attach: u32,
        model: &str,
        weight_hi: f64,
        seed: u32,
    ) -> Result<String, String> {
        let model = Model::parse(model).map_err(stringify)?;
        if !(2..=2000).contains(&n) {
            return Err("n must lie in [2, 2000] for the demo".into());
        }
        let graph = scale_free_graph(n as usize, attach as usize, model, 0.0, weight_hi, seed as u64)
            .map_err(stringify)?;

        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for u in 0..n {
            for (v, _) in graph.out_edges(u) {
                if u < v {
                    pairs.push((u, v));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let positions = force_layout(n as usize, &pairs, seed as u64);
        let view = NetworkView {
            n: n as usize,
            edge_count: graph.edge_count(),
            edges: pairs,
            positions,
            out_degrees: (0..n).map(|v| graph.out_degree(v) as u32).collect(),
            model: model.as_str().to_string(),
        };
        self.model = model;
        self.graph = Some(graph);
        self.seeds.clear();
        json(&view)
    }

    #[allow(clippy::too_many_arguments)]
    fn select_seeds_impl(
        &mut self,
        k: u32,
        epsilon: f64,
        delta: f64,
        alpha: f64,
        workers: u32,
        seed: u32,
    ) -> Result<String, String> {
        let graph = self.graph.as_ref().ok_or("generate a network first")?;
        let mode = if workers >= 2 { Mode::Imm } else { Mode::Sequential };
        let mut config = RunConfig::new(self.model, mode, seed as u64);
        config.k = k as usize;
        config.epsilon = epsilon;
        config.delta = delta;
        config.alpha = alpha;
        config.m = workers.max(2);
        config.execution = Execution::Serialized { scheduler_seed: config.seeds.scheduler };
        config.validate().map_err(stringify)?;

        let outcome = run_imm(graph, &config).map_err(stringify)?;
        let view = SelectionView {
            seeds: outcome.solution.seeds.clone(),
            marginals: outcome.solution.marginals.clone(),
            coverage: outcome.solution.coverage,
            universe: outcome.solution.universe_size,
            converged: outcome.converged,
            final_theta: outcome.final_theta,
            rounds: outcome
                .rounds
                .iter()
                .map(|r| RoundView {
                    round: r.round_index,
                    theta_hat: r.theta_hat,
                    coverage: r.coverage,
                    lower_bound: r.lower_bound,
                    passed: r.passed,
                })
                .collect(),
            local_coverages: Vec::new(),
            global_coverage: None,
            bucket_occupancy: outcome
                .receiver
                .as_ref()
                .map(|d| d.bucket_occupancy.clone())
                .unwrap_or_default(),
            stream_lower_bound: outcome.receiver.as_ref().map(|d| d.lower_bound),
            worst_case_guarantee: worst_case_guarantee(&config).map_err(stringify)?,
        };
        self.seeds = outcome.solution.seeds;
        json(&view)
    }

    fn simulate_cascade_impl(&self, trials: u32, seed: u32) -> Result<String, String> {
        let graph = self.graph.as_ref().ok_or("generate a network first")?;
        if self.seeds.is_empty() {
            return Err("select seeds first".into());
        }
        let estimate =
            expected_influence(graph, &self.seeds, self.model, trials.max(1) as u64, seed as u64)
                .map_err(stringify)?;
        let waves =
            cascade_waves(graph, &self.seeds, self.model, seed as u64).map_err(stringify)?;
        json(&CascadeView { mean: estimate.mean, stderr: estimate.stderr, trials: estimate.trials, waves })
    }
}

/// Worst-case composed guarantee as a function of the truncation factor.
#[wasm_bindgen]
pub fn guarantee_curve(delta: f64, epsilon: f64, points: u32) -> Result<String, JsValue> {
    guarantee_curve_impl(delta, epsilon, points).map_err(to_js)
}

fn guarantee_curve_impl(delta: f64, epsilon: f64, points: u32) -> Result<String, String> {
    use greediris::driver::{combined_guarantee, truncated_guarantee};
    let points = points.clamp(2, 512);
    let mut out = Vec::with_capacity(points as usize);
    for i in 1..=points {
        let alpha = i as f64 / points as f64;
        let local = truncated_guarantee(alpha).map_err(stringify)?;
        let guarantee = combined_guarantee(local, 0.5 - delta, epsilon).map_err(stringify)?;
        out.push(GuaranteePoint { alpha, guarantee });
    }
    json(&out)
}

/// Fruchterman-Reingold layout normalized to the unit square, deterministic
/// in the seed.
fn force_layout(n: usize, edges: &[(u32, u32)], seed: u64) -> Vec<(f32, f32)> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = keyed_rng(seed, 0xF0, 0);
    let mut pos: Vec<(f32, f32)> =
        (0..n).map(|_| (rng.gen::<f32>(), rng.gen::<f32>())).collect();
    let area = 1.0f32;
    let k = (area / n as f32).sqrt();
    let iterations = 60;
    let mut disp = vec![(0.0f32, 0.0f32); n];

    for iter in 0..iterations {
        let temp = 0.1 * (1.0 - iter as f32 / iterations as f32);
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let dist = (dx * dx + dy * dy).sqrt().max(1e-4);
                let force = k * k / dist;
                let (fx, fy) = (dx / dist * force, dy / dist * force);
                disp[i].0 += fx;
                disp[i].1 += fy;
                disp[j].0 -= fx;
                disp[j].1 -= fy;
            }
        }
        for &(a, b) in edges {
            let (i, j) = (a as usize, b as usize);
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            let dist = (dx * dx + dy * dy).sqrt().max(1e-4);
            let force = dist * dist / k;
            let (fx, fy) = (dx / dist * force, dy / dist * force);
            disp[i].0 -= fx;
            disp[i].1 -= fy;
            disp[j].0 += fx;
            disp[j].1 += fy;
        }
        for i in 0..n {
            let (dx, dy) = disp[i];
            let len = (dx * dx + dy * dy).sqrt().max(1e-6);
            let step = len.min(temp);
            pos[i].0 += dx / len * step;
            pos[i].1 += dy / len * step;
        }
    }

    // normalize into [0.05, 0.95]^2
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f32::MAX, f32::MIN, f32::MAX, f32::MIN);
    for &(x, y) in &pos {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let sx = (max_x - min_x).max(1e-6);
    let sy = (max_y - min_y).max(1e-6);
    pos.iter()
        .map(|&(x, y)| (0.05 + 0.9 * (x - min_x) / sx, 0.05 + 0.9 * (y - min_y) / sy))
        .collect()
}
