//! Forward Monte-Carlo simulation of IC and LT diffusion, the quality
//! yardstick for seed sets.
//!
//! A trial is pure in `(graph, seeds, model, trial_seed)`. Linear-threshold
//! trials draw each vertex's threshold from a per-vertex keyed hash, so the
//! value does not depend on the order the cascade first touches it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Model};
use crate::rng::{keyed_rng, mix3, stream};

/// Monte-Carlo influence estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Uniform [0, 1) from a hash, for order-independent per-vertex thresholds.
fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Default)]
struct TrialScratch {
    mark: Vec<u32>,
    weight_in: Vec<f64>,
    epoch: u32,
}

impl TrialScratch {
    fn begin(&mut self, n: usize) -> u32 {
        if self.mark.len() < n {
            self.mark.resize(n, 0);
            self.weight_in.resize(n, 0.0);
        }
        if self.epoch >= u32::MAX - 1 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 2; // even = threshold-touched, odd (epoch+1) = active
        self.epoch
    }
}

/// Run one diffusion trial and count activations at quiescence.
pub fn simulate_once(graph: &Graph, seeds: &[u32], model: Model, trial_seed: u64) -> Result<usize> {
    let mut scratch = TrialScratch::default();
    simulate_trial(graph, seeds, model, trial_seed, &mut scratch, None)
}

/// One trial's activations grouped into rounds (seeds first), for replaying a
/// cascade. Consumes randomness identically to [`simulate_once`], so the wave
/// totals agree with the counted trial for the same seed.
pub fn cascade_waves(
    graph: &Graph,
    seeds: &[u32],
    model: Model,
    trial_seed: u64,
) -> Result<Vec<Vec<u32>>> {
    let mut scratch = TrialScratch::default();
    let mut waves = Vec::new();
    simulate_trial(graph, seeds, model, trial_seed, &mut scratch, Some(&mut waves))?;
    Ok(waves)
}

fn simulate_once_with(
    graph: &Graph,
    seeds: &[u32],
    model: Model,
    trial_seed: u64,
    scratch: &mut TrialScratch,
) -> Result<usize> {
    simulate_trial(graph, seeds, model, trial_seed, scratch, None)
}

fn simulate_trial(
    graph: &Graph,
    seeds: &[u32],
    model: Model,
    trial_seed: u64,
    scratch: &mut TrialScratch,
    mut waves: Option<&mut Vec<Vec<u32>>>,
) -> Result<usize> {
    graph.require_prepared(model)?;
    let n = graph.n();
    for &s in seeds {
        if s as usize >= n {
            return Err(Error::Parameter(format!("seed {s} outside [0, {n})")));
        }
    }
    let touched = scratch.begin(n);
    let active = touched + 1;
    let mut frontier: Vec<u32> = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if scratch.mark[s as usize] != active {
            scratch.mark[s as usize] = active;
            frontier.push(s);
        }
    }
    let mut count = frontier.len();
    if let Some(w) = waves.as_deref_mut() {
        w.push(frontier.clone());
    }

    match model {
        Model::IndependentCascade => {
            // each newly active vertex attempts each out-edge exactly once
            let mut rng = keyed_rng(trial_seed, stream::TRIAL, 0);
            let mut current = frontier;
            while !current.is_empty() {
                let mut next = Vec::new();
                for &u in &current {
                    for (v, w) in graph.out_edges(u) {
                        if scratch.mark[v as usize] != active && rng.gen::<f64>() < w {
                            scratch.mark[v as usize] = active;
                            next.push(v);
                            count += 1;
                        }
                    }
                }
                if let (Some(w), false) = (waves.as_deref_mut(), next.is_empty()) {
                    w.push(next.clone());
                }
                current = next;
            }
        }
        Model::LinearThreshold => {
            // synchronous rounds: v activates once its active in-neighbor
            // weight reaches tau_v, drawn once per (trial, vertex)
            let tau =
                |v: u32| unit_from_hash(mix3(trial_seed, stream::LT_THRESHOLD, v as u64));
            let mut current = frontier;
            while !current.is_empty() {
                let mut next = Vec::new();
                for &u in &current {
                    for (v, w) in graph.out_edges(u) {
                        let vi = v as usize;
                        if scratch.mark[vi] == active {
                            continue;
                        }
                        if scratch.mark[vi] != touched {
                            scratch.mark[vi] = touched;
                            scratch.weight_in[vi] = 0.0;
                        }
                        scratch.weight_in[vi] += w;
                        if scratch.weight_in[vi] >= tau(v) {
                            scratch.mark[vi] = active;
                            next.push(v);
                            count += 1;
                        }
                    }
                }
                if let (Some(w), false) = (waves.as_deref_mut(), next.is_empty()) {
                    w.push(next.clone());
                }
                current = next;
            }
        }
    }
    Ok(count)
}

/// Mean and standard error over independent trials with derived trial seeds.
pub fn expected_influence(
    graph: &Graph,
    seeds: &[u32],
    model: Model,
    trials: u64,
    base_seed: u64,
) -> Result<InfluenceEstimate> {
    if trials < 1 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let mut scratch = TrialScratch::default();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for t in 0..trials {
        let trial_seed = mix3(base_seed, stream::TRIAL, t);
        let x = simulate_once_with(graph, seeds, model, trial_seed, &mut scratch)? as f64;
        sum += x;
        sumsq += x * x;
    }
    let mean = sum / trials as f64;
    let stderr = if trials == 1 {
        0.0
    } else {
        let var = (sumsq - sum * sum / trials as f64) / (trials - 1) as f64;
        (var.max(0.0) / trials as f64).sqrt()
    };
    Ok(InfluenceEstimate { mean, stderr, trials })
}
