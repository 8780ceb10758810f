//! The outer RIS loops: IMM martingale rounds with goodness-checked sample
//! doubling, the OPIM two-half variant with instance-wise guarantees, and the
//! closed-form worst-case guarantee calculators.
//!
//! Sample-size formulas follow the standard IMM instantiation with
//! `eps' = sqrt(2) * eps`; the per-run failure exponent is widened to
//! `ell * (1 + ln 2 / ln n)` to absorb the union over rounds. All constants
//! live here and are surfaced in run reports.

use crate::clock::Stopwatch;
use crate::cover::{lazy_greedy_max_cover, GreedyMode, Solution};
use crate::error::{Error, Result};
use crate::graph::{Graph, Model};
use crate::rng::derive_seed;
use crate::runtime::{
    execute_selection, partition_vertices, rank_slice, run_round, shuffle_covering_sets,
    Execution, LocalCoveringSets, PhaseTimings, ReceiverDiagnostics, RoundConfig, RoundOutcome,
    SenderStats,
};
use crate::sampling::{build_covering_sets, generate_batch, RrrSample, SampleScratch};

/// Sub-seeds for the independent random decisions of one run.
#[derive(Debug, Clone, Copy)]
pub struct SeedPack {
    pub graph_weights: u64,
    pub sampling: u64,
    pub partition: u64,
    pub scheduler: u64,
}

impl SeedPack {
    /// Fan a master seed out into the four streams.
    pub fn derive(master: u64) -> SeedPack {
        SeedPack {
            graph_weights: derive_seed(master, 1),
            sampling: derive_seed(master, 2),
            partition: derive_seed(master, 3),
            scheduler: derive_seed(master, 4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Imm,
    Opim,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" => Ok(Mode::Sequential),
            "imm" => Ok(Mode::Imm),
            "opim" => Ok(Mode::Opim),
            other => Err(Error::Parameter(format!(
                "unknown mode '{other}', expected sequential|imm|opim"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sequential => "sequential",
            Mode::Imm => "imm",
            Mode::Opim => "opim",
        }
    }
}

/// Everything one run needs. Defaults mirror the usual IMM evaluation setup
/// (`k = 100, eps = 0.13, delta = 0.077, alpha = 1`); OPIM mode swaps in
/// `k = 1000, eps = 0.01, delta = 0.0562` and a `2^20` sample budget.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub k: usize,
    pub epsilon: f64,
    /// Failure-probability exponent: the run fails with probability `n^-ell`.
    pub ell: f64,
    /// Streaming bucket spacing.
    pub delta: f64,
    /// Truncation fraction: senders stream `ceil(alpha * k)` of their seeds.
    pub alpha: f64,
    pub m: u32,
    pub model: Model,
    pub mode: Mode,
    pub seeds: SeedPack,
    pub bucket_workers: usize,
    pub bucket_override: Option<usize>,
    pub opim_budget: u64,
    pub execution: Execution,
}

impl RunConfig {
    pub fn new(model: Model, mode: Mode, master_seed: u64) -> RunConfig {
        let (k, epsilon, delta) = match mode {
            Mode::Opim => (1000, 0.01, 0.0562),
            _ => (100, 0.13, 0.077),
        };
        RunConfig {
            k,
            epsilon,
            ell: 1.0,
            delta,
            alpha: 1.0,
            m: 2,
            model,
            mode,
            seeds: SeedPack::derive(master_seed),
            bucket_workers: 1,
            bucket_override: None,
            opim_budget: 1 << 20,
            execution: Execution::Threaded,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon {} must lie in (0, 1)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Parameter(format!("delta {} must lie in (0, 1/2)", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Parameter(format!("alpha {} must lie in (0, 1]", self.alpha)));
        }
        if self.k < 1 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.ell <= 0.0 {
            return Err(Error::Parameter("ell must be positive".into()));
        }
        if self.mode != Mode::Sequential && self.m < 2 {
            return Err(Error::Config(format!("distributed mode needs m >= 2, got {}", self.m)));
        }
        Ok(())
    }

    fn round_config(&self, scheduler_round: u64) -> RoundConfig {
        let execution = match self.execution {
            Execution::Serialized { scheduler_seed } => Execution::Serialized {
                scheduler_seed: derive_seed(scheduler_seed, scheduler_round),
            },
            other => other,
        };
        RoundConfig {
            k: self.k,
            alpha: self.alpha,
            delta: self.delta,
            m: self.m,
            bucket_workers: self.bucket_workers,
            bucket_override: self.bucket_override,
            sampling_seed: self.seeds.sampling,
            partition_seed: self.seeds.partition,
            execution,
        }
    }
}

/// `ln C(n, k)` by summing logs; exact enough for sample-size formulas.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (1..=k).map(|i| (((n - k + i) as f64) / i as f64).ln()).sum()
}

/// The widened failure exponent accounting for the union over rounds.
pub fn adjusted_ell(ell: f64, n: usize) -> f64 {
    ell * (1.0 + std::f64::consts::LN_2 / (n as f64).ln())
}

/// First-round sample target `theta_1 = ceil(lambda' / (n/2))` with
/// `lambda' = (2 + 2/3 eps') (ln C(n,k) + ell ln n + ln log2 n) n / eps'^2`.
pub fn estimate_theta0(n: usize, k: usize, epsilon: f64, ell: f64) -> Result<u64> {
    if k < 1 || k > n {
        return Err(Error::Parameter(format!("k = {k} must lie in [1, n = {n}]")));
    }
    if n < 2 {
        return Err(Error::Parameter("need at least 2 vertices".into()));
    }
    let nf = n as f64;
    let eps_p = std::f64::consts::SQRT_2 * epsilon;
    let log_terms = ln_binomial(n, k) + ell * nf.ln() + nf.log2().ln();
    let lambda = (2.0 + 2.0 / 3.0 * eps_p) * log_terms * nf / (eps_p * eps_p);
    Ok((lambda / (nf / 2.0)).ceil() as u64)
}

/// Goodness test for martingale round `x`: with coverage fraction `F`, the
/// influence estimate `I = n F` must clear `(1 + eps') n / 2^x`. Returns the
/// pass flag and the certified lower bound `I / (1 + eps')` either way.
pub fn check_goodness(
    solution: &Solution,
    universe_size: u64,
    n: usize,
    round_index: u32,
    epsilon: f64,
) -> Result<(bool, f64)> {
    if universe_size == 0 {
        return Err(Error::Parameter("universe must be nonempty".into()));
    }
    if solution.coverage > universe_size {
        return Err(Error::Parameter("coverage exceeds universe".into()));
    }
    let eps_p = std::f64::consts::SQRT_2 * epsilon;
    let fraction = solution.coverage as f64 / universe_size as f64;
    let estimate = n as f64 * fraction;
    let threshold = (1.0 + eps_p) * (n as f64 / 2f64.powi(round_index as i32));
    Ok((estimate >= threshold, estimate / (1.0 + eps_p)))
}

/// Final sample size `theta = ceil(lambda* / LB)` with
/// `lambda* = 2n ((1 - 1/e) a + b)^2 / eps^2`, `a = sqrt(ell ln n + ln 2)`,
/// `b = sqrt((1 - 1/e)(ln C(n,k) + ell ln n + ln 2))`.
pub fn final_theta(n: usize, k: usize, epsilon: f64, ell: f64, lb: f64) -> Result<u64> {
    if lb <= 0.0 {
        return Err(Error::Parameter(format!("lower bound {lb} must be positive")));
    }
    let nf = n as f64;
    let one_e = 1.0 - (-1f64).exp();
    let a = (ell * nf.ln() + std::f64::consts::LN_2).sqrt();
    let b = (one_e * (ln_binomial(n, k) + ell * nf.ln() + std::f64::consts::LN_2)).sqrt();
    let lambda = 2.0 * nf * (one_e * a + b).powi(2) / (epsilon * epsilon);
    Ok((lambda / lb).ceil() as u64)
}

/// Two-stage composition `local * global / (local + global) - epsilon`.
/// May be negative, signaling no positive worst-case guarantee.
pub fn combined_guarantee(local_ratio: f64, global_ratio: f64, epsilon: f64) -> Result<f64> {
    if !(local_ratio > 0.0 && local_ratio <= 1.0) || !(global_ratio > 0.0 && global_ratio <= 1.0) {
        return Err(Error::Parameter("approximation ratios must lie in (0, 1]".into()));
    }
    Ok(local_ratio * global_ratio / (local_ratio + global_ratio) - epsilon)
}

/// Local ratio of a sender that streams only `ceil(alpha * k)` of its seeds.
pub fn truncated_guarantee(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} must lie in (0, 1]")));
    }
    Ok(1.0 - (-alpha).exp())
}

/// The worst-case ratio a configuration promises: the full IMM ratio for
/// sequential runs, the truncated/streaming composition for distributed ones.
pub fn worst_case_guarantee(config: &RunConfig) -> Result<f64> {
    match config.mode {
        Mode::Sequential => Ok(1.0 - (-1f64).exp() - config.epsilon),
        _ => combined_guarantee(
            truncated_guarantee(config.alpha)?,
            0.5 - config.delta,
            config.epsilon,
        ),
    }
}

/// One martingale round's record.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub round_index: u32,
    pub theta_hat: u64,
    pub coverage: u64,
    pub influence_estimate: f64,
    pub lower_bound: f64,
    pub passed: bool,
}

/// Output of an IMM or sequential run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub solution: Solution,
    pub rounds: Vec<RoundState>,
    /// False when the goodness check never passed within the round budget.
    pub converged: bool,
    pub final_theta: u64,
    pub ell_adjusted: f64,
    pub timings: PhaseTimings,
    pub sender_stats: Vec<SenderStats>,
    pub receiver: Option<ReceiverDiagnostics>,
}

/// Retained sample store for sequential selection; distributed rounds
/// regenerate their slices instead, which is id-identical because sampling is
/// pure in `(seed, id)`.
struct SampleStore {
    samples: Vec<RrrSample>,
    scratch: SampleScratch,
}

impl SampleStore {
    fn extend_to(&mut self, graph: &Graph, model: Model, theta: u64, seed: u64) -> Result<()> {
        if theta > u32::MAX as u64 {
            return Err(Error::Parameter(format!("theta {theta} exceeds the u32 sample-id space")));
        }
        let from = self.samples.len() as u32;
        for id in from..theta as u32 {
            self.samples.push(crate::sampling::sample_rrr_with(
                graph,
                model,
                id,
                seed,
                &mut self.scratch,
            )?);
        }
        Ok(())
    }
}

fn sequential_outcome(solution: Solution, select_s: f64) -> RoundOutcome {
    RoundOutcome {
        global: solution.clone(),
        locals: vec![],
        sender_stats: vec![],
        receiver: ReceiverDiagnostics {
            seed_messages: 0,
            lower_bound: 0,
            bucket_count: 0,
            bucket_occupancy: vec![],
            bucket_seeds: vec![],
            bucket_covered: vec![],
            duplicate_skips: 0,
            applications: 0,
        },
        timings: PhaseTimings { sender_select_s: select_s, ..Default::default() },
        solution,
    }
}

/// IMM martingale rounds: estimate the first sample target, double it until
/// the goodness check certifies a lower bound on OPT (at most `ceil(log2 n)`
/// rounds, retained samples keep their ids), then top samples up to the final
/// theta and select once more. An unconverged loop returns the last round's
/// solution flagged in the outcome rather than erroring.
pub fn run_imm(graph: &Graph, config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    if config.mode == Mode::Opim {
        return Err(Error::Parameter("opim mode is driven by run_opim".into()));
    }
    graph.require_prepared(config.model)?;
    let n = graph.n();
    let ell_adj = adjusted_ell(config.ell, n);
    let mut theta_hat = estimate_theta0(n, config.k, config.epsilon, ell_adj)?;
    let max_rounds = (n as f64).log2().ceil().max(1.0) as u32;

    let mut store = SampleStore { samples: Vec::new(), scratch: SampleScratch::default() };
    let mut timings = PhaseTimings::default();
    let total = Stopwatch::start();

    let select = |theta: u64, store: &mut SampleStore, round: u64| -> Result<RoundOutcome> {
        match config.mode {
            Mode::Sequential => {
                let watch = Stopwatch::start();
                store.extend_to(graph, config.model, theta, config.seeds.sampling)?;
                let sampling_s = watch.seconds();
                let watch = Stopwatch::start();
                let sets = build_covering_sets(&store.samples[..theta as usize], None)?;
                let solution =
                    lazy_greedy_max_cover(theta as usize, &sets, config.k, GreedyMode::Lazy);
                let mut outcome = sequential_outcome(solution, watch.seconds());
                outcome.timings.sampling_s = sampling_s;
                Ok(outcome)
            }
            _ => {
                if theta > u32::MAX as u64 {
                    return Err(Error::Parameter(format!(
                        "theta {theta} exceeds the u32 sample-id space"
                    )));
                }
                run_round(graph, config.model, theta as u32, &config.round_config(round))
            }
        }
    };

    let mut rounds = Vec::new();
    let mut last: Option<RoundOutcome> = None;
    let mut certified: Option<f64> = None;
    for x in 1..=max_rounds {
        if x > 1 {
            theta_hat *= 2;
        }
        let outcome = select(theta_hat, &mut store, x as u64)?;
        let (passed, lb) = check_goodness(&outcome.solution, theta_hat, n, x, config.epsilon)?;
        log::debug!(
            "round {x}: theta_hat = {theta_hat}, coverage = {}, lb = {lb:.2}, passed = {passed}",
            outcome.solution.coverage
        );
        rounds.push(RoundState {
            round_index: x,
            theta_hat,
            coverage: outcome.solution.coverage,
            influence_estimate: lb * (1.0 + std::f64::consts::SQRT_2 * config.epsilon),
            lower_bound: lb,
            passed,
        });
        accumulate(&mut timings, &outcome.timings);
        last = Some(outcome);
        if passed {
            certified = Some(lb);
            break;
        }
    }

    let converged = certified.is_some();
    let final_theta_v = match certified {
        Some(lb) => final_theta(n, config.k, config.epsilon, ell_adj, lb)?,
        None => theta_hat,
    };
    // top up only; reselect when the final target exceeds what rounds sampled
    let mut final_outcome = last.expect("at least one round ran");
    let selection_theta = final_theta_v.max(theta_hat);
    if selection_theta > theta_hat {
        let outcome = select(selection_theta, &mut store, max_rounds as u64 + 1)?;
        accumulate(&mut timings, &outcome.timings);
        final_outcome = outcome;
    }
    timings.total_s = total.seconds();

    Ok(RunOutcome {
        solution: final_outcome.solution,
        rounds,
        converged,
        final_theta: selection_theta,
        ell_adjusted: ell_adj,
        timings,
        sender_stats: final_outcome.sender_stats,
        receiver: match config.mode {
            Mode::Sequential => None,
            _ => Some(final_outcome.receiver),
        },
    })
}

fn accumulate(into: &mut PhaseTimings, from: &PhaseTimings) {
    into.sampling_s += from.sampling_s;
    into.shuffle_s += from.shuffle_s;
    into.sender_select_s += from.sender_select_s;
    into.receiver_select_s += from.receiver_select_s;
}

/// One OPIM round's validation arithmetic.
#[derive(Debug, Clone)]
pub struct OpimRound {
    pub round_index: u32,
    pub theta_hat: u64,
    pub r1_size: u64,
    pub r2_size: u64,
    pub cov_r1: u64,
    pub cov_r2: u64,
    pub sigma_low: f64,
    pub sigma_up: f64,
    pub guarantee: f64,
}

#[derive(Debug, Clone)]
pub struct OpimOutcome {
    pub solution: Solution,
    pub rounds: Vec<OpimRound>,
    /// Instance guarantee of the returned solution: `sigma_low / sigma_up`.
    pub guarantee: f64,
    /// Selection ratio used in `sigma_up`.
    pub approx_ratio: f64,
    /// Stop once the guarantee reaches this (`approx_ratio - epsilon`).
    pub target: f64,
    pub converged: bool,
    pub timings: PhaseTimings,
}

/// How many samples of `[0, theta)` land in each parity half.
fn half_sizes(theta: u64) -> (u64, u64) {
    (theta.div_ceil(2), theta / 2)
}

/// Count the samples in `batch` covered by `seeds`.
fn count_covered(batch: &[RrrSample], seeds: &[u32], n: usize) -> u64 {
    let mut is_seed = vec![false; n];
    for &s in seeds {
        is_seed[s as usize] = true;
    }
    batch.iter().filter(|s| s.members.iter().any(|&v| is_seed[v as usize])).count() as u64
}

/// OPIM rounds: split each round's samples by id parity into selection (`R1`,
/// even ids) and validation (`R2`, odd ids) halves, select seeds on `R1`
/// through the distributed pipeline, score them on `R2`, and report the
/// instance guarantee `sigma_low / sigma_up`. Samples double until the
/// guarantee reaches `approx_ratio - epsilon` or the budget runs out, in
/// which case the best round so far is returned.
pub fn run_opim(graph: &Graph, config: &RunConfig) -> Result<OpimOutcome> {
    config.validate()?;
    if config.mode != Mode::Opim {
        return Err(Error::Parameter("run_opim requires opim mode".into()));
    }
    graph.require_prepared(config.model)?;
    let n = graph.n();
    let approx_ratio =
        combined_guarantee(truncated_guarantee(config.alpha)?, 0.5 - config.delta, 0.0)?;
    let target = approx_ratio - config.epsilon;
    let ln_inv_delta_fail = config.ell * (n as f64).ln();

    let mut theta_hat = 64u64.max(2 * config.k as u64);
    let mut rounds = Vec::new();
    let mut best: Option<(f64, Solution)> = None;
    let mut timings = PhaseTimings::default();
    let total = Stopwatch::start();
    let mut converged = false;

    let mut round_index = 0u32;
    loop {
        round_index += 1;
        if theta_hat > u32::MAX as u64 {
            return Err(Error::Parameter("theta exceeds the u32 sample-id space".into()));
        }
        let theta = theta_hat as u32;

        // one shared batch per rank slice; R1 = even ids drive selection
        let watch = Stopwatch::start();
        let mut locals = Vec::with_capacity(config.m as usize);
        let mut full_batch = Vec::with_capacity(theta as usize);
        for p in 0..config.m {
            let (lo, hi) = rank_slice(theta, config.m, p);
            let batch = generate_batch(graph, config.model, lo, hi, config.seeds.sampling)?;
            let r1: Vec<RrrSample> = batch.iter().filter(|s| s.id % 2 == 0).cloned().collect();
            locals.push(LocalCoveringSets {
                rank: p,
                id_lo: lo,
                id_hi: hi,
                sets: build_covering_sets(&r1, None)?,
            });
            full_batch.extend(batch);
        }
        timings.sampling_s += watch.seconds();

        let watch = Stopwatch::start();
        let assignment = partition_vertices(n, config.m, config.seeds.partition)?;
        let owned = shuffle_covering_sets(&locals, &assignment)?;
        timings.shuffle_s += watch.seconds();

        let outcome =
            execute_selection(&owned, theta as usize, &config.round_config(round_index as u64))?;
        accumulate(&mut timings, &outcome.timings);
        let solution = outcome.solution;

        let (r1_size, r2_size) = half_sizes(theta_hat);
        let cov_r1 = solution.coverage;
        let r2: Vec<RrrSample> = full_batch.iter().filter(|s| s.id % 2 == 1).cloned().collect();
        let cov_r2 = count_covered(&r2, &solution.seeds, n);

        let c1 = (cov_r1 as f64 * ln_inv_delta_fail / 2.0).sqrt();
        let c2 = (cov_r2 as f64 * ln_inv_delta_fail / 2.0).sqrt();
        let sigma_low = (n as f64 * (cov_r2 as f64 - c2) / r2_size.max(1) as f64).max(0.0);
        let sigma_up = n as f64 * (cov_r1 as f64 + c1) / (r1_size.max(1) as f64 * approx_ratio);
        let guarantee = if sigma_up > 0.0 { sigma_low / sigma_up } else { 0.0 };

        log::debug!(
            "opim round {round_index}: theta = {theta_hat}, cov = {cov_r1}/{cov_r2}, guarantee = {guarantee:.4}"
        );
        rounds.push(OpimRound {
            round_index,
            theta_hat,
            r1_size,
            r2_size,
            cov_r1,
            cov_r2,
            sigma_low,
            sigma_up,
            guarantee,
        });
        if best.as_ref().is_none_or(|(g, _)| guarantee > *g) {
            best = Some((guarantee, solution));
        }
        if guarantee >= target {
            converged = true;
            break;
        }
        if theta_hat * 2 > config.opim_budget {
            break; // budget exhausted, return the best achieved
        }
        theta_hat *= 2;
    }
    timings.total_s = total.seconds();

    let (guarantee, solution) = best.expect("at least one round ran");
    Ok(OpimOutcome { solution, rounds, guarantee, approx_ratio, target, converged, timings })
}
