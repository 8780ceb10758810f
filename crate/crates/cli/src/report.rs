//! Structured-text run reports: key/value and table sections, deterministic
//! formatting so two runs with the same seed diff clean outside `[timings]`.
//!
//! Schema (`greediris-report v1`): a header line, then sections introduced by
//! `[name]` lines. Key/value sections hold `key = value` lines; table
//! sections hold one space-separated header row and data rows. The
//! `[timings]` section is always last and is the only place wall-clock
//! values appear.

use greediris::cover::Solution;
use greediris::driver::{OpimOutcome, RunConfig, RunOutcome};
use greediris::graph::Graph;
use greediris::runtime::{Execution, PhaseTimings, ReceiverDiagnostics, SenderStats};

pub const REPORT_HEADER: &str = "greediris-report v1";
pub const BENCH_HEADER: &str = "greediris-bench v1";

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(header: &str) -> Report {
        Report { lines: vec![header.to_string()] }
    }

    pub fn section(&mut self, name: &str) -> &mut Report {
        self.lines.push(String::new());
        self.lines.push(format!("[{name}]"));
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Report {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn kv_f(&mut self, key: &str, value: f64) -> &mut Report {
        self.lines.push(format!("{key} = {value:.6}"));
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Report {
        self.lines.push(cells.join(" "));
        self
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

fn fmt_list<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(" ")
    }
}

pub fn config_section(report: &mut Report, config: &RunConfig, graph: &Graph, input: &str, seed: u64, trials: u64) {
    report.section("config");
    report.kv("schema", "v1");
    report.kv("input", input);
    report.kv("n", graph.n());
    report.kv("edges", graph.edge_count());
    report.kv("model", config.model);
    report.kv("mode", config.mode.as_str());
    report.kv("k", config.k);
    report.kv_f("epsilon", config.epsilon);
    report.kv_f("delta", config.delta);
    report.kv_f("alpha", config.alpha);
    report.kv_f("ell", config.ell);
    report.kv("workers", config.m);
    report.kv("bucket_workers", config.bucket_workers);
    match config.bucket_override {
        Some(b) => report.kv("buckets", b),
        None => report.kv("buckets", "auto"),
    };
    report.kv("opim_budget", config.opim_budget);
    report.kv("seed", seed);
    report.kv("trials", trials);
    let execution = match config.execution {
        Execution::Threaded => "threaded",
        Execution::Wire => "wire",
        Execution::Serialized { .. } => "serialized",
    };
    report.kv("execution", execution);
}

pub fn guarantee_section(report: &mut Report, config: &RunConfig) {
    use greediris::driver::{truncated_guarantee, worst_case_guarantee};
    report.section("guarantees");
    // recomputed from the configuration at emit time
    let local = truncated_guarantee(config.alpha).unwrap_or(0.0);
    report.kv_f("local_ratio", local);
    report.kv_f("global_ratio", 0.5 - config.delta);
    report.kv_f("worst_case", worst_case_guarantee(config).unwrap_or(f64::NAN));
}

pub fn solution_section(report: &mut Report, solution: &Solution, graph: &Graph) {
    report.section("solution");
    report.kv("seed_count", solution.seeds.len());
    report.kv("coverage", solution.coverage);
    report.kv("universe", solution.universe_size);
    let labels = solution.seeds.iter().map(|&v| graph.label(v));
    report.kv("seeds", fmt_list(labels));
    report.kv("marginals", fmt_list(solution.marginals.iter()));
}

pub fn rounds_section(report: &mut Report, outcome: &RunOutcome) {
    report.section("rounds");
    report.row(&["round theta_hat coverage influence_estimate lower_bound passed".into()]);
    for r in &outcome.rounds {
        report.row(&[format!(
            "{} {} {} {:.6} {:.6} {}",
            r.round_index, r.theta_hat, r.coverage, r.influence_estimate, r.lower_bound, r.passed
        )]);
    }
    report.kv("converged", outcome.converged);
    report.kv("final_theta", outcome.final_theta);
    report.kv_f("ell_adjusted", outcome.ell_adjusted);
}

pub fn opim_rounds_section(report: &mut Report, outcome: &OpimOutcome) {
    report.section("opim_rounds");
    report.row(&["round theta r1 r2 cov_r1 cov_r2 sigma_low sigma_up guarantee".into()]);
    for r in &outcome.rounds {
        report.row(&[format!(
            "{} {} {} {} {} {} {:.6} {:.6} {:.6}",
            r.round_index,
            r.theta_hat,
            r.r1_size,
            r.r2_size,
            r.cov_r1,
            r.cov_r2,
            r.sigma_low,
            r.sigma_up,
            r.guarantee
        )]);
    }
    report.kv("converged", outcome.converged);
    report.kv_f("instance_guarantee", outcome.guarantee);
    report.kv_f("approx_ratio", outcome.approx_ratio);
    report.kv_f("target", outcome.target);
}

pub fn influence_section(report: &mut Report, estimate: &greediris::diffusion::InfluenceEstimate) {
    report.section("influence");
    report.kv_f("mean", estimate.mean);
    report.kv_f("stderr", estimate.stderr);
    report.kv("trials", estimate.trials);
}

pub fn diagnostics_section(
    report: &mut Report,
    receiver: Option<&ReceiverDiagnostics>,
    senders: &[SenderStats],
) {
    report.section("diagnostics");
    match receiver {
        Some(d) => {
            report.kv("seed_messages", d.seed_messages);
            report.kv("stream_lower_bound", d.lower_bound);
            report.kv("bucket_count", d.bucket_count);
            report.kv("bucket_occupancy", fmt_list(d.bucket_occupancy.iter()));
            report.kv("duplicate_skips", d.duplicate_skips);
            report.kv("bucket_applications", d.applications);
        }
        None => {
            report.kv("seed_messages", 0);
        }
    }
    report.kv("messages_per_sender", fmt_list(senders.iter().map(|s| s.messages_sent)));
    report.kv("truncation_cut", fmt_list(senders.iter().map(|s| s.truncation_cut)));
}

pub fn timings_section(report: &mut Report, timings: &PhaseTimings) {
    report.section("timings");
    report.kv_f("sampling_s", timings.sampling_s);
    report.kv_f("shuffle_s", timings.shuffle_s);
    report.kv_f("sender_select_s", timings.sender_select_s);
    report.kv_f("receiver_select_s", timings.receiver_select_s);
    report.kv_f("total_s", timings.total_s);
}
