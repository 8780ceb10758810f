//! Command-line driver for RIS-based influence maximization over the
//! simulated cluster. `GREEDIRIS_LOG` controls log verbosity.

mod report;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use greediris::diffusion::expected_influence;
use greediris::driver::{run_imm, run_opim, Mode, RunConfig};
use greediris::graph::{load_edge_list, Graph, Model};
use greediris::rng::derive_seed;
use greediris::runtime::{run_round, Execution, RoundConfig};

use report::{Report, BENCH_HEADER, REPORT_HEADER};

#[derive(Parser)]
#[command(name = "greediris", version, about = "RIS influence maximization with distributed-streaming seed selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select seeds on a graph and emit a run report
    Run(Box<RunArgs>),
    /// Sweep worker counts and truncation factors against a sequential baseline
    Bench(Box<BenchArgs>),
    /// Convert an edge list into the binary graph cache
    Convert(ConvertArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Input graph path
    #[arg(long)]
    input: PathBuf,
    /// Input format
    #[arg(long, default_value = "edgelist")]
    format: GraphFormat,
    /// Treat edge-list lines as undirected (emit both directions)
    #[arg(long)]
    undirected: bool,
    /// Diffusion model
    #[arg(long, default_value = "ic")]
    model: String,
    /// Lower bound for generated edge weights
    #[arg(long, default_value_t = 0.0)]
    weight_lo: f64,
    /// Upper bound for generated edge weights
    #[arg(long, default_value_t = 0.1)]
    weight_hi: f64,
}

#[derive(Clone, clap::ValueEnum)]
enum GraphFormat {
    Edgelist,
    Binary,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Seed budget (default 100; 1000 in opim mode)
    #[arg(long)]
    k: Option<usize>,
    /// Sampling precision (default 0.13; 0.01 in opim mode)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Streaming bucket spacing (default 0.077; 0.0562 in opim mode)
    #[arg(long)]
    delta: Option<f64>,
    /// Truncation fraction: each sender streams ceil(alpha * k) seeds
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Cluster size m: one receiver plus m-1 senders
    #[arg(long, default_value_t = 2)]
    workers: u32,
    /// Bucket lanes at the receiver
    #[arg(long, default_value_t = 1)]
    bucket_workers: usize,
    /// Explicit bucket-count override
    #[arg(long)]
    buckets: Option<usize>,
    /// Outer loop: sequential | imm | opim
    #[arg(long, default_value = "sequential")]
    mode: String,
    /// Sample budget for opim mode (default 2^20)
    #[arg(long)]
    opim_budget: Option<u64>,
    /// Failure-probability exponent
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Master seed; weight/sampling/partition/scheduler seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo trials for the influence estimate
    #[arg(long, default_value_t = 64)]
    trials: u64,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Serialize message consumption under a seeded scheduler
    #[arg(long)]
    deterministic: bool,
    /// Debug: dump the final sample universe as "id: root: v1,v2,..." lines
    #[arg(long)]
    dump_samples: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Worker counts to sweep
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    sweep_workers: Vec<u32>,
    /// Truncation factors to sweep
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    sweep_alpha: Vec<f64>,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Cache destination
    #[arg(long)]
    output: PathBuf,
    /// Prepare weights before caching so later runs skip generation
    #[arg(long)]
    prepare: bool,
    /// Seed for weight generation when --prepare is set
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GREEDIRIS_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Convert(args) => cmd_convert(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_graph(args: &GraphArgs, weight_seed: u64) -> anyhow::Result<Graph> {
    let model = Model::parse(&args.model)?;
    let graph = match args.format {
        GraphFormat::Edgelist => {
            let list = load_edge_list(&args.input, !args.undirected)
                .with_context(|| format!("reading {}", args.input.display()))?;
            Graph::from_edge_list(list)
        }
        GraphFormat::Binary => Graph::load_cache(&args.input)
            .with_context(|| format!("reading cache {}", args.input.display()))?,
    };
    if graph.model() == Some(model) {
        return Ok(graph);
    }
    log::info!("preparing weights: model {model}, range [{}, {}]", args.weight_lo, args.weight_hi);
    Ok(graph.prepare_weights(model, args.weight_lo, args.weight_hi, weight_seed)?)
}

fn build_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let model = Model::parse(&args.graph.model)?;
    let mode = Mode::parse(&args.mode)?;
    let mut config = RunConfig::new(model, mode, args.seed);
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(epsilon) = args.epsilon {
        config.epsilon = epsilon;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if let Some(budget) = args.opim_budget {
        config.opim_budget = budget;
    }
    config.alpha = args.alpha;
    config.ell = args.ell;
    config.m = args.workers;
    config.bucket_workers = args.bucket_workers;
    config.bucket_override = args.buckets;
    if args.deterministic {
        config.execution = Execution::Serialized { scheduler_seed: config.seeds.scheduler };
    }
    config.validate()?;
    Ok(config)
}

fn emit(report: &Report, output: Option<&Path>) -> anyhow::Result<()> {
    let text = report.render();
    match output {
        Some(path) => std::fs::write(path, &text)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let config = build_config(args)?;
    let graph = load_graph(&args.graph, config.seeds.graph_weights)?;
    log::info!("loaded graph: n = {}, edges = {}", graph.n(), graph.edge_count());

    let mut report = Report::new(REPORT_HEADER);
    let input = args.graph.input.display().to_string();
    report::config_section(&mut report, &config, &graph, &input, args.seed, args.trials);
    report::guarantee_section(&mut report, &config);

    let trial_seed = derive_seed(args.seed, 5);
    let (solution, timings) = match config.mode {
        Mode::Opim => {
            let outcome = run_opim(&graph, &config)?;
            report::opim_rounds_section(&mut report, &outcome);
            report::solution_section(&mut report, &outcome.solution, &graph);
            report::diagnostics_section(&mut report, None, &[]);
            (outcome.solution, outcome.timings)
        }
        _ => {
            let outcome = run_imm(&graph, &config)?;
            report::rounds_section(&mut report, &outcome);
            report::solution_section(&mut report, &outcome.solution, &graph);
            report::diagnostics_section(&mut report, outcome.receiver.as_ref(), &outcome.sender_stats);
            (outcome.solution, outcome.timings)
        }
    };

    let estimate =
        expected_influence(&graph, &solution.seeds, config.model, args.trials, trial_seed)?;
    // influence comes after solution but before timings so reports diff clean
    report::influence_section(&mut report, &estimate);
    report::timings_section(&mut report, &timings);

    if let Some(path) = &args.dump_samples {
        let theta = u32::try_from(solution.universe_size)
            .map_err(|_| anyhow::anyhow!("universe too large to dump"))?;
        let batch = greediris::sampling::generate_batch(
            &graph,
            config.model,
            0,
            theta,
            config.seeds.sampling,
        )?;
        std::fs::write(path, greediris::sampling::dump_batch(&batch))
            .with_context(|| format!("writing sample dump to {}", path.display()))?;
    }
    emit(&report, args.output.as_deref())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let mut base_args = args.run.clone();
    base_args.mode = "sequential".into();
    let config = build_config(&base_args)?;
    let graph = load_graph(&args.run.graph, config.seeds.graph_weights)?;
    let trial_seed = derive_seed(args.run.seed, 5);

    // sequential baseline fixes the sample budget every sweep row reuses,
    // so all rows select over the identical sample universe
    let baseline = run_imm(&graph, &config)?;
    if baseline.final_theta > u32::MAX as u64 {
        bail!("sample budget {} too large for a sweep", baseline.final_theta);
    }
    let theta = baseline.final_theta as u32;
    let base_inf = expected_influence(
        &graph,
        &baseline.solution.seeds,
        config.model,
        args.run.trials,
        trial_seed,
    )?;

    let mut report = Report::new(BENCH_HEADER);
    let input = args.run.graph.input.display().to_string();
    report::config_section(&mut report, &config, &graph, &input, args.run.seed, args.run.trials);
    report.section("results");
    report.row(&[
        "row m alpha theta coverage influence delta_pct sampling_s shuffle_s sender_s receiver_s"
            .into(),
    ]);
    report.row(&[format!(
        "baseline - - {} {} {:.6} 0.000000 {:.6} {:.6} {:.6} {:.6}",
        theta,
        baseline.solution.coverage,
        base_inf.mean,
        baseline.timings.sampling_s,
        baseline.timings.shuffle_s,
        baseline.timings.sender_select_s,
        baseline.timings.receiver_select_s,
    )]);

    for &m in &args.sweep_workers {
        for &alpha in &args.sweep_alpha {
            let round_cfg = RoundConfig {
                k: config.k,
                alpha,
                delta: config.delta,
                m,
                bucket_workers: config.bucket_workers,
                bucket_override: config.bucket_override,
                sampling_seed: config.seeds.sampling,
                partition_seed: config.seeds.partition,
                execution: if args.run.deterministic {
                    Execution::Serialized { scheduler_seed: config.seeds.scheduler }
                } else {
                    Execution::Threaded
                },
            };
            let outcome = run_round(&graph, config.model, theta, &round_cfg)?;
            let inf = expected_influence(
                &graph,
                &outcome.solution.seeds,
                config.model,
                args.run.trials,
                trial_seed,
            )?;
            let delta_pct = (inf.mean - base_inf.mean) / base_inf.mean * 100.0;
            report.row(&[format!(
                "sweep {} {:.3} {} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
                m,
                alpha,
                theta,
                outcome.solution.coverage,
                inf.mean,
                delta_pct,
                outcome.timings.sampling_s,
                outcome.timings.shuffle_s,
                outcome.timings.sender_select_s,
                outcome.timings.receiver_select_s,
            )]);
        }
    }
    emit(&report, args.run.output.as_deref())
}

fn cmd_convert(args: &ConvertArgs) -> anyhow::Result<()> {
    let mut graph = match args.graph.format {
        GraphFormat::Edgelist => {
            let list = load_edge_list(&args.graph.input, !args.graph.undirected)
                .with_context(|| format!("reading {}", args.graph.input.display()))?;
            Graph::from_edge_list(list)
        }
        GraphFormat::Binary => Graph::load_cache(&args.graph.input)?,
    };
    if args.prepare {
        let model = Model::parse(&args.graph.model)?;
        graph = graph.prepare_weights(
            model,
            args.graph.weight_lo,
            args.graph.weight_hi,
            derive_seed(args.seed, 1),
        )?;
    }
    graph.save_cache(&args.output)?;
    println!(
        "cached {} vertices, {} edges -> {}",
        graph.n(),
        graph.edge_count(),
        args.output.display()
    );
    Ok(())
}
