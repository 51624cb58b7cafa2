//! Command-line front end: single experiments, sweeps, timing and posterior
//! snapshots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bugb::acquisition::{Strategy, Z_95_ONE_SIDED};
use bugb::benchmark::{
    aggregate, average_results, default_checkpoints, result_rows, run_experiment, timing_run, write_json,
    write_results_csv, write_table_csv, write_traces_csv, AggregateResult, ExperimentConfig, PolicyId, PolicyParams,
    SummaryEntry,
};
use bugb::environments::{FunctionId, HermiteTable, TestFunction};
use bugb::model::{DEFAULT_SIGMA_F_SQ, DEFAULT_SIGMA_G_SQ};
use bugb::snapshot::predict_snapshot;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "bugb",
    version,
    about = "Value/gradient chain optimiser and regret benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one function/policy/noise configuration.
    Run(RunArgs),
    /// Cross product of functions, policies and noise levels.
    Sweep(SweepArgs),
    /// Wall-clock comparison and scaling measurements.
    Timing(TimingArgs),
    /// Posterior band after a few UCB-driven observations.
    PredictDemo(PredictArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Ucb,
    Thompson,
}

/// Settings shared by every subcommand that builds experiments.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Grid points on the function domain.
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Credible-bound multiplier for chain-model and GP acquisition.
    #[arg(long, default_value_t = Z_95_ONE_SIDED)]
    z: f64,
    /// Chain-model acquisition strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Ucb)]
    strategy: StrategyArg,
    /// Force gradient feedback on for the chain-model policies.
    #[arg(long)]
    gradient_feedback: bool,
    /// Variance of the chain's value-link noise.
    #[arg(long, default_value_t = DEFAULT_SIGMA_F_SQ)]
    sigma_f_sq: f64,
    /// Variance of the chain's gradient random-walk step.
    #[arg(long, default_value_t = DEFAULT_SIGMA_G_SQ)]
    sigma_g_sq: f64,
    /// Prior variance of the first node's value and gradient.
    #[arg(long, default_value_t = 100.0)]
    prior_var: f64,
    /// Observation noise sd assumed by the chain model [default: true noise].
    #[arg(long)]
    model_noise: Option<f64>,
    /// GP signal variance.
    #[arg(long, default_value_t = 1.0)]
    gp_signal_var: f64,
    /// GP length scale [default: domain width / 10].
    #[arg(long)]
    gp_length_scale: Option<f64>,
    /// GP noise variance [default: true noise variance].
    #[arg(long)]
    gp_noise_var: Option<f64>,
    /// Gradient-ascent step size [default: 0.02 * domain width].
    #[arg(long)]
    ga_step: Option<f64>,
    /// Give gradient ascent noiseless gradients.
    #[arg(long)]
    ga_exact_gradient: bool,
}

impl CommonArgs {
    fn params(&self) -> PolicyParams {
        PolicyParams {
            z: self.z,
            strategy: match self.strategy {
                StrategyArg::Ucb => Strategy::Ucb,
                StrategyArg::Thompson => Strategy::Thompson,
            },
            gradient_feedback: self.gradient_feedback.then_some(true),
            sigma_f_sq: self.sigma_f_sq,
            sigma_g_sq: self.sigma_g_sq,
            prior_var: self.prior_var,
            model_noise_sd: self.model_noise,
            gp_signal_var: self.gp_signal_var,
            gp_length_scale: self.gp_length_scale,
            gp_noise_var: self.gp_noise_var,
            ga_step: self.ga_step,
            ga_exact_gradient: self.ga_exact_gradient,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// f1, f2, f3, or a CSV table with columns x,value,gradient.
    #[arg(long)]
    function: String,
    #[arg(long, value_parser = parse_policy, default_value = "bugb")]
    policy: PolicyId,
    /// Observation noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 250)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    replications: u64,
    /// Checkpoints (comma separated) [default: 25,50,100,250 up to the horizon, plus the horizon].
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads for replications.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Also write per-step regret traces.
    #[arg(long)]
    traces: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3")]
    function: Vec<String>,
    #[arg(long, value_delimiter = ',', value_parser = parse_policy,
          default_value = "bugb,bugb-nograd,mab-ucb-tuned,gp-ucb,grad-ascent,uniform")]
    policy: Vec<PolicyId>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1.0,5.0")]
    noise: Vec<f64>,
    #[arg(long, default_value_t = 250)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    replications: u64,
    /// Checkpoints (comma separated) [default: 25,50,100,250 up to the horizon, plus the horizon].
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct TimingArgs {
    #[arg(long, default_value = "f1")]
    function: String,
    #[arg(long, value_delimiter = ',', value_parser = parse_policy,
          default_value = "bugb,bugb-nograd,mab-ucb-tuned,gp-ucb,grad-ascent,uniform")]
    policy: Vec<PolicyId>,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 250)]
    horizon: usize,
    #[arg(long, default_value_t = 10)]
    replications: u64,
    /// Grid resolutions for the single-pass scaling measurement.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    resolutions: Vec<usize>,
    /// Observation counts for the GP refit scaling measurement.
    #[arg(long, value_delimiter = ',', default_value = "100,200")]
    gp_sizes: Vec<usize>,
    /// Repetitions per scaling point (median reported).
    #[arg(long, default_value_t = 21)]
    repeats: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    function: String,
    /// Number of UCB-driven observations before the snapshot.
    #[arg(long, default_value_t = 5)]
    observations: usize,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Central credible level of the reported band.
    #[arg(long, default_value_t = 0.99)]
    level: f64,
    /// Output CSV file.
    #[arg(long, default_value = "predict_demo.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_policy(s: &str) -> std::result::Result<PolicyId, String> {
    s.parse().map_err(|e: bugb::Error| e.to_string())
}

fn load_function(spec: &str) -> Result<TestFunction> {
    if let Ok(id) = spec.parse::<FunctionId>() {
        return Ok(TestFunction::builtin(id));
    }
    let path = Path::new(spec);
    if !path.exists() {
        anyhow::bail!("unknown function '{spec}' (expected f1, f2, f3 or a table file)");
    }
    let table = HermiteTable::from_csv(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    Ok(TestFunction::tabulated(name, table))
}

fn checkpoints_for(requested: &[usize], horizon: usize) -> Vec<usize> {
    if requested.is_empty() {
        default_checkpoints(horizon)
    } else {
        requested.to_vec()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    checkpoints: &'a [usize],
    experiments: &'a [ExperimentConfig],
}

fn write_manifest(out: &Path, command: &str, checkpoints: &[usize], experiments: &[ExperimentConfig]) -> Result<()> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        checkpoints,
        experiments,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(())
}

fn print_result(cfg: &ExperimentConfig, result: &AggregateResult) {
    let cells: Vec<String> = result
        .checkpoints
        .iter()
        .map(|c| format!("t={}: {:.3} ± {:.3}", c.checkpoint, c.mean, c.stderr))
        .collect();
    println!(
        "{:<4} {:<14} noise={:<5} {} (n={}, {:.4}s/rep)",
        cfg.function.id(),
        cfg.policy,
        cfg.noise,
        cells.join("  "),
        result.replications,
        result.mean_wall_time_s
    );
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        function: load_function(&args.function)?,
        policy: args.policy,
        noise: args.noise,
        resolution: args.common.resolution,
        horizon: args.horizon,
        replications: args.replications,
        seed: args.common.seed,
        params: args.common.params(),
    };
    cfg.validate()?;
    let checkpoints = checkpoints_for(&args.checkpoints, cfg.horizon);
    let records = run_experiment(&cfg, args.workers)?;
    let result = aggregate(&records, &checkpoints)?;
    print_result(&cfg, &result);
    write_results_csv(&args.out.join("results.csv"), &result_rows(&cfg, &result))?;
    write_json(
        &args.out.join("summary.json"),
        &[SummaryEntry {
            config: &cfg,
            result: &result,
        }],
    )?;
    if args.traces {
        write_traces_csv(&args.out.join("traces.csv"), &records)?;
    }
    write_manifest(&args.out, "run", &checkpoints, std::slice::from_ref(&cfg))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let functions = args
        .function
        .iter()
        .map(|f| load_function(f))
        .collect::<Result<Vec<_>>>()?;
    let checkpoints = checkpoints_for(&args.checkpoints, args.horizon);
    let mut configs = Vec::new();
    let mut results = Vec::new();
    for &noise in &args.noise {
        for &policy in &args.policy {
            for function in &functions {
                let cfg = ExperimentConfig {
                    function: function.clone(),
                    policy,
                    noise,
                    resolution: args.common.resolution,
                    horizon: args.horizon,
                    replications: args.replications,
                    seed: args.common.seed,
                    params: args.common.params(),
                };
                cfg.validate()?;
                let records = run_experiment(&cfg, args.workers)?;
                let result = aggregate(&records, &checkpoints)?;
                print_result(&cfg, &result);
                configs.push(cfg);
                results.push(result);
            }
        }
    }

    let rows: Vec<_> = configs
        .iter()
        .zip(&results)
        .flat_map(|(c, r)| result_rows(c, r))
        .collect();
    write_results_csv(&args.out.join("results.csv"), &rows)?;

    // Function-averaged tables: policies by noise at the final checkpoint,
    // and policies by checkpoint for each noise level.
    let averaged = |policy: PolicyId, noise: f64| -> Result<AggregateResult> {
        let picked: Vec<&AggregateResult> = configs
            .iter()
            .zip(&results)
            .filter(|(c, _)| c.policy == policy && c.noise == noise)
            .map(|(_, r)| r)
            .collect();
        Ok(average_results(&picked)?)
    };
    let mut noise_header = vec!["policy".to_string()];
    noise_header.extend(args.noise.iter().map(|n| n.to_string()));
    let mut checkpoint_header = vec!["policy".to_string(), "noise".to_string()];
    checkpoint_header.extend(checkpoints.iter().map(|c| c.to_string()));
    let mut noise_rows = Vec::new();
    let mut checkpoint_rows = Vec::new();
    for &policy in &args.policy {
        let mut finals = Vec::new();
        for &noise in &args.noise {
            let avg = averaged(policy, noise)?;
            finals.push(avg.final_stat().map_or(f64::NAN, |s| s.mean));
            let mut cells = vec![noise];
            cells.extend(avg.checkpoints.iter().map(|c| c.mean));
            checkpoint_rows.push((policy.name().to_string(), cells));
        }
        noise_rows.push((policy.name().to_string(), finals));
    }
    write_table_csv(&args.out.join("table_noise.csv"), &noise_header, &noise_rows)?;
    write_table_csv(
        &args.out.join("table_checkpoints.csv"),
        &checkpoint_header,
        &checkpoint_rows,
    )?;

    let summary: Vec<_> = configs
        .iter()
        .zip(&results)
        .map(|(config, result)| SummaryEntry { config, result })
        .collect();
    write_json(&args.out.join("summary.json"), &summary)?;
    write_manifest(&args.out, "sweep", &checkpoints, &configs)
}

fn cmd_timing(args: TimingArgs) -> Result<()> {
    let base = ExperimentConfig {
        function: load_function(&args.function)?,
        policy: PolicyId::Bugb,
        noise: args.noise,
        resolution: args.common.resolution,
        horizon: args.horizon,
        replications: args.replications,
        seed: args.common.seed,
        params: args.common.params(),
    };
    base.validate()?;
    let report = timing_run(&base, &args.policy, &args.resolutions, &args.gp_sizes, args.repeats)?;
    for p in &report.policies {
        println!("{:<14} {:.6} s/replication", p.policy, p.mean_seconds_per_replication);
    }
    for s in &report.bugb_pass {
        println!("chain pass   resolution {:>6}: {:.3e} s", s.size, s.seconds);
    }
    for s in &report.gp_refit {
        println!("gp refit   observations {:>6}: {:.3e} s", s.size, s.seconds);
    }
    write_json(&args.out.join("timing.json"), &report)?;
    Ok(())
}

fn cmd_predict_demo(args: PredictArgs) -> Result<()> {
    let policy = if args.common.gradient_feedback {
        PolicyId::Bugb
    } else {
        PolicyId::BugbNoGrad
    };
    let cfg = ExperimentConfig {
        function: load_function(&args.function)?,
        policy,
        noise: args.noise,
        resolution: args.common.resolution,
        horizon: args.observations.max(1),
        replications: 1,
        seed: args.common.seed,
        params: args.common.params(),
    };
    cfg.validate()?;
    let rows = predict_snapshot(&cfg, args.observations, args.level, 0)?;
    let header = ["x", "true_f", "posterior_mean", "lower", "upper"].map(String::from);
    let table: Vec<(String, Vec<f64>)> = rows
        .iter()
        .map(|r| (r.x.to_string(), vec![r.true_f, r.posterior_mean, r.lower, r.upper]))
        .collect();
    write_table_csv(&args.out, &header, &table)?;
    let covered = rows.iter().filter(|r| r.covers_truth()).count();
    println!(
        "{} nodes, truth inside the {}% band at {}",
        rows.len(),
        args.level * 100.0,
        covered
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a).context("run failed"),
        Command::Sweep(a) => cmd_sweep(a).context("sweep failed"),
        Command::Timing(a) => cmd_timing(a).context("timing failed"),
        Command::PredictDemo(a) => cmd_predict_demo(a).context("predict-demo failed"),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
