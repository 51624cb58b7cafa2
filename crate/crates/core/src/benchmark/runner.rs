use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, PolicyId};
use crate::acquisition::AcquisitionConfig;
use crate::baselines::{GpUcbPolicy, GradientAscentPolicy, KernelParams, UcbTunedPolicy, UniformPolicy};
use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::model::{ChainHyperparams, Grid};
use crate::optimizer::{BugbConfig, BugbOptimizer};
use crate::policy::{run_policy, Policy};
use crate::regret::RegretRecord;
use crate::rng::{stream, SimRng, StreamPurpose};

/// Chain-model configuration implied by an experiment.
pub fn bugb_config(cfg: &ExperimentConfig, grid: Grid) -> BugbConfig {
    let p = &cfg.params;
    let model_sd = p.model_noise_sd.unwrap_or(cfg.noise);
    let hyper = ChainHyperparams {
        sigma_f_sq: p.sigma_f_sq,
        sigma_g_sq: p.sigma_g_sq,
        prior_cov: [[p.prior_var, 0.0], [0.0, p.prior_var]],
        ..ChainHyperparams::with_observation_sd(model_sd)
    };
    let default_feedback = cfg.policy == PolicyId::Bugb;
    BugbConfig {
        grid,
        hyper,
        acquisition: AcquisitionConfig {
            strategy: p.strategy,
            z: p.z,
        },
        gradient_feedback: p.gradient_feedback.unwrap_or(default_feedback),
    }
}

/// GP kernel implied by an experiment.
pub fn gp_params(cfg: &ExperimentConfig) -> KernelParams {
    let p = &cfg.params;
    KernelParams {
        signal_var: p.gp_signal_var,
        length_scale: p.gp_length_scale.unwrap_or(cfg.domain_width() / 10.0),
        noise_var: p.gp_noise_var.unwrap_or(cfg.noise * cfg.noise),
    }
}

fn build_policy(cfg: &ExperimentConfig, grid: &Grid, rng: &mut SimRng) -> Result<Box<dyn Policy>> {
    Ok(match cfg.policy {
        PolicyId::Bugb | PolicyId::BugbNoGrad => Box::new(BugbOptimizer::new(bugb_config(cfg, grid.clone()))?),
        PolicyId::MabUcbTuned => Box::new(UcbTunedPolicy::new(grid.resolution())),
        PolicyId::GpUcb => Box::new(GpUcbPolicy::new(grid.clone(), gp_params(cfg), cfg.params.z)?),
        PolicyId::GradAscent => {
            let domain = cfg.function.domain();
            let step = cfg.params.ga_step.unwrap_or(0.02 * cfg.domain_width());
            let start = rng.gen_range(domain.0..=domain.1);
            Box::new(GradientAscentPolicy::new(
                start,
                step,
                domain,
                cfg.params.ga_exact_gradient,
            )?)
        }
        PolicyId::Uniform => Box::new(UniformPolicy::new(grid.clone())),
    })
}

fn replicate(cfg: &ExperimentConfig, replication: u64) -> Result<RegretRecord> {
    let grid = cfg.grid()?;
    let mut env = Environment::new(
        cfg.function.clone(),
        grid.clone(),
        cfg.noise,
        cfg.noise,
        stream(cfg.seed, replication, StreamPurpose::Environment),
    )?;
    let mut rng = stream(cfg.seed, replication, StreamPurpose::Policy);
    let mut policy = build_policy(cfg, &grid, &mut rng)?;
    run_policy(policy.as_mut(), &mut env, cfg.horizon, &mut rng, replication)
}

/// One seeded replication. Environment noise and policy randomness come
/// from separate streams keyed by `(seed, replication)`.
pub fn run_replication(cfg: &ExperimentConfig, replication: u64) -> Result<RegretRecord> {
    cfg.validate()?;
    replicate(cfg, replication).map_err(|e| Error::Replication {
        replication,
        source: Box::new(e),
    })
}

/// All replications of `cfg`, in id order. `workers <= 1` runs
/// sequentially; otherwise replications are spread over a dedicated pool.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<RegretRecord>> {
    cfg.validate()?;
    let ids = 0..cfg.replications;
    if workers <= 1 {
        return ids.map(|r| run_replication(cfg, r)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| ids.into_par_iter().map(|r| run_replication(cfg, r)).collect())
}
