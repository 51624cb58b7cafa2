//! Wall-clock measurements: per-policy episode cost and scaling of a single
//! chain inference pass and a single GP refit.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, PolicyId};
use super::runner::run_replication;
use crate::baselines::{gp_fit, KernelParams};
use crate::error::Result;
use crate::inference::posterior;
use crate::model::{ChainHyperparams, Grid, Observation};
use crate::rng::{stream, StreamPurpose};

#[derive(Debug, Clone, Serialize)]
pub struct PolicyTiming {
    pub policy: PolicyId,
    pub mean_seconds_per_replication: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub size: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub policies: Vec<PolicyTiming>,
    /// Filter + smooth pass time by grid resolution.
    pub bugb_pass: Vec<ScalingPoint>,
    /// GP fit time by number of observations.
    pub gp_refit: Vec<ScalingPoint>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median seconds over `repeats` runs of `f`, after one warm-up call.
fn time_median<F: FnMut() -> Result<()>>(repeats: usize, mut f: F) -> Result<f64> {
    f()?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        f()?;
        samples.push(t.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

/// Seconds for one filter + smooth pass on a unit-interval grid of the given
/// resolution with `observations` mixed value/gradient observations.
pub fn bugb_pass_seconds(resolution: usize, observations: usize, repeats: usize) -> Result<f64> {
    let grid = Grid::uniform(0.0, 1.0, resolution)?;
    let hyper = ChainHyperparams::default();
    let mut rng = stream(0, resolution as u64, StreamPurpose::Policy);
    let obs: Vec<Observation> = (0..observations)
        .map(|k| {
            let node = rng.gen_range(0..resolution);
            let y = rng.gen_range(-1.0..1.0);
            if k % 2 == 0 {
                Observation::value(node, y, 1.0)
            } else {
                Observation::gradient(node, y, 1.0)
            }
        })
        .collect();
    time_median(repeats, || posterior(&grid, &hyper, &obs).map(|_| ()))
}

/// Seconds for one GP fit on `observations` points in the unit interval.
pub fn gp_refit_seconds(observations: usize, repeats: usize) -> Result<f64> {
    let mut rng = stream(1, observations as u64, StreamPurpose::Policy);
    let xs: Vec<f64> = (0..observations).map(|_| rng.gen_range(0.0..1.0)).collect();
    let ys: Vec<f64> = (0..observations).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let params = KernelParams {
        signal_var: 1.0,
        length_scale: 0.1,
        noise_var: 1.0,
    };
    time_median(repeats, || gp_fit(&xs, &ys, params).map(|_| ()))
}

/// Mean wall time per replication for each policy under `base` (its policy
/// field is replaced in turn).
pub fn policy_wall_times(base: &ExperimentConfig, policies: &[PolicyId]) -> Result<Vec<PolicyTiming>> {
    policies
        .iter()
        .map(|&policy| {
            let cfg = ExperimentConfig { policy, ..base.clone() };
            cfg.validate()?;
            let mut total = 0.0;
            for r in 0..cfg.replications {
                total += run_replication(&cfg, r)?.wall_time_s;
            }
            Ok(PolicyTiming {
                policy,
                mean_seconds_per_replication: total / cfg.replications as f64,
            })
        })
        .collect()
}

pub fn timing_run(
    base: &ExperimentConfig,
    policies: &[PolicyId],
    resolutions: &[usize],
    gp_sizes: &[usize],
    repeats: usize,
) -> Result<TimingReport> {
    let policies = policy_wall_times(base, policies)?;
    let bugb_pass = resolutions
        .iter()
        .map(|&size| {
            Ok(ScalingPoint {
                size,
                seconds: bugb_pass_seconds(size, 50, repeats)?,
            })
        })
        .collect::<Result<_>>()?;
    let gp_refit = gp_sizes
        .iter()
        .map(|&size| {
            Ok(ScalingPoint {
                size,
                seconds: gp_refit_seconds(size, repeats)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TimingReport {
        policies,
        bugb_pass,
        gp_refit,
    })
}
