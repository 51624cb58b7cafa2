//! Posterior snapshot after a few UCB-driven rounds, for plotting the fitted
//! function against the truth.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::benchmark::{bugb_config, ExperimentConfig};
use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::optimizer::BugbOptimizer;
use crate::rng::{stream, StreamPurpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub x: f64,
    pub true_f: f64,
    pub posterior_mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SnapshotRow {
    pub fn covers_truth(&self) -> bool {
        self.lower <= self.true_f && self.true_f <= self.upper
    }
}

/// Two-sided standard-normal multiplier for a central credible `level`.
pub fn two_sided_z(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("credible level must lie in (0, 1), got {level}")));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + level / 2.0))
}

/// Run `observations` ask/observe/tell rounds of the chain model on the
/// experiment's environment (replication `replication`) and report the
/// posterior band at every node.
pub fn predict_snapshot(
    cfg: &ExperimentConfig,
    observations: usize,
    level: f64,
    replication: u64,
) -> Result<Vec<SnapshotRow>> {
    let z = two_sided_z(level)?;
    let grid = cfg.grid()?;
    let mut env = Environment::new(
        cfg.function.clone(),
        grid.clone(),
        cfg.noise,
        cfg.noise,
        stream(cfg.seed, replication, StreamPurpose::Environment),
    )?;
    let mut rng = stream(cfg.seed, replication, StreamPurpose::Policy);
    let bugb = bugb_config(cfg, grid.clone());
    let with_gradient = bugb.gradient_feedback;
    let mut opt = BugbOptimizer::new(bugb)?;
    for _ in 0..observations {
        let node = opt.ask(&mut rng)?;
        let value = env.observe_value(node)?;
        let gradient = if with_gradient {
            Some(env.observe_gradient(node)?)
        } else {
            None
        };
        opt.tell(node, value, gradient)?;
    }
    Ok(opt
        .belief()
        .smoothed()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let half = z * m.value_var().max(0.0).sqrt();
            SnapshotRow {
                x: grid.x(i),
                true_f: env.true_value(i),
                posterior_mean: m.value_mean(),
                lower: m.value_mean() - half,
                upper: m.value_mean() + half,
            }
        })
        .collect())
}
