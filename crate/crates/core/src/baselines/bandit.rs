use crate::acquisition::argmax;
use crate::error::{Error, Result};
use crate::policy::{Feedback, Policy, Query};
use crate::rng::SimRng;

/// Streaming per-arm reward statistics (Welford updates).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    counts: Vec<u64>,
    means: Vec<f64>,
    m2: Vec<f64>,
    total: u64,
}

impl ArmStats {
    pub fn new(arms: usize) -> Self {
        Self {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            m2: vec![0.0; arms],
            total: 0,
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.total += 1;
        let n = self.counts[arm] as f64;
        let delta = reward - self.means[arm];
        self.means[arm] += delta / n;
        self.m2[arm] += delta * (reward - self.means[arm]);
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    /// Sample variance with divisor `n_i - 1`; zero below two pulls.
    pub fn variance(&self, arm: usize) -> f64 {
        match self.counts[arm] {
            0 | 1 => 0.0,
            n => (self.m2[arm] / (n - 1) as f64).max(0.0),
        }
    }
}

/// Optimistic estimate
/// `mu_i + sqrt(ln n / n_i * min(1/4, sigma_i^2 + sqrt(2 ln n / n_i)))`
/// from explicit statistics.
pub fn ucb_tuned_value(mean: f64, variance: f64, arm_pulls: u64, total_pulls: u64) -> f64 {
    let ln_n = (total_pulls as f64).ln();
    let n_i = arm_pulls as f64;
    let v = variance + (2.0 * ln_n / n_i).sqrt();
    mean + (ln_n / n_i * v.min(0.25)).sqrt()
}

pub fn ucb_tuned_score(stats: &ArmStats, arm: usize) -> f64 {
    ucb_tuned_value(stats.mean(arm), stats.variance(arm), stats.count(arm), stats.total())
}

/// Lowest-index unpulled arm if any, otherwise the highest UCB-Tuned score.
pub fn select_ucb_tuned(stats: &ArmStats) -> usize {
    if let Some(arm) = stats.counts.iter().position(|&c| c == 0) {
        return arm;
    }
    argmax((0..stats.arms()).map(|a| ucb_tuned_score(stats, a))).expect("at least one arm")
}

/// Each grid node is an independent arm; rewards are raw noisy values.
#[derive(Debug, Clone)]
pub struct UcbTunedPolicy {
    stats: ArmStats,
}

impl UcbTunedPolicy {
    pub fn new(arms: usize) -> Self {
        Self {
            stats: ArmStats::new(arms),
        }
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }
}

impl Policy for UcbTunedPolicy {
    fn query(&mut self, _rng: &mut SimRng) -> Result<Query> {
        Ok(Query::Node(select_ucb_tuned(&self.stats)))
    }

    fn update(&mut self, query: Query, feedback: Feedback) -> Result<()> {
        match (query, feedback.value) {
            (Query::Node(arm), Some(v)) if arm < self.stats.arms() => {
                self.stats.record(arm, v);
                Ok(())
            }
            _ => Err(Error::Invariant("bandit update needs a node and a value".into())),
        }
    }
}
