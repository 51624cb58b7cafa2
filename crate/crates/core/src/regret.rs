use serde::{Deserialize, Serialize};

/// Per-replication trace: chosen node, instantaneous regret
/// `r_1 - r_hat_n` and running cumulative regret `r_1 * n - sum r_hat`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegretRecord {
    pub replication: u64,
    pub chosen: Vec<usize>,
    pub instantaneous: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Wall-clock seconds spent on the episode. Not part of any
    /// deterministic output.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl PartialEq for RegretRecord {
    /// Wall time is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.replication == other.replication
            && self.chosen == other.chosen
            && self.instantaneous == other.instantaneous
            && self.cumulative == other.cumulative
    }
}

impl RegretRecord {
    pub fn new(replication: u64) -> Self {
        Self {
            replication,
            chosen: Vec::new(),
            instantaneous: Vec::new(),
            cumulative: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, node: usize, regret: f64) {
        let total = self.cumulative.last().copied().unwrap_or(0.0) + regret;
        self.chosen.push(node);
        self.instantaneous.push(regret);
        self.cumulative.push(total);
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// Cumulative regret after `step` pulls (1-based).
    pub fn cumulative_at(&self, step: usize) -> Option<f64> {
        step.checked_sub(1).and_then(|i| self.cumulative.get(i).copied())
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// `r_1 * N - sum_n r_hat_n` for an optimal expected reward `r_1` and the
/// expected rewards of the pulls actually made.
pub fn cumulative_regret(optimal: f64, expected_rewards: &[f64]) -> f64 {
    optimal * expected_rewards.len() as f64 - expected_rewards.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        assert!((cumulative_regret(1.0, &[1.0, 0.5, 0.8]) - 0.7).abs() < 1e-12);
        let mut r = RegretRecord::new(0);
        for reward in [1.0, 0.5, 0.8] {
            r.push(0, 1.0 - reward);
        }
        assert!((r.total() - 0.7).abs() < 1e-12);
        assert_eq!(r.cumulative_at(1), Some(0.0));
        assert_eq!(r.cumulative_at(0), None);
        assert_eq!(r.cumulative_at(4), None);
    }
}
