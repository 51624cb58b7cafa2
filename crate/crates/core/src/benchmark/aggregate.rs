use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regret::RegretRecord;

/// Reporting steps used when none are requested.
pub const DEFAULT_CHECKPOINTS: [usize; 4] = [25, 50, 100, 250];

/// Default checkpoints that fit in `horizon`, plus the horizon itself.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut cps: Vec<usize> = DEFAULT_CHECKPOINTS.into_iter().filter(|&c| c <= horizon).collect();
    if cps.last() != Some(&horizon) {
        cps.push(horizon);
    }
    cps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStat {
    pub checkpoint: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub checkpoints: Vec<CheckpointStat>,
    pub replications: usize,
    #[serde(skip)]
    pub mean_wall_time_s: f64,
}

impl AggregateResult {
    pub fn at(&self, checkpoint: usize) -> Option<&CheckpointStat> {
        self.checkpoints.iter().find(|c| c.checkpoint == checkpoint)
    }

    /// Last checkpoint.
    pub fn final_stat(&self) -> Option<&CheckpointStat> {
        self.checkpoints.last()
    }
}

/// Mean and standard error (`sd / sqrt(n)`, `n - 1` divisor) of a sample.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean and standard error of cumulative regret at each checkpoint.
pub fn aggregate(records: &[RegretRecord], checkpoints: &[usize]) -> Result<AggregateResult> {
    let horizon = records.first().map(RegretRecord::len).unwrap_or(0);
    if records.iter().any(|r| r.len() != horizon) {
        return Err(Error::Usage("records have mismatched horizons".into()));
    }
    if records.is_empty() {
        return Ok(AggregateResult {
            checkpoints: Vec::new(),
            replications: 0,
            mean_wall_time_s: 0.0,
        });
    }
    if let Some(&bad) = checkpoints.iter().find(|&&c| c == 0 || c > horizon) {
        return Err(Error::Usage(format!("checkpoint {bad} outside 1..={horizon}")));
    }
    let checkpoints = checkpoints
        .iter()
        .map(|&c| {
            let values: Vec<f64> = records.iter().map(|r| r.cumulative[c - 1]).collect();
            let (mean, stderr) = mean_stderr(&values);
            CheckpointStat {
                checkpoint: c,
                mean,
                stderr,
            }
        })
        .collect();
    let mean_wall_time_s = records.iter().map(|r| r.wall_time_s).sum::<f64>() / records.len() as f64;
    Ok(AggregateResult {
        checkpoints,
        replications: records.len(),
        mean_wall_time_s,
    })
}

/// Unweighted average of independent per-function results. The standard
/// error of the average is `sqrt(sum se_k^2) / K`.
pub fn average_results(results: &[&AggregateResult]) -> Result<AggregateResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::Usage("nothing to average".into()))?;
    let k = results.len() as f64;
    let mut checkpoints = Vec::with_capacity(first.checkpoints.len());
    for (i, cp) in first.checkpoints.iter().enumerate() {
        let mut sum = 0.0;
        let mut se_sq = 0.0;
        for r in results {
            let stat = r
                .checkpoints
                .get(i)
                .filter(|s| s.checkpoint == cp.checkpoint)
                .ok_or_else(|| Error::Usage("results have different checkpoints".into()))?;
            sum += stat.mean;
            se_sq += stat.stderr * stat.stderr;
        }
        checkpoints.push(CheckpointStat {
            checkpoint: cp.checkpoint,
            mean: sum / k,
            stderr: se_sq.sqrt() / k,
        });
    }
    Ok(AggregateResult {
        checkpoints,
        replications: results.iter().map(|r| r.replications).min().unwrap_or(0),
        mean_wall_time_s: results.iter().map(|r| r.mean_wall_time_s).sum::<f64>() / k,
    })
}
