//! Node selection from a chain posterior: upper credible bound or Thompson
//! sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{sample_trajectory, TransitionModel};
use crate::model::{FilteredChain, PosteriorBelief};

/// One-sided 95% standard-normal quantile.
pub const Z_95_ONE_SIDED: f64 = 1.6449;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Ucb,
    Thompson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub strategy: Strategy,
    /// Credible-bound multiplier in standard deviations.
    pub z: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Ucb,
            z: Z_95_ONE_SIDED,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::Config(format!("z must be finite and >= 0, got {}", self.z)));
        }
        Ok(())
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// `mu_i + z * sigma_i` over the smoothed value marginals.
pub fn ucb_scores(belief: &PosteriorBelief, z: f64) -> Vec<f64> {
    belief
        .value_means()
        .zip(belief.value_sds())
        .map(|(mu, sd)| if z == 0.0 { mu } else { mu + z * sd })
        .collect()
}

pub fn select_ucb(belief: &PosteriorBelief, z: f64) -> usize {
    argmax(ucb_scores(belief, z)).expect("belief has at least one node")
}

/// Argmax of the value component of one joint posterior draw.
pub fn select_thompson<R: Rng + ?Sized>(chain: &FilteredChain, tm: &TransitionModel, rng: &mut R) -> Result<usize> {
    let sample = sample_trajectory(chain, tm, rng)?;
    Ok(argmax(sample.iter().map(|s| s[0])).expect("chain has at least one node"))
}

/// Dispatch on the configured strategy.
pub fn select<R: Rng + ?Sized>(
    config: &AcquisitionConfig,
    belief: &PosteriorBelief,
    tm: &TransitionModel,
    rng: &mut R,
) -> Result<usize> {
    match config.strategy {
        Strategy::Ucb => Ok(select_ucb(belief, config.z)),
        Strategy::Thompson => select_thompson(belief.chain(), tm, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::posterior;
    use crate::model::{ChainHyperparams, Grid, Observation};

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax([0.0; 4]), Some(0));
        assert_eq!(argmax(Vec::<f64>::new()), None);
    }

    #[test]
    fn zero_z_gives_means() {
        let g = Grid::uniform(0.0, 1.0, 10).unwrap();
        let h = ChainHyperparams::with_observation_sd(0.5);
        let b = posterior(&g, &h, &[Observation::value(4, 2.0, 0.25)]).unwrap();
        let means: Vec<f64> = b.value_means().collect();
        assert_eq!(ucb_scores(&b, 0.0), means);
        assert_eq!(select_ucb(&b, 0.0), argmax(means).unwrap());
    }

    #[test]
    fn hand_evaluated_score() {
        let g = Grid::uniform(0.0, 1.0, 2).unwrap();
        let h = ChainHyperparams {
            prior_mean: [1.0, 0.0],
            prior_cov: [[4.0, 0.0], [0.0, 1.0]],
            ..ChainHyperparams::default()
        };
        let b = posterior(&g, &h, &[]).unwrap();
        assert!((ucb_scores(&b, 1.6449)[0] - 4.2898).abs() < 1e-12);
    }

    #[test]
    fn pinned_posterior_scores_are_means() {
        let g = Grid::uniform(0.0, 1.0, 4).unwrap();
        let h = ChainHyperparams::default();
        let obs: Vec<_> = (0..4)
            .flat_map(|i| [Observation::value(i, i as f64, 0.0), Observation::gradient(i, 1.0, 0.0)])
            .collect();
        let b = posterior(&g, &h, &obs).unwrap();
        assert_eq!(ucb_scores(&b, 5.0), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn config_validation() {
        assert!(AcquisitionConfig::default().validate().is_ok());
        let bad = AcquisitionConfig {
            z: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
