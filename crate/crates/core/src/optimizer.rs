//! Ask/tell optimisation loop over the value/gradient chain.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AcquisitionConfig};
use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::inference::{posterior, TransitionModel};
use crate::model::{ChainHyperparams, Grid, Observation, PosteriorBelief};
use crate::policy::{run_policy, Feedback, GradientFeedback, Policy, Query};
use crate::regret::RegretRecord;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugbConfig {
    pub grid: Grid,
    pub hyper: ChainHyperparams,
    pub acquisition: AcquisitionConfig,
    /// Request a gradient observation at every pulled node.
    pub gradient_feedback: bool,
}

impl BugbConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        self.acquisition.validate()
    }
}

/// Accumulated observations and the posterior they imply.
#[derive(Debug, Clone)]
pub struct BugbOptimizer {
    config: BugbConfig,
    transition: TransitionModel,
    observations: Vec<Observation>,
    belief: PosteriorBelief,
    iteration: usize,
}

impl BugbOptimizer {
    pub fn new(config: BugbConfig) -> Result<Self> {
        config.validate()?;
        let transition = TransitionModel::new(&config.grid, &config.hyper);
        let belief = posterior(&config.grid, &config.hyper, &[])?;
        Ok(Self {
            config,
            transition,
            observations: Vec::new(),
            belief,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &BugbConfig {
        &self.config
    }

    pub fn belief(&self) -> &PosteriorBelief {
        &self.belief
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Number of completed `tell` calls.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Next node under the configured acquisition. The random stream is only
    /// consumed by Thompson sampling.
    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        acquisition::select(&self.config.acquisition, &self.belief, &self.transition, rng)
    }

    /// Record a value (and optionally a gradient) observation at `node` and
    /// recompute the posterior from scratch.
    pub fn tell(&mut self, node: usize, value: f64, gradient: Option<f64>) -> Result<()> {
        if gradient.is_some() && !self.config.gradient_feedback {
            return Err(Error::Usage(
                "gradient observation supplied but gradient feedback is disabled".into(),
            ));
        }
        let hyper = &self.config.hyper;
        let mut fresh = vec![Observation::value(node, value, hyper.obs_value_var)];
        if let Some(g) = gradient {
            fresh.push(Observation::gradient(node, g, hyper.obs_grad_var));
        }
        for o in &fresh {
            o.validate(&self.config.grid)?;
        }
        self.observations.extend(fresh);
        self.belief = posterior(&self.config.grid, hyper, &self.observations)?;
        self.iteration += 1;
        Ok(())
    }

    /// Posterior recomputed from the stored observations.
    pub fn rebuild_belief(&self) -> Result<PosteriorBelief> {
        posterior(&self.config.grid, &self.config.hyper, &self.observations)
    }
}

impl Policy for BugbOptimizer {
    fn query(&mut self, rng: &mut SimRng) -> Result<Query> {
        self.ask(rng).map(Query::Node)
    }

    fn gradient_feedback(&self) -> GradientFeedback {
        if self.config.gradient_feedback {
            GradientFeedback::Noisy
        } else {
            GradientFeedback::None
        }
    }

    fn update(&mut self, query: Query, feedback: Feedback) -> Result<()> {
        let Query::Node(node) = query else {
            return Err(Error::Invariant("chain optimizer only issues node queries".into()));
        };
        let value = feedback
            .value
            .ok_or_else(|| Error::Invariant("missing value feedback".into()))?;
        self.tell(node, value, feedback.gradient)
    }
}

/// `horizon` ask/observe/tell rounds against `env`.
pub fn run_episode(
    config: BugbConfig,
    env: &mut Environment,
    horizon: usize,
    rng: &mut SimRng,
) -> Result<RegretRecord> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let mut optimizer = BugbOptimizer::new(config)?;
    run_policy(&mut optimizer, env, horizon, rng, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{select_ucb, Strategy};
    use crate::environments::{FunctionId, TestFunction};
    use crate::rng::{stream, StreamPurpose};

    fn config(resolution: usize, z: f64, gradient_feedback: bool) -> BugbConfig {
        BugbConfig {
            grid: Grid::uniform(0.0, 1.0, resolution).unwrap(),
            hyper: ChainHyperparams::with_observation_sd(0.1),
            acquisition: AcquisitionConfig {
                strategy: Strategy::Ucb,
                z,
            },
            gradient_feedback,
        }
    }

    #[test]
    fn fresh_state_greedy_picks_first_node() {
        let opt = BugbOptimizer::new(config(10, 0.0, false)).unwrap();
        let mut rng = stream(0, 0, StreamPurpose::Policy);
        assert_eq!(opt.ask(&mut rng).unwrap(), 0);
    }

    #[test]
    fn fresh_state_ucb_picks_widest_band() {
        // Prior variance grows away from node 0, so the last node has the
        // highest upper bound.
        let opt = BugbOptimizer::new(config(10, 1.6449, false)).unwrap();
        let mut rng = stream(0, 0, StreamPurpose::Policy);
        assert_eq!(opt.ask(&mut rng).unwrap(), 9);
    }

    #[test]
    fn high_pinned_value_attracts_greedy_choice() {
        let mut cfg = config(10, 0.0, false);
        cfg.hyper.obs_value_var = 1e-8;
        let mut opt = BugbOptimizer::new(cfg).unwrap();
        opt.tell(5, 50.0, None).unwrap();
        let mut rng = stream(0, 0, StreamPurpose::Policy);
        let picked = opt.ask(&mut rng).unwrap();
        let means: Vec<f64> = opt.belief().value_means().collect();
        assert_eq!(picked, acquisition::argmax(means).unwrap());

        let ucb = BugbOptimizer {
            config: BugbConfig {
                acquisition: AcquisitionConfig::default(),
                ..opt.config.clone()
            },
            ..opt.clone()
        };
        let scores = acquisition::ucb_scores(ucb.belief(), ucb.config().acquisition.z);
        let picked = ucb.ask(&mut rng).unwrap();
        assert!(scores[picked] >= scores[5]);
    }

    #[test]
    fn tell_matches_rebuild() {
        let mut opt = BugbOptimizer::new(config(30, 1.6449, true)).unwrap();
        for (node, v, g) in [(3, 0.2, 1.0), (17, 0.9, -0.5), (3, 0.25, 0.8)] {
            opt.tell(node, v, Some(g)).unwrap();
            let rebuilt = opt.rebuild_belief().unwrap();
            assert!(opt.belief().max_abs_diff(&rebuilt) <= 1e-10);
        }
        assert_eq!(opt.iteration(), 3);
        assert_eq!(opt.observations().len(), 6);
    }

    #[test]
    fn exact_tell_pins_value() {
        let mut cfg = config(12, 1.0, false);
        cfg.hyper.obs_value_var = 0.0;
        let mut opt = BugbOptimizer::new(cfg).unwrap();
        opt.tell(4, 0.37, None).unwrap();
        assert_eq!(opt.belief().smoothed()[4].value_mean(), 0.37);
    }

    #[test]
    fn gradient_without_feedback_is_usage_error() {
        let mut opt = BugbOptimizer::new(config(5, 1.0, false)).unwrap();
        assert!(matches!(opt.tell(1, 0.0, Some(1.0)), Err(Error::Usage(_))));
        assert!(opt.tell(7, 0.0, None).is_err());
        assert!(opt.observations().is_empty());
    }

    #[test]
    fn scripted_three_node_trace() {
        // Hand-traced via the dense oracle: observe node 2 and node 0, then
        // the bound is widest at node 1.
        use crate::oracle::dense_posterior_oracle;
        let cfg = BugbConfig {
            grid: Grid::uniform(0.0, 1.0, 3).unwrap(),
            hyper: ChainHyperparams {
                obs_value_var: 0.01,
                obs_grad_var: 0.01,
                prior_cov: [[1.0, 0.0], [0.0, 1.0]],
                sigma_g_sq: 4.0,
                ..ChainHyperparams::default()
            },
            acquisition: AcquisitionConfig::default(),
            gradient_feedback: false,
        };
        let mut opt = BugbOptimizer::new(cfg.clone()).unwrap();
        let mut rng = stream(0, 0, StreamPurpose::Policy);
        let mut told = Vec::new();
        for value in [0.5, 0.1, 0.3] {
            let node = opt.ask(&mut rng).unwrap();
            let dense = dense_posterior_oracle(&cfg.grid, &cfg.hyper, &told).unwrap();
            let expected = acquisition::argmax(
                (0..3).map(|i| dense.value_mean(i) + cfg.acquisition.z * dense.value_var(i).sqrt()),
            )
            .unwrap();
            assert_eq!(node, expected);
            opt.tell(node, value, None).unwrap();
            told.push(Observation::value(node, value, 0.01));
        }
        assert_eq!(told.iter().map(|o| o.node).collect::<Vec<_>>(), vec![2, 0, 1]);
        let dense = dense_posterior_oracle(&cfg.grid, &cfg.hyper, &told).unwrap();
        let greedy = acquisition::argmax((0..3).map(|i| dense.value_mean(i))).unwrap();
        assert_eq!(select_ucb(opt.belief(), 0.0), greedy);
    }

    fn episode(seed: u64, horizon: usize, gradient_feedback: bool) -> RegretRecord {
        let cfg = config(100, 1.6449, gradient_feedback);
        let mut env = Environment::new(
            TestFunction::builtin(FunctionId::F1),
            cfg.grid.clone(),
            0.1,
            0.1,
            stream(seed, 0, StreamPurpose::Environment),
        )
        .unwrap();
        let mut rng = stream(seed, 0, StreamPurpose::Policy);
        run_episode(cfg, &mut env, horizon, &mut rng).unwrap()
    }

    #[test]
    fn single_pull_regret() {
        let r = episode(3, 1, false);
        assert_eq!(r.len(), 1);
        let env = Environment::new(
            TestFunction::builtin(FunctionId::F1),
            Grid::uniform(0.0, 1.0, 100).unwrap(),
            0.0,
            0.0,
            stream(0, 0, StreamPurpose::Environment),
        )
        .unwrap();
        let expected = env.grid_optimum().1 - env.true_value(r.chosen[0]);
        assert_eq!(r.total(), expected);
    }

    #[test]
    fn episodes_are_deterministic_and_monotone() {
        let a = episode(9, 40, true);
        let b = episode(9, 40, true);
        assert_eq!(a, b);
        assert!(a.instantaneous.iter().all(|&r| r >= 0.0));
        assert!(a.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_horizon_rejected() {
        let cfg = config(10, 1.0, false);
        let mut env = Environment::new(
            TestFunction::builtin(FunctionId::F1),
            cfg.grid.clone(),
            0.1,
            0.1,
            stream(0, 0, StreamPurpose::Environment),
        )
        .unwrap();
        let mut rng = stream(0, 0, StreamPurpose::Policy);
        assert!(run_episode(cfg, &mut env, 0, &mut rng).is_err());
    }
}
