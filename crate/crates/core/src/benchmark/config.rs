use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::acquisition::{Strategy, Z_95_ONE_SIDED};
use crate::environments::{FunctionId, TestFunction};
use crate::error::{Error, Result};
use crate::model::{Grid, DEFAULT_SIGMA_F_SQ, DEFAULT_SIGMA_G_SQ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyId {
    #[serde(rename = "bugb")]
    Bugb,
    #[serde(rename = "bugb-nograd")]
    BugbNoGrad,
    #[serde(rename = "mab-ucb-tuned")]
    MabUcbTuned,
    #[serde(rename = "gp-ucb")]
    GpUcb,
    #[serde(rename = "grad-ascent")]
    GradAscent,
    #[serde(rename = "uniform")]
    Uniform,
}

impl PolicyId {
    pub const ALL: [PolicyId; 6] = [
        PolicyId::Bugb,
        PolicyId::BugbNoGrad,
        PolicyId::MabUcbTuned,
        PolicyId::GpUcb,
        PolicyId::GradAscent,
        PolicyId::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Bugb => "bugb",
            PolicyId::BugbNoGrad => "bugb-nograd",
            PolicyId::MabUcbTuned => "mab-ucb-tuned",
            PolicyId::GpUcb => "gp-ucb",
            PolicyId::GradAscent => "grad-ascent",
            PolicyId::Uniform => "uniform",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyId::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = PolicyId::ALL.iter().map(|p| p.name()).collect();
            Error::Config(format!("unknown policy '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Per-policy knobs. `None` means "derive from the experiment".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Credible-bound multiplier shared by the chain model and GP-UCB.
    pub z: f64,
    pub strategy: Strategy,
    /// Overrides the gradient feedback implied by the policy id.
    pub gradient_feedback: Option<bool>,
    pub sigma_f_sq: f64,
    pub sigma_g_sq: f64,
    /// Prior variance of both components of node 0.
    pub prior_var: f64,
    /// Observation noise sd assumed by the model; defaults to the true one.
    pub model_noise_sd: Option<f64>,
    pub gp_signal_var: f64,
    /// Defaults to a tenth of the domain width.
    pub gp_length_scale: Option<f64>,
    /// Defaults to the true noise variance.
    pub gp_noise_var: Option<f64>,
    /// Defaults to 0.02 times the domain width.
    pub ga_step: Option<f64>,
    /// Feed gradient ascent noiseless gradients.
    pub ga_exact_gradient: bool,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            z: Z_95_ONE_SIDED,
            strategy: Strategy::Ucb,
            gradient_feedback: None,
            sigma_f_sq: DEFAULT_SIGMA_F_SQ,
            sigma_g_sq: DEFAULT_SIGMA_G_SQ,
            prior_var: 100.0,
            model_noise_sd: None,
            gp_signal_var: 1.0,
            gp_length_scale: None,
            gp_noise_var: None,
            ga_step: None,
            ga_exact_gradient: false,
        }
    }
}

/// Everything that determines one batch of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub function: TestFunction,
    pub policy: PolicyId,
    /// Observation noise standard deviation.
    pub noise: f64,
    pub resolution: usize,
    pub horizon: usize,
    pub replications: u64,
    pub seed: u64,
    pub params: PolicyParams,
}

impl ExperimentConfig {
    /// Defaults matching the reference setup: noise 1.0, resolution 100,
    /// horizon 250, 1000 replications.
    pub fn new(function: FunctionId, policy: PolicyId) -> Self {
        Self {
            function: TestFunction::builtin(function),
            policy,
            noise: 1.0,
            resolution: 100,
            horizon: 250,
            replications: 1000,
            seed: 0,
            params: PolicyParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Config(format!(
                "noise must be finite and >= 0, got {}",
                self.noise
            )));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid> {
        let (lo, hi) = self.function.domain();
        Grid::uniform(lo, hi, self.resolution)
    }

    pub fn domain_width(&self) -> f64 {
        let (lo, hi) = self.function.domain();
        hi - lo
    }
}
