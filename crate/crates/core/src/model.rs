//! Grid, hyperparameters and belief containers for the value/gradient chain.
//!
//! Each grid node `i` carries a two-component Gaussian state `(F_i, G_i)`:
//! the function value and its gradient. Neighbouring nodes are linked by a
//! first-order Taylor step with Gaussian slack,
//!
//! ```text
//! F_i = F_{i-1} + G_{i-1} * (x_i - x_{i-1}) + e_f,   e_f ~ N(0, sigma_f^2)
//! G_i = G_{i-1} + e_g,                               e_g ~ N(0, sigma_g^2)
//! ```

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, strictly increasing set of input points. This is the action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid points must be finite".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "grid points must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// `resolution` equally spaced points from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::Config(format!(
                "grid bounds must satisfy lo < hi (got lo={lo}, hi={hi})"
            )));
        }
        if resolution < 2 {
            return Err(Error::Config(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        let last = (resolution - 1) as f64;
        let width = hi - lo;
        let mut points: Vec<f64> = (0..resolution).map(|i| lo + width * (i as f64 / last)).collect();
        points[resolution - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn resolution(&self) -> usize {
        self.points.len()
    }

    /// Index of the last node, `N`.
    pub fn last_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Spacing `x_i - x_{i-1}` for `i >= 1`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.points[i] - self.points[i - 1]
    }

    /// Nearest node to `x`. Exact midpoints go to the lower index and
    /// points outside the grid clamp to the nearest endpoint.
    pub fn snap(&self, x: f64) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cannot snap non-finite x={x}")));
        }
        let upper = self.points.partition_point(|&p| p < x);
        if upper == 0 {
            return Ok(0);
        }
        if upper == self.points.len() {
            return Ok(self.points.len() - 1);
        }
        let below = x - self.points[upper - 1];
        let above = self.points[upper] - x;
        Ok(if above < below { upper } else { upper - 1 })
    }
}

/// Deterministic skeleton of the value link: `f_prev + grad_prev * dx`.
pub fn linear_recursion_value(f_prev: f64, grad_prev: f64, dx: f64) -> f64 {
    f_prev + grad_prev * dx
}

/// Noise and prior settings of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHyperparams {
    /// Variance of the value-link slack `e_f`.
    pub sigma_f_sq: f64,
    /// Variance of the gradient random-walk step `e_g`.
    pub sigma_g_sq: f64,
    /// Noise variance assumed for value observations.
    pub obs_value_var: f64,
    /// Noise variance assumed for gradient observations.
    pub obs_grad_var: f64,
    /// Prior mean of `(F_0, G_0)`.
    pub prior_mean: [f64; 2],
    /// Prior covariance of `(F_0, G_0)`, row major.
    pub prior_cov: [[f64; 2]; 2],
}

/// Default value-link noise variance.
pub const DEFAULT_SIGMA_F_SQ: f64 = 1e-2;
/// Default gradient random-walk step variance.
pub const DEFAULT_SIGMA_G_SQ: f64 = 30.0;

impl Default for ChainHyperparams {
    fn default() -> Self {
        Self {
            sigma_f_sq: DEFAULT_SIGMA_F_SQ,
            sigma_g_sq: DEFAULT_SIGMA_G_SQ,
            obs_value_var: 1.0,
            obs_grad_var: 1.0,
            prior_mean: [0.0, 0.0],
            prior_cov: [[100.0, 0.0], [0.0, 100.0]],
        }
    }
}

impl ChainHyperparams {
    /// Defaults with both observation variances set to `noise_sd^2`.
    pub fn with_observation_sd(noise_sd: f64) -> Self {
        let var = noise_sd * noise_sd;
        Self {
            obs_value_var: var,
            obs_grad_var: var,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_f_sq", self.sigma_f_sq), ("sigma_g_sq", self.sigma_g_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("obs_value_var", self.obs_value_var),
            ("obs_grad_var", self.obs_grad_var),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.prior_mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("prior mean must be finite".into()));
        }
        let c = &self.prior_cov;
        if c.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("prior covariance must be finite".into()));
        }
        if c[0][1] != c[1][0] {
            return Err(Error::Config("prior covariance must be symmetric".into()));
        }
        let cov = self.prior_cov_matrix();
        let eig = cov.symmetric_eigenvalues();
        if eig.min() < -1e-12 {
            return Err(Error::Config(format!(
                "prior covariance must be positive semidefinite (eigenvalues {:?})",
                eig.as_slice()
            )));
        }
        Ok(())
    }

    pub fn prior_mean_vector(&self) -> Vector2<f64> {
        Vector2::new(self.prior_mean[0], self.prior_mean[1])
    }

    pub fn prior_cov_matrix(&self) -> Matrix2<f64> {
        let c = &self.prior_cov;
        Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1])
    }

    pub fn process_cov(&self) -> Matrix2<f64> {
        Matrix2::new(self.sigma_f_sq, 0.0, 0.0, self.sigma_g_sq)
    }
}

/// Which component of a node an observation measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationKind {
    Value,
    Gradient,
}

impl ObservationKind {
    /// Position of the observed component in the `(F, G)` state vector.
    pub fn component(self) -> usize {
        match self {
            ObservationKind::Value => 0,
            ObservationKind::Gradient => 1,
        }
    }
}

/// A noisy scalar measurement of one component of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub node: usize,
    pub kind: ObservationKind,
    pub measurement: f64,
    pub noise_var: f64,
}

impl Observation {
    pub fn value(node: usize, measurement: f64, noise_var: f64) -> Self {
        Self {
            node,
            kind: ObservationKind::Value,
            measurement,
            noise_var,
        }
    }

    pub fn gradient(node: usize, measurement: f64, noise_var: f64) -> Self {
        Self {
            node,
            kind: ObservationKind::Gradient,
            measurement,
            noise_var,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.node >= grid.resolution() {
            return Err(Error::Domain(format!(
                "observation node {} outside grid of {} points",
                self.node,
                grid.resolution()
            )));
        }
        if !self.measurement.is_finite() {
            return Err(Error::Domain(format!(
                "observation at node {} has non-finite measurement",
                self.node
            )));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::Domain(format!(
                "observation at node {} has invalid noise variance {}",
                self.node, self.noise_var
            )));
        }
        Ok(())
    }
}

/// Mean and covariance of one node's `(F, G)` state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMoments {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl NodeMoments {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn value_mean(&self) -> f64 {
        self.mean[0]
    }

    pub fn value_var(&self) -> f64 {
        self.cov[(0, 0)]
    }

    pub fn grad_mean(&self) -> f64 {
        self.mean[1]
    }

    pub fn grad_var(&self) -> f64 {
        self.cov[(1, 1)]
    }
}

/// Output of the forward pass: per-node predicted (before the node's own
/// observations) and filtered (after them) moments.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredChain {
    pub(crate) predicted: Vec<NodeMoments>,
    pub(crate) filtered: Vec<NodeMoments>,
}

impl FilteredChain {
    /// Assemble a chain from precomputed moments. Both sequences must have
    /// the same, non-zero length.
    pub fn from_parts(predicted: Vec<NodeMoments>, filtered: Vec<NodeMoments>) -> Result<Self> {
        if predicted.is_empty() || predicted.len() != filtered.len() {
            return Err(Error::Invariant(format!(
                "predicted ({}) and filtered ({}) lengths differ or are empty",
                predicted.len(),
                filtered.len()
            )));
        }
        Ok(Self { predicted, filtered })
    }

    pub fn len(&self) -> usize {
        self.filtered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filtered.is_empty()
    }

    pub fn predicted(&self) -> &[NodeMoments] {
        &self.predicted
    }

    pub fn filtered(&self) -> &[NodeMoments] {
        &self.filtered
    }
}

/// Full posterior over the chain: forward-pass moments plus smoothed
/// marginals `mu_i, sigma_i^2` (value) and their gradient counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorBelief {
    pub(crate) chain: FilteredChain,
    pub(crate) smoothed: Vec<NodeMoments>,
}

impl PosteriorBelief {
    pub fn chain(&self) -> &FilteredChain {
        &self.chain
    }

    pub fn smoothed(&self) -> &[NodeMoments] {
        &self.smoothed
    }

    pub fn len(&self) -> usize {
        self.smoothed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smoothed.is_empty()
    }

    pub fn value_means(&self) -> impl Iterator<Item = f64> + '_ {
        self.smoothed.iter().map(NodeMoments::value_mean)
    }

    pub fn value_sds(&self) -> impl Iterator<Item = f64> + '_ {
        self.smoothed.iter().map(|m| m.value_var().max(0.0).sqrt())
    }

    /// Largest absolute difference between any mean or covariance entry.
    pub fn max_abs_diff(&self, other: &PosteriorBelief) -> f64 {
        fn diff(a: &[NodeMoments], b: &[NodeMoments]) -> f64 {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            a.iter()
                .zip(b)
                .map(|(x, y)| (x.mean - y.mean).amax().max((x.cov - y.cov).amax()))
                .fold(0.0, f64::max)
        }
        diff(&self.smoothed, &other.smoothed)
            .max(diff(&self.chain.filtered, &other.chain.filtered))
            .max(diff(&self.chain.predicted, &other.chain.predicted))
    }
}
