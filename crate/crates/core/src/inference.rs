//! Exact inference on the value/gradient chain.
//!
//! The model is a linear-Gaussian chain, so sum-product message passing
//! reduces to a forward filter followed by a backward (RTS) smoother. Joint
//! posterior draws use forward-filtering backward-sampling.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ChainHyperparams, FilteredChain, Grid, NodeMoments, Observation, PosteriorBelief};

/// Eigenvalue cutoff for pseudo-inverses and clamp window for diagonals.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Per-interval transition maps `A_i = [[1, dx_i], [0, 1]]` and the shared
/// process covariance `Q = diag(sigma_f^2, sigma_g^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    spacings: Vec<f64>,
    process_cov: Matrix2<f64>,
}

impl TransitionModel {
    pub fn new(grid: &Grid, hyper: &ChainHyperparams) -> Self {
        let spacings = (1..grid.resolution()).map(|i| grid.spacing(i)).collect();
        Self {
            spacings,
            process_cov: hyper.process_cov(),
        }
    }

    /// Number of nodes the model links.
    pub fn nodes(&self) -> usize {
        self.spacings.len() + 1
    }

    /// Map from node `i - 1` to node `i`.
    pub fn transition(&self, i: usize) -> Matrix2<f64> {
        Matrix2::new(1.0, self.spacings[i - 1], 0.0, 1.0)
    }

    pub fn process_cov(&self) -> &Matrix2<f64> {
        &self.process_cov
    }

    fn predict(&self, i: usize, from: &NodeMoments) -> NodeMoments {
        let a = self.transition(i);
        NodeMoments::new(a * from.mean, tidy(a * from.cov * a.transpose() + self.process_cov))
    }
}

/// Symmetrize and clamp tiny negative diagonal entries to zero.
fn tidy(c: Matrix2<f64>) -> Matrix2<f64> {
    let mut s = (c + c.transpose()) * 0.5;
    for k in 0..2 {
        if s[(k, k)] < 0.0 && s[(k, k)] > -SINGULAR_TOL {
            s[(k, k)] = 0.0;
        }
    }
    s
}

fn check_psd(c: &Matrix2<f64>) -> Result<()> {
    let ok_diag = c[(0, 0)] >= -SINGULAR_TOL && c[(1, 1)] >= -SINGULAR_TOL;
    let scale = c[(0, 0)].abs().max(c[(1, 1)].abs()).max(1.0);
    let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    let finite = c.iter().all(|v| v.is_finite());
    if finite && ok_diag && det >= -SINGULAR_TOL * scale * scale {
        Ok(())
    } else {
        Err(Error::Invariant(format!(
            "covariance is not positive semidefinite: {c:?}"
        )))
    }
}

/// Moore-Penrose inverse of a symmetric 2x2 matrix; eigenvalues at or below
/// `SINGULAR_TOL` (relative to the largest, floor 1) are treated as zero.
pub fn symmetric_pinv(c: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = c.symmetric_eigen();
    let cutoff = SINGULAR_TOL * eig.eigenvalues.amax().max(1.0);
    let mut inv = Matrix2::zeros();
    for k in 0..2 {
        let lambda = eig.eigenvalues[k];
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            inv += v * v.transpose() / lambda;
        }
    }
    inv
}

/// Symmetric square root factor `L` with `L L^T = c`, zeroing negative
/// eigenvalues.
fn psd_sqrt(c: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = c.symmetric_eigen();
    let mut root = Matrix2::zeros();
    for k in 0..2 {
        let lambda = eig.eigenvalues[k].max(0.0);
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(k);
            root += v * v.transpose() * lambda.sqrt();
        }
    }
    root
}

/// Gaussian measurement update of one node against a scalar observation of
/// its value or gradient component. A zero-noise observation pins the
/// component exactly.
pub fn incorporate_observation(node: &NodeMoments, obs: &Observation) -> Result<NodeMoments> {
    check_psd(&node.cov)?;
    if !(obs.noise_var.is_finite() && obs.noise_var >= 0.0) {
        return Err(Error::Domain(format!("invalid noise variance {}", obs.noise_var)));
    }
    let k = obs.kind.component();
    let prior_var = node.cov[(k, k)].max(0.0);
    let innovation_var = prior_var + obs.noise_var;
    if innovation_var <= 0.0 {
        // The component is already known exactly and so is the measurement.
        return Ok(*node);
    }
    let cross: Vector2<f64> = node.cov.column(k).into_owned();
    let gain = cross / innovation_var;
    let mut mean = node.mean + gain * (obs.measurement - node.mean[k]);
    let mut cov = tidy(node.cov - gain * cross.transpose());
    if obs.noise_var == 0.0 {
        mean[k] = obs.measurement;
        for j in 0..2 {
            cov[(k, j)] = 0.0;
            cov[(j, k)] = 0.0;
        }
    }
    Ok(NodeMoments::new(mean, cov))
}

/// Observations sorted by node, then kind; input order is kept among ties.
fn ordered(obs: &[Observation]) -> Vec<Observation> {
    let mut sorted = obs.to_vec();
    sorted.sort_by_key(|o| (o.node, o.kind));
    sorted
}

/// Forward pass over the chain. Cost is linear in the number of nodes plus
/// the number of observations.
pub fn forward_filter(grid: &Grid, hyper: &ChainHyperparams, observations: &[Observation]) -> Result<FilteredChain> {
    hyper.validate()?;
    for o in observations {
        o.validate(grid)?;
    }
    let tm = TransitionModel::new(grid, hyper);
    let sorted = ordered(observations);
    let n = grid.resolution();
    let mut predicted = Vec::with_capacity(n);
    let mut filtered = Vec::with_capacity(n);
    let mut next = sorted.iter().peekable();
    let mut current = NodeMoments::new(hyper.prior_mean_vector(), tidy(hyper.prior_cov_matrix()));
    for i in 0..n {
        if i > 0 {
            current = tm.predict(i, &filtered[i - 1]);
        }
        predicted.push(current);
        while let Some(o) = next.next_if(|o| o.node == i) {
            current = incorporate_observation(&current, o)?;
        }
        filtered.push(current);
    }
    Ok(FilteredChain { predicted, filtered })
}

/// Smoother gain `J_i = P_i A_{i+1}^T (P^-_{i+1})^+`.
fn smoother_gain(chain: &FilteredChain, tm: &TransitionModel, i: usize) -> Matrix2<f64> {
    let a = tm.transition(i + 1);
    chain.filtered[i].cov * a.transpose() * symmetric_pinv(&chain.predicted[i + 1].cov)
}

fn check_lengths(chain: &FilteredChain, tm: &TransitionModel) -> Result<()> {
    if chain.len() != tm.nodes() {
        return Err(Error::Invariant(format!(
            "chain has {} nodes but transition model has {}",
            chain.len(),
            tm.nodes()
        )));
    }
    Ok(())
}

/// Backward RTS recursion producing smoothed marginals.
pub fn backward_smooth(chain: FilteredChain, tm: &TransitionModel) -> Result<PosteriorBelief> {
    check_lengths(&chain, tm)?;
    let n = chain.len();
    let mut smoothed = chain.filtered.clone();
    for i in (0..n - 1).rev() {
        let gain = smoother_gain(&chain, tm, i);
        let next = &smoothed[i + 1];
        let pred = &chain.predicted[i + 1];
        let filt = &chain.filtered[i];
        let mean = filt.mean + gain * (next.mean - pred.mean);
        let cov = tidy(filt.cov + gain * (next.cov - pred.cov) * gain.transpose());
        smoothed[i] = NodeMoments::new(mean, cov);
    }
    Ok(PosteriorBelief { chain, smoothed })
}

/// Filter and smooth in one call.
pub fn posterior(grid: &Grid, hyper: &ChainHyperparams, observations: &[Observation]) -> Result<PosteriorBelief> {
    let chain = forward_filter(grid, hyper, observations)?;
    backward_smooth(chain, &TransitionModel::new(grid, hyper))
}

/// One exact joint draw of every node state from the posterior.
pub fn sample_trajectory<R: Rng + ?Sized>(
    chain: &FilteredChain,
    tm: &TransitionModel,
    rng: &mut R,
) -> Result<Vec<Vector2<f64>>> {
    check_lengths(chain, tm)?;
    let n = chain.len();
    let draw = |m: &NodeMoments, rng: &mut R| -> Vector2<f64> {
        let z = Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        m.mean + psd_sqrt(&m.cov) * z
    };
    let mut samples = vec![Vector2::zeros(); n];
    samples[n - 1] = draw(&chain.filtered[n - 1], rng);
    for i in (0..n - 1).rev() {
        let gain = smoother_gain(chain, tm, i);
        let pred = &chain.predicted[i + 1];
        let filt = &chain.filtered[i];
        let mean = filt.mean + gain * (samples[i + 1] - pred.mean);
        let cov = tidy(filt.cov - gain * pred.cov * gain.transpose());
        samples[i] = draw(&NodeMoments::new(mean, cov), rng);
    }
    Ok(samples)
}
