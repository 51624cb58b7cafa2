//! Dense brute-force posterior used to verify the chain recursions.
//!
//! Builds the joint prior over all `2(N+1)` node variables by writing every
//! state as a linear map of the independent noise terms, then conditions on
//! the observations with dense Gaussian algebra.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::model::{ChainHyperparams, Grid, Observation};

/// Largest `N` (index of the last node) the oracle accepts.
pub const MAX_ORACLE_N: usize = 256;

/// Joint Gaussian over `(F_0, G_0, F_1, G_1, ..., F_N, G_N)`.
#[derive(Debug, Clone)]
pub struct DenseGaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl DenseGaussian {
    pub fn value_mean(&self, i: usize) -> f64 {
        self.mean[2 * i]
    }

    pub fn grad_mean(&self, i: usize) -> f64 {
        self.mean[2 * i + 1]
    }

    pub fn value_var(&self, i: usize) -> f64 {
        self.cov[(2 * i, 2 * i)]
    }

    pub fn grad_var(&self, i: usize) -> f64 {
        self.cov[(2 * i + 1, 2 * i + 1)]
    }

    /// 2x2 marginal covariance of node `i`.
    pub fn node_cov(&self, i: usize) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(2 * i, 2 * i).into_owned()
    }
}

pub fn dense_posterior_oracle(
    grid: &Grid,
    hyper: &ChainHyperparams,
    observations: &[Observation],
) -> Result<DenseGaussian> {
    let last = grid.last_index();
    if last > MAX_ORACLE_N {
        return Err(Error::Usage(format!(
            "dense oracle supports N <= {MAX_ORACLE_N}, got N = {last}"
        )));
    }
    hyper.validate()?;
    for o in observations {
        o.validate(grid)?;
    }
    let nodes = last + 1;
    let dim = 2 * nodes;

    // state_i = Phi(i, 0) s_0 + sum_{k=1..i} Phi(i, k) w_k, Phi(i, k) = [[1, x_i - x_k], [0, 1]].
    let mut transfer = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..nodes {
        for k in 0..=i {
            let r = 2 * i;
            let c = 2 * k;
            transfer[(r, c)] = 1.0;
            transfer[(r, c + 1)] = grid.x(i) - grid.x(k);
            transfer[(r + 1, c + 1)] = 1.0;
        }
    }
    let mut noise_cov = DMatrix::<f64>::zeros(dim, dim);
    let p0 = hyper.prior_cov_matrix();
    noise_cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&p0);
    for k in 1..nodes {
        noise_cov[(2 * k, 2 * k)] = hyper.sigma_f_sq;
        noise_cov[(2 * k + 1, 2 * k + 1)] = hyper.sigma_g_sq;
    }
    let mut noise_mean = DVector::<f64>::zeros(dim);
    noise_mean[0] = hyper.prior_mean[0];
    noise_mean[1] = hyper.prior_mean[1];

    let prior_mean = &transfer * noise_mean;
    let prior_cov = &transfer * noise_cov * transfer.transpose();

    if observations.is_empty() {
        return Ok(DenseGaussian {
            mean: prior_mean,
            cov: prior_cov,
        });
    }

    // Canonical order makes the result independent of input order bit for bit.
    let mut observations = observations.to_vec();
    observations.sort_by(|a, b| {
        (a.node, a.kind)
            .cmp(&(b.node, b.kind))
            .then(a.measurement.total_cmp(&b.measurement))
            .then(a.noise_var.total_cmp(&b.noise_var))
    });
    let m = observations.len();
    let mut selector = DMatrix::<f64>::zeros(m, dim);
    let mut y = DVector::<f64>::zeros(m);
    let mut noise = DMatrix::<f64>::zeros(m, m);
    for (row, o) in observations.iter().enumerate() {
        selector[(row, 2 * o.node + o.kind.component())] = 1.0;
        y[row] = o.measurement;
        noise[(row, row)] = o.noise_var;
    }
    let cross = &prior_cov * selector.transpose();
    let innovation = &selector * &cross + noise;
    let innovation = (&innovation + innovation.transpose()) * 0.5;
    let inv = match innovation.clone().cholesky() {
        Some(c) => c.inverse(),
        None => {
            let cutoff = 1e-12 * innovation.amax().max(1.0);
            innovation
                .pseudo_inverse(cutoff)
                .map_err(|e| Error::Numerical(format!("oracle pseudo-inverse failed: {e}")))?
        }
    };
    let residual = y - &selector * &prior_mean;
    let mean = &prior_mean + &cross * (&inv * residual);
    let cov = &prior_cov - &cross * &inv * cross.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(DenseGaussian { mean, cov })
}
