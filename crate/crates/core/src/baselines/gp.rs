//! Exact Gaussian-process regression with a squared-exponential kernel.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::acquisition::argmax;
use crate::error::{Error, Result};
use crate::model::Grid;
use crate::policy::{Feedback, Policy, Query};
use crate::rng::SimRng;

const BASE_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_var: f64,
    pub length_scale: f64,
    pub noise_var: f64,
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.signal_var.is_finite() && self.signal_var > 0.0) {
            return Err(Error::Config(format!(
                "GP signal variance must be > 0, got {}",
                self.signal_var
            )));
        }
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(Error::Config(format!(
                "GP length scale must be > 0, got {}",
                self.length_scale
            )));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::Config(format!(
                "GP noise variance must be >= 0, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    pub fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        self.signal_var * (-d * d / (2.0 * self.length_scale * self.length_scale)).exp()
    }
}

#[derive(Debug, Clone)]
pub struct GpModel {
    params: KernelParams,
    inputs: Vec<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
    /// `(K + sigma_n^2 I)^{-1} y`.
    weights: DVector<f64>,
}

/// Factorize `K + (sigma_n^2 + jitter) I`, escalating the jitter tenfold up
/// to 1e-6 if the factorization fails.
pub fn gp_fit(inputs: &[f64], targets: &[f64], params: KernelParams) -> Result<GpModel> {
    params.validate()?;
    if inputs.len() != targets.len() {
        return Err(Error::Config(format!(
            "{} GP inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    if inputs.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::Domain("GP training data must be finite".into()));
    }
    let n = inputs.len();
    if n == 0 {
        return Ok(GpModel {
            params,
            inputs: Vec::new(),
            factor: None,
            weights: DVector::zeros(0),
        });
    }
    let gram = DMatrix::from_fn(n, n, |a, b| params.kernel(inputs[a], inputs[b]));
    let mut jitter = BASE_JITTER;
    let factor = loop {
        let mut k = gram.clone();
        for i in 0..n {
            k[(i, i)] += params.noise_var + jitter;
        }
        if let Some(c) = Cholesky::new(k) {
            break c;
        }
        jitter *= 10.0;
        if jitter > MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "GP kernel matrix of {n} points not positive definite after jitter {MAX_JITTER}"
            )));
        }
    };
    let weights = factor.solve(&DVector::from_column_slice(targets));
    Ok(GpModel {
        params,
        inputs: inputs.to_vec(),
        factor: Some(factor),
        weights,
    })
}

impl GpModel {
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Predictive mean and variance at each query point.
    pub fn predict_many(&self, queries: &[f64]) -> Vec<(f64, f64)> {
        let prior = self.params.signal_var;
        let Some(factor) = &self.factor else {
            return queries.iter().map(|_| (0.0, prior)).collect();
        };
        let n = self.inputs.len();
        let cross = DMatrix::from_fn(n, queries.len(), |a, q| self.params.kernel(self.inputs[a], queries[q]));
        let means = cross.tr_mul(&self.weights);
        let whitened = factor
            .l_dirty()
            .solve_lower_triangular(&cross)
            .expect("Cholesky factor has a positive diagonal");
        (0..queries.len())
            .map(|q| {
                let reduction = whitened.column(q).norm_squared();
                (means[q], (prior - reduction).clamp(0.0, prior))
            })
            .collect()
    }
}

pub fn gp_predict(model: &GpModel, query: f64) -> (f64, f64) {
    model.predict_many(&[query])[0]
}

/// Argmax over grid nodes of `mean + z * sd`.
pub fn select_gp_ucb(model: &GpModel, grid: &Grid, z: f64) -> usize {
    let scores = model
        .predict_many(grid.points())
        .into_iter()
        .map(|(m, v)| if z == 0.0 { m } else { m + z * v.sqrt() });
    argmax(scores).expect("grid is non-empty")
}

/// GP-UCB refit from scratch on all observations every round.
#[derive(Debug, Clone)]
pub struct GpUcbPolicy {
    grid: Grid,
    params: KernelParams,
    z: f64,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl GpUcbPolicy {
    pub fn new(grid: Grid, params: KernelParams, z: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid,
            params,
            z,
            inputs: Vec::new(),
            targets: Vec::new(),
        })
    }
}

impl Policy for GpUcbPolicy {
    fn query(&mut self, _rng: &mut SimRng) -> Result<Query> {
        let model = gp_fit(&self.inputs, &self.targets, self.params)?;
        Ok(Query::Node(select_gp_ucb(&model, &self.grid, self.z)))
    }

    fn update(&mut self, query: Query, feedback: Feedback) -> Result<()> {
        match (query, feedback.value) {
            (Query::Node(n), Some(v)) => {
                self.inputs.push(self.grid.x(n));
                self.targets.push(v);
                Ok(())
            }
            _ => Err(Error::Invariant("GP update needs a node and a value".into())),
        }
    }
}
