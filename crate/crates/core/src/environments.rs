//! Synthetic objectives with analytic gradients and noisy feedback.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::acquisition::argmax;
use crate::error::{Error, Result};
use crate::model::Grid;
use crate::rng::SimRng;

/// Built-in objectives, all defined on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionId {
    /// Sloped, single maximum at 0.8.
    F1,
    /// Three narrow bumps of similar height; the tallest sits at 0.65.
    F2,
    /// Two superposed sinusoids.
    F3,
}

impl FunctionId {
    pub const ALL: [FunctionId; 3] = [FunctionId::F1, FunctionId::F2, FunctionId::F3];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::F1 => "f1",
            FunctionId::F2 => "f2",
            FunctionId::F3 => "f3",
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(FunctionId::F1),
            "f2" => Ok(FunctionId::F2),
            "f3" => Ok(FunctionId::F3),
            other => Err(Error::Config(format!(
                "unknown function '{other}' (expected f1, f2 or f3)"
            ))),
        }
    }
}

const F2_BUMPS: [(f64, f64, f64); 3] = [(0.9, 0.2, 0.05), (1.0, 0.65, 0.03), (0.85, 0.9, 0.04)];

fn builtin_value(id: FunctionId, x: f64) -> f64 {
    match id {
        FunctionId::F1 => 1.0 - 2.5 * (x - 0.8) * (x - 0.8),
        FunctionId::F2 => F2_BUMPS
            .iter()
            .map(|&(a, m, s)| a * (-(x - m) * (x - m) / (2.0 * s * s)).exp())
            .sum(),
        FunctionId::F3 => (2.0 * PI * x).sin() + 0.3 * (6.0 * PI * x).sin(),
    }
}

fn builtin_gradient(id: FunctionId, x: f64) -> f64 {
    match id {
        FunctionId::F1 => -5.0 * (x - 0.8),
        FunctionId::F2 => F2_BUMPS
            .iter()
            .map(|&(a, m, s)| -a * (x - m) / (s * s) * (-(x - m) * (x - m) / (2.0 * s * s)).exp())
            .sum(),
        FunctionId::F3 => 2.0 * PI * (2.0 * PI * x).cos() + 1.8 * PI * (6.0 * PI * x).cos(),
    }
}

/// A function given as values and gradients at knots, interpolated by
/// piecewise cubic Hermite polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    xs: Vec<f64>,
    values: Vec<f64>,
    gradients: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct TableRow {
    x: f64,
    value: f64,
    gradient: f64,
}

impl HermiteTable {
    pub fn new(xs: Vec<f64>, values: Vec<f64>, gradients: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() || xs.len() != gradients.len() {
            return Err(Error::Config(
                "function table needs at least 2 rows and equal-length columns".into(),
            ));
        }
        if xs.iter().chain(&values).chain(&gradients).any(|v| !v.is_finite()) {
            return Err(Error::Config("function table entries must be finite".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "function table x column must be strictly increasing".into(),
            ));
        }
        Ok(Self { xs, values, gradients })
    }

    /// Read a CSV table with header `x,value,gradient`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })?;
        let (mut xs, mut values, mut gradients) = (Vec::new(), Vec::new(), Vec::new());
        for row in reader.deserialize::<TableRow>() {
            let row = row.map_err(|e| Error::Format {
                path: path.into(),
                message: e.to_string(),
            })?;
            xs.push(row.x);
            values.push(row.value);
            gradients.push(row.gradient);
        }
        Self::new(xs, values, gradients).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })
    }

    fn segment(&self, x: f64) -> (usize, f64, f64) {
        let x = x.clamp(self.xs[0], self.xs[self.xs.len() - 1]);
        let k = self.xs.partition_point(|&p| p <= x).clamp(1, self.xs.len() - 1) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        (k, h, (x - self.xs[k]) / h)
    }

    fn value(&self, x: f64) -> f64 {
        let (k, h, t) = self.segment(x);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[k] + h10 * h * self.gradients[k] + h01 * self.values[k + 1] + h11 * h * self.gradients[k + 1]
    }

    fn gradient(&self, x: f64) -> f64 {
        let (k, h, t) = self.segment(x);
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.values[k] + d01 * self.values[k + 1]) / h + d10 * self.gradients[k] + d11 * self.gradients[k + 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Builtin(FunctionId),
    Table(HermiteTable),
}

/// An objective with its gradient and domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    id: String,
    shape: Shape,
    domain: (f64, f64),
}

impl TestFunction {
    pub fn builtin(id: FunctionId) -> Self {
        Self {
            id: id.name().to_string(),
            shape: Shape::Builtin(id),
            domain: (0.0, 1.0),
        }
    }

    pub fn tabulated(id: impl Into<String>, table: HermiteTable) -> Self {
        let domain = (table.xs[0], table.xs[table.xs.len() - 1]);
        Self {
            id: id.into(),
            shape: Shape::Table(table),
            domain,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Builtin(id) => builtin_value(*id, x),
            Shape::Table(t) => t.value(x),
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Builtin(id) => builtin_gradient(*id, x),
            Shape::Table(t) => t.gradient(x),
        }
    }
}

/// A test function observed on a grid through Gaussian noise.
///
/// Noise levels are standard deviations.
#[derive(Debug, Clone)]
pub struct Environment {
    function: TestFunction,
    grid: Grid,
    value_noise_sd: f64,
    grad_noise_sd: f64,
    rng: SimRng,
    node_values: Vec<f64>,
    optimum: (usize, f64),
}

impl Environment {
    pub fn new(
        function: TestFunction,
        grid: Grid,
        value_noise_sd: f64,
        grad_noise_sd: f64,
        rng: SimRng,
    ) -> Result<Self> {
        for (name, sd) in [("value", value_noise_sd), ("gradient", grad_noise_sd)] {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} noise sd must be finite and >= 0, got {sd}"
                )));
            }
        }
        let (lo, hi) = function.domain();
        if grid.lo() < lo || grid.hi() > hi {
            return Err(Error::Config(format!(
                "grid [{}, {}] exceeds the domain [{lo}, {hi}] of {}",
                grid.lo(),
                grid.hi(),
                function.id()
            )));
        }
        let node_values: Vec<f64> = grid.points().iter().map(|&x| function.value(x)).collect();
        let best = argmax(node_values.iter().copied()).expect("grid is non-empty");
        let optimum = (best, node_values[best]);
        Ok(Self {
            function,
            grid,
            value_noise_sd,
            grad_noise_sd,
            rng,
            node_values,
            optimum,
        })
    }

    pub fn function(&self) -> &TestFunction {
        &self.function
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn value_noise_sd(&self) -> f64 {
        self.value_noise_sd
    }

    pub fn grad_noise_sd(&self) -> f64 {
        self.grad_noise_sd
    }

    /// True value at a node.
    pub fn true_value(&self, node: usize) -> f64 {
        self.node_values[node]
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.grid.resolution() {
            return Err(Error::Domain(format!(
                "node {node} outside grid of {} points",
                self.grid.resolution()
            )));
        }
        Ok(())
    }

    fn noise(&mut self, sd: f64) -> f64 {
        if sd == 0.0 {
            0.0
        } else {
            sd * self.rng.sample::<f64, _>(StandardNormal)
        }
    }

    pub fn observe_value(&mut self, node: usize) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.node_values[node] + self.noise(self.value_noise_sd))
    }

    pub fn observe_gradient(&mut self, node: usize) -> Result<f64> {
        self.check_node(node)?;
        let g = self.function.gradient(self.grid.x(node));
        Ok(g + self.noise(self.grad_noise_sd))
    }

    /// Noisy gradient at an arbitrary point of the domain.
    pub fn observe_gradient_at(&mut self, x: f64) -> Result<f64> {
        self.check_position(x)?;
        let g = self.function.gradient(x);
        Ok(g + self.noise(self.grad_noise_sd))
    }

    /// Noiseless gradient at an arbitrary point of the domain.
    pub fn exact_gradient_at(&self, x: f64) -> Result<f64> {
        self.check_position(x)?;
        Ok(self.function.gradient(x))
    }

    fn check_position(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.function.domain();
        if !(x.is_finite() && x >= lo && x <= hi) {
            return Err(Error::Domain(format!("position {x} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Best grid node by true value (lowest index on ties) and its value.
    pub fn grid_optimum(&self) -> (usize, f64) {
        self.optimum
    }

    /// `f(x*) - f(x_node)`.
    pub fn instantaneous_regret(&self, node: usize) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.optimum.1 - self.node_values[node])
    }

    /// Regret of a continuous position against the grid optimum, floored at
    /// zero for off-grid points that beat every node.
    pub fn regret_at(&self, x: f64) -> Result<f64> {
        self.check_position(x)?;
        Ok((self.optimum.1 - self.function.value(x)).max(0.0))
    }
}
