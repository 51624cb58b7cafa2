//! Bayesian chain model coupling function values and gradients on a 1-D
//! grid, with upper-credible-bound and Thompson acquisition, comparison
//! baselines and a seeded regret benchmark harness.

pub mod acquisition;
pub mod baselines;
pub mod benchmark;
pub mod environments;
mod error;
pub mod inference;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod policy;
pub mod regret;
pub mod rng;
pub mod snapshot;

pub use error::{Error, Result};
pub use model::{ChainHyperparams, FilteredChain, Grid, NodeMoments, Observation, ObservationKind, PosteriorBelief};
