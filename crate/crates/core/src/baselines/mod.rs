//! Comparison policies: UCB-Tuned bandit, GP-UCB, gradient ascent and
//! uniform selection.

mod bandit;
mod gp;
mod gradient;
mod uniform;

pub use bandit::{select_ucb_tuned, ucb_tuned_score, ArmStats, UcbTunedPolicy};
pub use gp::{gp_fit, gp_predict, select_gp_ucb, GpModel, GpUcbPolicy, KernelParams};
pub use gradient::{gradient_ascent_step, GradientAscentPolicy, GradientAscentState};
pub use uniform::{select_uniform, UniformPolicy};
