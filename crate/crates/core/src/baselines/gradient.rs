use crate::error::{Error, Result};
use crate::policy::{Feedback, GradientFeedback, Policy, Query};
use crate::rng::SimRng;

/// Continuous position and constant step size of a gradient ascent run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientAscentState {
    pub position: f64,
    pub step_size: f64,
}

/// `clamp(x + eta * g, lo, hi)`.
pub fn gradient_ascent_step(state: GradientAscentState, grad_obs: f64, domain: (f64, f64)) -> GradientAscentState {
    let next = (state.position + state.step_size * grad_obs).clamp(domain.0, domain.1);
    GradientAscentState {
        position: next,
        ..state
    }
}

#[derive(Debug, Clone)]
pub struct GradientAscentPolicy {
    state: GradientAscentState,
    domain: (f64, f64),
    exact: bool,
}

impl GradientAscentPolicy {
    pub fn new(start: f64, step_size: f64, domain: (f64, f64), exact: bool) -> Result<Self> {
        if !(step_size.is_finite() && step_size > 0.0) {
            return Err(Error::Config(format!("step size must be > 0, got {step_size}")));
        }
        if !(start >= domain.0 && start <= domain.1) {
            return Err(Error::Config(format!(
                "start {start} outside [{}, {}]",
                domain.0, domain.1
            )));
        }
        Ok(Self {
            state: GradientAscentState {
                position: start,
                step_size,
            },
            domain,
            exact,
        })
    }

    pub fn state(&self) -> GradientAscentState {
        self.state
    }
}

impl Policy for GradientAscentPolicy {
    fn query(&mut self, _rng: &mut SimRng) -> Result<Query> {
        Ok(Query::Position(self.state.position))
    }

    fn wants_value(&self) -> bool {
        false
    }

    fn gradient_feedback(&self) -> GradientFeedback {
        if self.exact {
            GradientFeedback::Exact
        } else {
            GradientFeedback::Noisy
        }
    }

    fn update(&mut self, _query: Query, feedback: Feedback) -> Result<()> {
        let g = feedback
            .gradient
            .ok_or_else(|| Error::Invariant("gradient ascent needs gradient feedback".into()))?;
        self.state = gradient_ascent_step(self.state, g, self.domain);
        Ok(())
    }
}
