//! Common driver for every optimisation policy.

use std::time::Instant;

use crate::environments::Environment;
use crate::error::Result;
use crate::regret::RegretRecord;
use crate::rng::SimRng;

/// Where a policy wants to sample next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    Node(usize),
    /// A continuous position inside the domain.
    Position(f64),
}

/// How a policy wants gradient feedback delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientFeedback {
    None,
    Noisy,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub value: Option<f64>,
    pub gradient: Option<f64>,
}

pub trait Policy {
    fn query(&mut self, rng: &mut SimRng) -> Result<Query>;

    fn wants_value(&self) -> bool {
        true
    }

    fn gradient_feedback(&self) -> GradientFeedback {
        GradientFeedback::None
    }

    fn update(&mut self, query: Query, feedback: Feedback) -> Result<()>;
}

/// Run `horizon` query/observe/update rounds and record the regret of every
/// pull against the environment's grid optimum.
pub fn run_policy<P: Policy + ?Sized>(
    policy: &mut P,
    env: &mut Environment,
    horizon: usize,
    rng: &mut SimRng,
    replication: u64,
) -> Result<RegretRecord> {
    let started = Instant::now();
    let mut record = RegretRecord::new(replication);
    for _ in 0..horizon {
        let query = policy.query(rng)?;
        let (node, regret) = match query {
            Query::Node(n) => (n, env.instantaneous_regret(n)?),
            Query::Position(x) => (env.grid().snap(x)?, env.regret_at(x)?),
        };
        record.push(node, regret);
        let value = if policy.wants_value() {
            Some(match query {
                Query::Node(n) => env.observe_value(n)?,
                Query::Position(x) => {
                    let n = env.grid().snap(x)?;
                    env.observe_value(n)?
                }
            })
        } else {
            None
        };
        let gradient = match (policy.gradient_feedback(), query) {
            (GradientFeedback::None, _) => None,
            (GradientFeedback::Noisy, Query::Node(n)) => Some(env.observe_gradient(n)?),
            (GradientFeedback::Noisy, Query::Position(x)) => Some(env.observe_gradient_at(x)?),
            (GradientFeedback::Exact, Query::Node(n)) => Some(env.exact_gradient_at(env.grid().x(n))?),
            (GradientFeedback::Exact, Query::Position(x)) => Some(env.exact_gradient_at(x)?),
        };
        policy.update(query, Feedback { value, gradient })?;
    }
    record.wall_time_s = started.elapsed().as_secs_f64();
    Ok(record)
}
