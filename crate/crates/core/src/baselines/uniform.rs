use rand::Rng;

use crate::error::Result;
use crate::model::Grid;
use crate::policy::{Feedback, Policy, Query};
use crate::rng::SimRng;

pub fn select_uniform<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> usize {
    rng.gen_range(0..grid.resolution())
}

#[derive(Debug, Clone)]
pub struct UniformPolicy {
    grid: Grid,
}

impl UniformPolicy {
    pub fn new(grid: Grid) -> Self {
        Self { grid }
    }
}

impl Policy for UniformPolicy {
    fn query(&mut self, rng: &mut SimRng) -> Result<Query> {
        Ok(Query::Node(select_uniform(&self.grid, rng)))
    }

    fn wants_value(&self) -> bool {
        false
    }

    fn update(&mut self, _query: Query, _feedback: Feedback) -> Result<()> {
        Ok(())
    }
}
