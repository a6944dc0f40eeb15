use rand::Rng;

use super::Dense;
use crate::error::Result;
use crate::tensor::{Bound, ParameterSet, Tape, Var};

/// Inner width of the position-wise feed-forward block.
pub const FFN_INNER: usize = 256;

/// Position-wise `relu(x W1 + b1) W2 + b2`; no mixing across time steps.
#[derive(Clone, Debug)]
pub struct FeedForward {
    pub expand: Dense,
    pub project: Dense,
}

impl FeedForward {
    pub fn new(name: &str, width: usize) -> Self {
        Self {
            expand: Dense::new(format!("{name}.expand"), width, FFN_INNER),
            project: Dense::new(format!("{name}.project"), FFN_INNER, width),
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        self.expand.init(params, rng)?;
        self.project.init(params, rng)
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let h = self.expand.forward(tape, p, x)?;
        let h = tape.relu(h);
        self.project.forward(tape, p, h)
    }
}
