use rand::Rng;

use super::glorot;
use crate::error::Result;
use crate::tensor::{Bound, NumArray, ParameterSet, Tape, Var};

/// Affine map `x W + b` with `W: [input, output]`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub name: String,
    pub input: usize,
    pub output: usize,
}

impl Dense {
    pub fn new(name: impl Into<String>, input: usize, output: usize) -> Self {
        Self {
            name: name.into(),
            input,
            output,
        }
    }

    pub fn weight(&self) -> String {
        format!("{}.weight", self.name)
    }

    pub fn bias(&self) -> String {
        format!("{}.bias", self.name)
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        params.insert(self.weight(), glorot(&[self.input, self.output], self.input, self.output, rng))?;
        params.insert(self.bias(), NumArray::zeros(&[self.output]))
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let y = tape.matmul(x, p.get(&self.weight())?)?;
        tape.add_bias(y, p.get(&self.bias())?)
    }
}

/// Two-layer classification head: `relu(x W1 + b1) W2 + b2`, one logit per row.
///
/// [`Head::forward`] returns logits of shape `[B]`; the probability is the
/// sigmoid of the logit.
#[derive(Clone, Debug)]
pub struct Head {
    pub hidden: Dense,
    pub output: Dense,
}

impl Head {
    pub fn new(name: &str, input: usize, hidden: usize) -> Self {
        Self {
            hidden: Dense::new(format!("{name}.hidden"), input, hidden),
            output: Dense::new(format!("{name}.output"), hidden, 1),
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        self.hidden.init(params, rng)?;
        self.output.init(params, rng)
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, flat: Var) -> Result<Var> {
        let h = self.hidden.forward(tape, p, flat)?;
        let h = tape.relu(h);
        let z = self.output.forward(tape, p, h)?;
        let b = tape.shape(z)[0];
        tape.reshape(z, &[b])
    }
}
