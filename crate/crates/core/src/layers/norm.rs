use crate::error::{Error, Result};
use crate::tensor::{Bound, NumArray, ParameterSet, Tape, Var};

pub const LAYER_NORM_EPS: f64 = 1e-6;

/// Layer normalization over the feature axis, optionally preceded by a
/// residual addition of the sub-layer input.
#[derive(Clone, Debug)]
pub struct ResidualNorm {
    pub name: String,
    pub width: usize,
    /// When false the sub-layer input is ignored (plain `LN(sub_output)`).
    pub residual: bool,
}

impl ResidualNorm {
    pub fn new(name: impl Into<String>, width: usize, residual: bool) -> Self {
        Self {
            name: name.into(),
            width,
            residual,
        }
    }

    pub fn gamma(&self) -> String {
        format!("{}.gamma", self.name)
    }

    pub fn beta(&self) -> String {
        format!("{}.beta", self.name)
    }

    pub fn init(&self, params: &mut ParameterSet) -> Result<()> {
        params.insert(self.gamma(), NumArray::full(&[self.width], 1.0))?;
        params.insert(self.beta(), NumArray::zeros(&[self.width]))
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, sub_output: Var, sub_input: Var) -> Result<Var> {
        let x = if self.residual {
            if tape.shape(sub_output) != tape.shape(sub_input) {
                return Err(Error::shape(
                    "residual_norm",
                    tape.shape(sub_output),
                    tape.shape(sub_input),
                ));
            }
            tape.add(sub_output, sub_input)?
        } else {
            sub_output
        };
        tape.layer_norm(x, p.get(&self.gamma())?, p.get(&self.beta())?, LAYER_NORM_EPS)
    }
}
