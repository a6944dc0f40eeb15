use rand::Rng;

use super::glorot;
use crate::error::{Error, Result};
use crate::tensor::{Bound, NumArray, ParameterSet, Tape, Var};

/// Valid-padding 1-D convolution over time followed by ReLU.
///
/// The weight is stored unrolled as `[kernel * in_channels, out_channels]`,
/// tap-major: rows `j * in_channels .. (j + 1) * in_channels` act on step
/// `t + j`.
#[derive(Clone, Debug)]
pub struct Conv1d {
    pub name: String,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
}

impl Conv1d {
    pub fn new(name: impl Into<String>, in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Self {
            name: name.into(),
            in_channels,
            out_channels,
            kernel,
        }
    }

    pub fn weight(&self) -> String {
        format!("{}.weight", self.name)
    }

    pub fn bias(&self) -> String {
        format!("{}.bias", self.name)
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        let fan_in = self.kernel * self.in_channels;
        params.insert(
            self.weight(),
            glorot(&[fan_in, self.out_channels], fan_in, self.out_channels, rng),
        )?;
        params.insert(self.bias(), NumArray::zeros(&[self.out_channels]))
    }

    /// `[B, T, C_in] -> [B, T - kernel + 1, C_out]`.
    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let steps = tape.shape(x)[1];
        if self.kernel == 0 || self.kernel > steps {
            return Err(Error::Config(format!(
                "conv1d kernel {} does not fit a sequence of length {steps}",
                self.kernel
            )));
        }
        let out_len = steps - self.kernel + 1;
        let taps: Vec<Var> = (0..self.kernel)
            .map(|j| tape.slice_time(x, j, out_len))
            .collect::<Result<_>>()?;
        let cols = if taps.len() == 1 {
            taps[0]
        } else {
            tape.concat_last(&taps)?
        };
        let y = tape.matmul(cols, p.get(&self.weight())?)?;
        let y = tape.add_bias(y, p.get(&self.bias())?)?;
        Ok(tape.relu(y))
    }
}
