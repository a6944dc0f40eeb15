//! Building blocks of the encoder, the recurrent sweeps and the baselines.
//!
//! Layers are plain descriptions (names and widths). Parameters live in a
//! [`ParameterSet`] under `"{layer}.{param}"` keys; `init` fills them and
//! `forward` reads them back through a [`Bound`] on a tape. Sequences are
//! always batch-major, `[B, T, F]`.

mod attention;
mod conv;
mod dense;
mod ffn;
mod norm;
mod recurrent;

pub use attention::MultiHeadAttention;
pub use conv::Conv1d;
pub use dense::{Dense, Head};
pub use ffn::FeedForward;
pub use norm::{ResidualNorm, LAYER_NORM_EPS};
pub use recurrent::{BiLstm, GruLayer, LstmDirection, RnnLayer};

use rand::Rng;

use crate::error::Result;
use crate::tensor::{NumArray, Tape, Var};

/// Uniform(-a, a) with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> NumArray {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-a..a)).collect();
    NumArray::new(shape, data).expect("glorot values are finite")
}

/// Inverted dropout. With `rng == None` or a zero rate this is the identity.
pub fn dropout(tape: &mut Tape, x: Var, rate: f64, rng: Option<&mut (dyn rand::RngCore + '_)>) -> Result<Var> {
    let Some(rng) = rng else { return Ok(x) };
    if rate <= 0.0 {
        return Ok(x);
    }
    let keep = 1.0 - rate;
    let shape = tape.shape(x).to_vec();
    let n = shape.iter().product();
    let mask: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    let m = tape.constant(NumArray::new(&shape, mask)?);
    tape.mul(x, m)
}
