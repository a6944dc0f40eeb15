use rand::Rng;

use super::glorot;
use crate::error::{Error, Result};
use crate::tensor::{Bound, ParameterSet, Tape, Var};

/// Multi-head scaled dot-product self-attention.
///
/// Head `i` projects the input with its own `W^Q_i, W^K_i, W^V_i: [F, d_k]`;
/// the concatenated head outputs are mapped back to width `F` by
/// `W^O: [h * d_k, F]`, so the output shape always equals the input shape.
#[derive(Clone, Debug)]
pub struct MultiHeadAttention {
    pub name: String,
    pub features: usize,
    pub heads: usize,
    pub key_width: usize,
}

impl MultiHeadAttention {
    pub fn new(name: impl Into<String>, features: usize, heads: usize, key_width: usize) -> Result<Self> {
        if heads == 0 || key_width == 0 {
            return Err(Error::Config(format!(
                "attention needs at least one head and a positive key width (h={heads}, d_k={key_width})"
            )));
        }
        Ok(Self {
            name: name.into(),
            features,
            heads,
            key_width,
        })
    }

    pub fn w_q(&self, head: usize) -> String {
        format!("{}.w_q.{head}", self.name)
    }

    pub fn w_k(&self, head: usize) -> String {
        format!("{}.w_k.{head}", self.name)
    }

    pub fn w_v(&self, head: usize) -> String {
        format!("{}.w_v.{head}", self.name)
    }

    pub fn w_o(&self) -> String {
        format!("{}.w_o", self.name)
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        let (f, dk) = (self.features, self.key_width);
        for i in 0..self.heads {
            params.insert(self.w_q(i), glorot(&[f, dk], f, dk, rng))?;
            params.insert(self.w_k(i), glorot(&[f, dk], f, dk, rng))?;
            params.insert(self.w_v(i), glorot(&[f, dk], f, dk, rng))?;
        }
        let hk = self.heads * dk;
        params.insert(self.w_o(), glorot(&[hk, f], hk, f, rng))
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        self.forward_with_weights(tape, p, x).map(|(out, _)| out)
    }

    /// Also returns the per-head attention matrices `A_i: [B, T, T]`.
    pub fn forward_with_weights(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<(Var, Vec<Var>)> {
        let scale = 1.0 / (self.key_width as f64).sqrt();
        let mut heads = Vec::with_capacity(self.heads);
        let mut weights = Vec::with_capacity(self.heads);
        for i in 0..self.heads {
            let q = tape.matmul(x, p.get(&self.w_q(i))?)?;
            let k = tape.matmul(x, p.get(&self.w_k(i))?)?;
            let v = tape.matmul(x, p.get(&self.w_v(i))?)?;
            let scores = tape.batch_matmul(q, k, true)?;
            let scores = tape.affine(scores, scale, 0.0)?;
            let a = tape.softmax_last(scores)?;
            heads.push(tape.batch_matmul(a, v, false)?);
            weights.push(a);
        }
        let z = if heads.len() == 1 {
            heads[0]
        } else {
            tape.concat_last(&heads)?
        };
        let out = tape.matmul(z, p.get(&self.w_o())?)?;
        Ok((out, weights))
    }
}
