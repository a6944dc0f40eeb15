//! LSTM, GRU and vanilla RNN cells and their sweeps over time.
//!
//! Every gate weight has shape `[H, F + H]` and acts on the concatenation
//! `[x_t, h_prev]`. States start at zero.

use rand::Rng;

use super::glorot;
use crate::error::{Error, Result};
use crate::tensor::{Bound, NumArray, ParameterSet, Tape, Var};

fn init_gate(params: &mut ParameterSet, prefix: &str, gate: &str, input: usize, hidden: usize, rng: &mut impl Rng) -> Result<()> {
    let fan_in = input + hidden;
    params.insert(format!("{prefix}.w_{gate}"), glorot(&[hidden, fan_in], fan_in, hidden, rng))?;
    params.insert(format!("{prefix}.b_{gate}"), NumArray::zeros(&[hidden]))
}

fn gate(tape: &mut Tape, p: &Bound, prefix: &str, gate: &str, xh: Var) -> Result<Var> {
    let z = tape.matmul_nt(xh, p.get(&format!("{prefix}.w_{gate}"))?)?;
    tape.add_bias(z, p.get(&format!("{prefix}.b_{gate}"))?)
}

fn zero_state(tape: &mut Tape, batch: usize, hidden: usize) -> Var {
    tape.constant(NumArray::zeros(&[batch, hidden]))
}

fn sequence_dims(tape: &Tape, x: Var) -> Result<(usize, usize)> {
    let shape = tape.shape(x);
    if shape.len() != 3 {
        return Err(Error::shape("recurrent sweep", shape, &[]));
    }
    if shape[1] == 0 {
        return Err(Error::Contract("empty sequence".into()));
    }
    Ok((shape[0], shape[1]))
}

/// Visiting order of the time axis.
fn order(steps: usize, reverse: bool) -> Vec<usize> {
    if reverse {
        (0..steps).rev().collect()
    } else {
        (0..steps).collect()
    }
}

/// One direction of an LSTM: forget, input, candidate and output gates.
#[derive(Clone, Debug)]
pub struct LstmDirection {
    pub name: String,
    pub input: usize,
    pub hidden: usize,
}

impl LstmDirection {
    pub const GATES: [&'static str; 4] = ["f", "i", "c", "o"];

    pub fn new(name: impl Into<String>, input: usize, hidden: usize) -> Self {
        Self {
            name: name.into(),
            input,
            hidden,
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        for g in Self::GATES {
            init_gate(params, &self.name, g, self.input, self.hidden, rng)?;
        }
        Ok(())
    }

    /// One cell update; returns `(h, c)`.
    pub fn step(&self, tape: &mut Tape, p: &Bound, x_t: Var, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
        let xh = tape.concat_last(&[x_t, h_prev])?;
        let f = gate(tape, p, &self.name, "f", xh)?;
        let f = tape.sigmoid(f);
        let i = gate(tape, p, &self.name, "i", xh)?;
        let i = tape.sigmoid(i);
        let cand = gate(tape, p, &self.name, "c", xh)?;
        let cand = tape.tanh(cand);
        let o = gate(tape, p, &self.name, "o", xh)?;
        let o = tape.sigmoid(o);
        let keep = tape.mul(f, c_prev)?;
        let write = tape.mul(i, cand)?;
        let c = tape.add(keep, write)?;
        let tc = tape.tanh(c);
        let h = tape.mul(o, tc)?;
        Ok((h, c))
    }

    /// Hidden states `[B, H]` for every step, indexed in time order regardless
    /// of the sweep direction.
    pub fn sweep(&self, tape: &mut Tape, p: &Bound, x: Var, reverse: bool) -> Result<Vec<Var>> {
        let (batch, steps) = sequence_dims(tape, x)?;
        let mut h = zero_state(tape, batch, self.hidden);
        let mut c = zero_state(tape, batch, self.hidden);
        let mut out = vec![h; steps];
        for t in order(steps, reverse) {
            let x_t = tape.time_step(x, t)?;
            (h, c) = self.step(tape, p, x_t, h, c)?;
            out[t] = h;
        }
        Ok(out)
    }

    /// `[B, T, F] -> [B, T, H]`.
    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let hs = self.sweep(tape, p, x, false)?;
        tape.stack_time(&hs)
    }
}

/// Forward and backward LSTM sweeps; row `t` of the output is
/// `[h_f(t), h_b(t)]`.
#[derive(Clone, Debug)]
pub struct BiLstm {
    pub forward: LstmDirection,
    pub backward: LstmDirection,
}

impl BiLstm {
    pub fn new(name: &str, input: usize, hidden: usize) -> Self {
        Self {
            forward: LstmDirection::new(format!("{name}.fwd"), input, hidden),
            backward: LstmDirection::new(format!("{name}.bwd"), input, hidden),
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        self.forward.init(params, rng)?;
        self.backward.init(params, rng)
    }

    /// `[B, T, F] -> [B, T, 2H]`.
    pub fn run(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let hf = self.forward.sweep(tape, p, x, false)?;
        let hb = self.backward.sweep(tape, p, x, true)?;
        let rows: Vec<Var> = hf
            .into_iter()
            .zip(hb)
            .map(|(f, b)| tape.concat_last(&[f, b]))
            .collect::<Result<_>>()?;
        tape.stack_time(&rows)
    }
}

/// Gated recurrent unit with update gate `z`, reset gate `r` and candidate
/// `n = tanh(W_n [x, r * h] + b_n)`; `h' = (1 - z) * n + z * h`.
#[derive(Clone, Debug)]
pub struct GruLayer {
    pub name: String,
    pub input: usize,
    pub hidden: usize,
}

impl GruLayer {
    pub fn new(name: impl Into<String>, input: usize, hidden: usize) -> Self {
        Self {
            name: name.into(),
            input,
            hidden,
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        for g in ["z", "r", "n"] {
            init_gate(params, &self.name, g, self.input, self.hidden, rng)?;
        }
        Ok(())
    }

    pub fn step(&self, tape: &mut Tape, p: &Bound, x_t: Var, h_prev: Var) -> Result<Var> {
        let xh = tape.concat_last(&[x_t, h_prev])?;
        let z = gate(tape, p, &self.name, "z", xh)?;
        let z = tape.sigmoid(z);
        let r = gate(tape, p, &self.name, "r", xh)?;
        let r = tape.sigmoid(r);
        let rh = tape.mul(r, h_prev)?;
        let xrh = tape.concat_last(&[x_t, rh])?;
        let n = gate(tape, p, &self.name, "n", xrh)?;
        let n = tape.tanh(n);
        let one_minus_z = tape.affine(z, -1.0, 1.0)?;
        let a = tape.mul(one_minus_z, n)?;
        let b = tape.mul(z, h_prev)?;
        tape.add(a, b)
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let (batch, steps) = sequence_dims(tape, x)?;
        let mut h = zero_state(tape, batch, self.hidden);
        let mut out = Vec::with_capacity(steps);
        for t in 0..steps {
            let x_t = tape.time_step(x, t)?;
            h = self.step(tape, p, x_t, h)?;
            out.push(h);
        }
        tape.stack_time(&out)
    }
}

/// Elman cell `h = tanh(W [x, h_prev] + b)`.
#[derive(Clone, Debug)]
pub struct RnnLayer {
    pub name: String,
    pub input: usize,
    pub hidden: usize,
}

impl RnnLayer {
    pub fn new(name: impl Into<String>, input: usize, hidden: usize) -> Self {
        Self {
            name: name.into(),
            input,
            hidden,
        }
    }

    pub fn init(&self, params: &mut ParameterSet, rng: &mut impl Rng) -> Result<()> {
        init_gate(params, &self.name, "h", self.input, self.hidden, rng)
    }

    pub fn step(&self, tape: &mut Tape, p: &Bound, x_t: Var, h_prev: Var) -> Result<Var> {
        let xh = tape.concat_last(&[x_t, h_prev])?;
        let z = gate(tape, p, &self.name, "h", xh)?;
        Ok(tape.tanh(z))
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let (batch, steps) = sequence_dims(tape, x)?;
        let mut h = zero_state(tape, batch, self.hidden);
        let mut out = Vec::with_capacity(steps);
        for t in 0..steps {
            let x_t = tape.time_step(x, t)?;
            h = self.step(tape, p, x_t, h)?;
            out.push(h);
        }
        tape.stack_time(&out)
    }
}
