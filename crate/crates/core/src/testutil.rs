//! Shared helpers for unit tests: seeded random arrays and scalar-loop
//! reference implementations of every layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::layers::{Dense, FeedForward, MultiHeadAttention, LAYER_NORM_EPS};
use crate::tensor::{Bound, NumArray, ParameterSet, Tape, Var};

pub fn random(shape: &[usize], seed: u64) -> NumArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    NumArray::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs `f` on a fresh tape with `x` as a constant input and returns the value.
pub fn run(params: &ParameterSet, x: &NumArray, f: impl Fn(&mut Tape, &Bound, Var) -> crate::Result<Var>) -> NumArray {
    let mut tape = Tape::new();
    let p = params.bind(&mut tape);
    let xv = tape.constant(x.clone());
    let y = f(&mut tape, &p, xv).unwrap();
    tape.value(y).clone()
}

/// Row-major 2-D view.
pub fn rows(a: &NumArray) -> Vec<Vec<f64>> {
    let c = a.last_dim();
    a.data().chunks(c).map(<[f64]>::to_vec).collect()
}

pub fn vecmat(x: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    let cols = w[0].len();
    (0..cols).map(|j| x.iter().zip(w).map(|(a, row)| a * row[j]).sum()).collect()
}

pub fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `W [x, h] + b` with `W: [H, F+H]`, written as explicit loops.
pub fn gate_loop(w: &NumArray, b: &NumArray, x: &[f64], h: &[f64]) -> Vec<f64> {
    let xh: Vec<f64> = x.iter().chain(h).copied().collect();
    rows(w)
        .iter()
        .zip(b.data())
        .map(|(row, bias)| row.iter().zip(&xh).map(|(a, b)| a * b).sum::<f64>() + bias)
        .collect()
}

pub fn lstm_step_loop(p: &ParameterSet, name: &str, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let g = |k: &str| {
        gate_loop(
            p.get(&format!("{name}.w_{k}")).unwrap(),
            p.get(&format!("{name}.b_{k}")).unwrap(),
            x,
            h,
        )
    };
    let (f, i, cand, o) = (g("f"), g("i"), g("c"), g("o"));
    let mut c_new = vec![0.0; h.len()];
    let mut h_new = vec![0.0; h.len()];
    for j in 0..h.len() {
        c_new[j] = sig(f[j]) * c[j] + sig(i[j]) * cand[j].tanh();
        h_new[j] = sig(o[j]) * c_new[j].tanh();
    }
    (h_new, c_new)
}

pub fn layer_norm_loop(x: &[f64], gamma: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
    x.iter()
        .enumerate()
        .map(|(i, v)| gamma[i] * (v - mu) / (var + LAYER_NORM_EPS).sqrt() + beta[i])
        .collect()
}

pub fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}


/// Explicit per-head loops for one sample `x: [T, F]`.
pub fn attention_loop(p: &ParameterSet, mha: &MultiHeadAttention, xr: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = xr.len();
    let dk = mha.key_width;
    let mut concat = vec![Vec::new(); t];
    for i in 0..mha.heads {
        let proj = |name: String| -> Vec<Vec<f64>> {
            let w = rows(p.get(&name).unwrap());
            xr.iter().map(|r| vecmat(r, &w)).collect()
        };
        let (q, k, v) = (proj(mha.w_q(i)), proj(mha.w_k(i)), proj(mha.w_v(i)));
        for r in 0..t {
            let logits: Vec<f64> = (0..t)
                .map(|s| (0..dk).map(|d| q[r][d] * k[s][d]).sum::<f64>() / (dk as f64).sqrt())
                .collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = e.iter().sum();
            for d in 0..dk {
                concat[r].push((0..t).map(|s| e[s] / z * v[s][d]).sum::<f64>());
            }
        }
    }
    let wo = rows(p.get(&mha.w_o()).unwrap());
    concat.iter().map(|r| vecmat(r, &wo)).collect()
}

/// Two explicit loops per row.
pub fn dense_loop(p: &ParameterSet, d: &Dense, x: &[f64]) -> Vec<f64> {
    let w = rows(p.get(&d.weight()).unwrap());
    let b = p.get(&d.bias()).unwrap().data();
    (0..d.output)
        .map(|j| b[j] + (0..d.input).map(|i| x[i] * w[i][j]).sum::<f64>())
        .collect()
}

pub fn ffn_loop(p: &ParameterSet, ffn: &FeedForward, x: &[f64]) -> Vec<f64> {
    let hidden: Vec<f64> = dense_loop(p, &ffn.expand, x).into_iter().map(|v| v.max(0.0)).collect();
    dense_loop(p, &ffn.project, &hidden)
}

pub fn bilstm_loop(p: &ParameterSet, fwd: &str, bwd: &str, x: &[Vec<f64>], hidden: usize) -> Vec<Vec<f64>> {
    let t = x.len();
    let mut hf = vec![Vec::new(); t];
    let mut hb = vec![Vec::new(); t];
    let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
    for s in 0..t {
        (h, c) = lstm_step_loop(p, fwd, &x[s], &h, &c);
        hf[s] = h.clone();
    }
    let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
    for s in (0..t).rev() {
        (h, c) = lstm_step_loop(p, bwd, &x[s], &h, &c);
        hb[s] = h.clone();
    }
    (0..t).map(|s| hf[s].iter().chain(&hb[s]).copied().collect()).collect()
}
