//! Reverse-mode gradient tape.
//!
//! Every operation appends one node holding its output value and whatever
//! the adjoint needs. [`Tape::backward`] walks the nodes in exact reverse
//! order of application and accumulates gradients into the named parameter
//! leaves. Nodes whose inputs are all constants are marked as not requiring
//! gradients and are skipped during the backward sweep.

use std::collections::BTreeMap;

use super::kernels::{self, check_finite, gemm, sigmoid_scalar};
use super::NumArray;
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul { a: Var, b: Var, trans_b: bool },
    BatchMatMul { a: Var, b: Var, trans_b: bool },
    Add(Var, Var),
    AddBias(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    SoftmaxLast(Var),
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        normalized: Vec<f64>,
        inv_std: Vec<f64>,
    },
    ConcatLast(Vec<Var>),
    SliceLast { a: Var, start: usize },
    TimeStep { a: Var, t: usize },
    StackTime(Vec<Var>),
    SliceTime { a: Var, start: usize },
    Reshape(Var),
    MaxOverTime { a: Var, argmax: Vec<usize> },
    Sum(Var),
    BceWithLogits { z: Var, targets: Vec<f64> },
}

#[derive(Debug)]
struct Node {
    value: NumArray,
    op: Op,
    needs_grad: bool,
}

/// Gradients keyed by parameter name.
pub type Gradients = BTreeMap<String, NumArray>;

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<(String, Var)>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &NumArray {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn push(&mut self, value: NumArray, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Registers a trainable leaf. Gradients are reported under `name`.
    pub fn param(&mut self, name: &str, value: NumArray) -> Var {
        let v = self.push(value, Op::Leaf, true);
        self.params.push((name.to_string(), v));
        v
    }

    pub fn constant(&mut self, value: NumArray) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.matmul_op(a, b, false)
    }

    /// `a * b^T`, `b` stored as `[n, k]`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        self.matmul_op(a, b, true)
    }

    fn matmul_op(&mut self, a: Var, b: Var, trans_b: bool) -> Result<Var> {
        let out = kernels::matmul_impl(self.value(a), self.value(b), trans_b)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::MatMul { a, b, trans_b }, ng))
    }

    pub fn batch_matmul(&mut self, a: Var, b: Var, trans_b: bool) -> Result<Var> {
        let out = kernels::batch_matmul(self.value(a), self.value(b), trans_b)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::BatchMatMul { a, b, trans_b }, ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = kernels::add(self.value(a), self.value(b))?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Add(a, b), ng))
    }

    /// Adds a length-`n` vector to every row of `x[.., n]`.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let xv = self.value(x);
        let bv = self.value(bias);
        let n = xv.last_dim();
        if bv.shape() != [n] {
            return Err(Error::shape("add_bias", xv.shape(), bv.shape()));
        }
        let mut out = xv.data().to_vec();
        for row in out.chunks_mut(n) {
            for (o, b) in row.iter_mut().zip(bv.data()) {
                *o += b;
            }
        }
        check_finite("add_bias", &out)?;
        let shape = xv.shape().to_vec();
        let ng = self.needs(x) || self.needs(bias);
        Ok(self.push(NumArray::from_parts(shape, out), Op::AddBias(x, bias), ng))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = kernels::mul(self.value(a), self.value(b))?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Mul(a, b), ng))
    }

    /// `scale * a + shift`, elementwise.
    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Result<Var> {
        let av = self.value(a);
        let out: Vec<f64> = av.data().iter().map(|v| scale * v + shift).collect();
        check_finite("affine", &out)?;
        let shape = av.shape().to_vec();
        let ng = self.needs(a);
        Ok(self.push(NumArray::from_parts(shape, out), Op::Scale(a, scale), ng))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = kernels::sigmoid(self.value(a));
        let ng = self.needs(a);
        self.push(out, Op::Sigmoid(a), ng)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = kernels::tanh(self.value(a));
        let ng = self.needs(a);
        self.push(out, Op::Tanh(a), ng)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = kernels::relu(self.value(a));
        let ng = self.needs(a);
        self.push(out, Op::Relu(a), ng)
    }

    pub fn softmax_last(&mut self, a: Var) -> Result<Var> {
        let out = kernels::softmax_rows(self.value(a))?;
        let ng = self.needs(a);
        Ok(self.push(out, Op::SoftmaxLast(a), ng))
    }

    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var, eps: f64) -> Result<Var> {
        let (out, normalized, inv_std) =
            kernels::layer_norm_saved(self.value(x), self.value(gamma), self.value(beta), eps)?;
        let ng = self.needs(x) || self.needs(gamma) || self.needs(beta);
        Ok(self.push(
            out,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                normalized,
                inv_std,
            },
            ng,
        ))
    }

    pub fn concat_last(&mut self, parts: &[Var]) -> Result<Var> {
        let values: Vec<&NumArray> = parts.iter().map(|&p| self.value(p)).collect();
        let out = kernels::concat_last(&values)?;
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(out, Op::ConcatLast(parts.to_vec()), ng))
    }

    /// Columns `start..start + len` of the last axis.
    pub fn slice_last(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let av = self.value(a);
        let w = av.last_dim();
        if start + len > w {
            return Err(Error::shape("slice_last", av.shape(), &[start, len]));
        }
        let mut out = Vec::with_capacity(av.outer_len() * len);
        for row in av.data().chunks(w) {
            out.extend_from_slice(&row[start..start + len]);
        }
        let mut shape = av.shape().to_vec();
        *shape.last_mut().unwrap() = len;
        let ng = self.needs(a);
        Ok(self.push(NumArray::from_parts(shape, out), Op::SliceLast { a, start }, ng))
    }

    /// Row `t` of every sequence: `[B, T, F] -> [B, F]`.
    pub fn time_step(&mut self, a: Var, t: usize) -> Result<Var> {
        let av = self.value(a);
        if av.rank() != 3 || t >= av.shape()[1] {
            return Err(Error::shape("time_step", av.shape(), &[t]));
        }
        let (b, steps, f) = (av.shape()[0], av.shape()[1], av.shape()[2]);
        let mut out = Vec::with_capacity(b * f);
        for i in 0..b {
            let off = (i * steps + t) * f;
            out.extend_from_slice(&av.data()[off..off + f]);
        }
        let ng = self.needs(a);
        Ok(self.push(NumArray::from_parts(vec![b, f], out), Op::TimeStep { a, t }, ng))
    }

    /// Stacks `T` arrays of shape `[B, F]` into `[B, T, F]`.
    pub fn stack_time(&mut self, steps: &[Var]) -> Result<Var> {
        let first = steps
            .first()
            .ok_or_else(|| Error::Contract("stack of zero time steps".into()))?;
        let shape = self.value(*first).shape().to_vec();
        if shape.len() != 2 {
            return Err(Error::shape("stack_time", &shape, &[]));
        }
        let (b, f) = (shape[0], shape[1]);
        let t_len = steps.len();
        let mut out = vec![0.0; b * t_len * f];
        for (t, &s) in steps.iter().enumerate() {
            let sv = self.value(s);
            if sv.shape() != shape.as_slice() {
                return Err(Error::shape("stack_time", &shape, sv.shape()));
            }
            for i in 0..b {
                let dst = (i * t_len + t) * f;
                out[dst..dst + f].copy_from_slice(&sv.data()[i * f..(i + 1) * f]);
            }
        }
        let ng = steps.iter().any(|&s| self.needs(s));
        Ok(self.push(
            NumArray::from_parts(vec![b, t_len, f], out),
            Op::StackTime(steps.to_vec()),
            ng,
        ))
    }

    /// Time steps `start..start + len`: `[B, T, F] -> [B, len, F]`.
    pub fn slice_time(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let av = self.value(a);
        if av.rank() != 3 || start + len > av.shape()[1] {
            return Err(Error::shape("slice_time", av.shape(), &[start, len]));
        }
        let (b, steps, f) = (av.shape()[0], av.shape()[1], av.shape()[2]);
        let mut out = Vec::with_capacity(b * len * f);
        for i in 0..b {
            let off = (i * steps + start) * f;
            out.extend_from_slice(&av.data()[off..off + len * f]);
        }
        let ng = self.needs(a);
        Ok(self.push(
            NumArray::from_parts(vec![b, len, f], out),
            Op::SliceTime { a, start },
            ng,
        ))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(a).reshape(shape)?;
        let ng = self.needs(a);
        Ok(self.push(out, Op::Reshape(a), ng))
    }

    /// Maximum over the time axis: `[B, T, C] -> [B, C]`. Ties go to the
    /// earliest step.
    pub fn max_over_time(&mut self, a: Var) -> Result<Var> {
        let av = self.value(a);
        if av.rank() != 3 || av.shape()[1] == 0 {
            return Err(Error::shape("max_over_time", av.shape(), &[]));
        }
        let (b, steps, c) = (av.shape()[0], av.shape()[1], av.shape()[2]);
        let mut out = vec![f64::NEG_INFINITY; b * c];
        let mut argmax = vec![0; b * c];
        for i in 0..b {
            for t in 0..steps {
                for j in 0..c {
                    let v = av.data()[(i * steps + t) * c + j];
                    if v > out[i * c + j] {
                        out[i * c + j] = v;
                        argmax[i * c + j] = t;
                    }
                }
            }
        }
        let ng = self.needs(a);
        Ok(self.push(
            NumArray::from_parts(vec![b, c], out),
            Op::MaxOverTime { a, argmax },
            ng,
        ))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.value(a).sum();
        let ng = self.needs(a);
        self.push(NumArray::scalar(total), Op::Sum(a), ng)
    }

    /// Mean binary cross-entropy of `sigmoid(z)` against `targets`, computed
    /// from logits for stability. `z` must hold one value per target.
    pub fn bce_with_logits(&mut self, z: Var, targets: &[f64]) -> Result<Var> {
        let zv = self.value(z);
        if zv.len() != targets.len() || targets.is_empty() {
            return Err(Error::shape("bce_with_logits", zv.shape(), &[targets.len()]));
        }
        let n = targets.len() as f64;
        let loss = zv
            .data()
            .iter()
            .zip(targets)
            .map(|(&z, &y)| z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z)
            .sum::<f64>()
            / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite("bce_with_logits"));
        }
        let ng = self.needs(z);
        Ok(self.push(
            NumArray::scalar(loss),
            Op::BceWithLogits {
                z,
                targets: targets.to_vec(),
            },
            ng,
        ))
    }

    /// Reverse sweep from a scalar `loss`. Every registered parameter gets an
    /// entry; parameters the loss does not reach get zeros.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                lv.shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[idx] = Some(g);
        }

        let mut out = Gradients::new();
        for (name, v) in &self.params {
            let value = self.value(*v);
            let g = match grads.get(v.0).and_then(Option::as_ref) {
                Some(g) => NumArray::from_parts(value.shape().to_vec(), g.clone()),
                None => NumArray::zeros(value.shape()),
            };
            match out.get_mut(name) {
                // A name bound twice accumulates, matching shared weights.
                Some(existing) => {
                    for (e, x) in existing.data_mut().iter_mut().zip(g.data()) {
                        *e += x;
                    }
                }
                None => {
                    out.insert(name.clone(), g);
                }
            }
        }
        Ok(out)
    }

    fn slot<'g>(&self, grads: &'g mut [Option<Vec<f64>>], v: Var) -> Option<&'g mut Vec<f64>> {
        if !self.needs(v) {
            return None;
        }
        let n = self.value(v).len();
        Some(grads[v.0].get_or_insert_with(|| vec![0.0; n]))
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let out = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul { a, b, trans_b } => {
                let av = self.value(*a);
                let bv = self.value(*b);
                let k = av.last_dim();
                let m = av.outer_len();
                let n = out.last_dim();
                if let Some(da) = self.slot(grads, *a) {
                    // da = g * b^T
                    let bs = if *trans_b { (k, 1) } else { (1, n) };
                    gemm(m, n, k, g, (n, 1), bv.data(), bs, 1.0, da);
                }
                if let Some(db) = self.slot(grads, *b) {
                    if *trans_b {
                        // db[n x k] = g^T * a
                        gemm(n, m, k, g, (1, n), av.data(), (k, 1), 1.0, db);
                    } else {
                        // db[k x n] = a^T * g
                        gemm(k, m, n, av.data(), (1, k), g, (n, 1), 1.0, db);
                    }
                }
            }
            Op::BatchMatMul { a, b, trans_b } => {
                let av = self.value(*a);
                let bv = self.value(*b);
                let (batch, m, k) = (av.shape()[0], av.shape()[1], av.shape()[2]);
                let n = out.shape()[2];
                if let Some(da) = self.slot(grads, *a) {
                    let bs = if *trans_b { (k, 1) } else { (1, n) };
                    for i in 0..batch {
                        gemm(
                            m,
                            n,
                            k,
                            &g[i * m * n..(i + 1) * m * n],
                            (n, 1),
                            &bv.data()[i * k * n..(i + 1) * k * n],
                            bs,
                            1.0,
                            &mut da[i * m * k..(i + 1) * m * k],
                        );
                    }
                }
                if let Some(db) = self.slot(grads, *b) {
                    for i in 0..batch {
                        let gi = &g[i * m * n..(i + 1) * m * n];
                        let ai = &av.data()[i * m * k..(i + 1) * m * k];
                        let dbi = &mut db[i * k * n..(i + 1) * k * n];
                        if *trans_b {
                            gemm(n, m, k, gi, (1, n), ai, (k, 1), 1.0, dbi);
                        } else {
                            gemm(k, m, n, ai, (1, k), gi, (n, 1), 1.0, dbi);
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    if let Some(d) = self.slot(grads, *v) {
                        axpy(d, g, 1.0);
                    }
                }
            }
            Op::AddBias(x, bias) => {
                if let Some(dx) = self.slot(grads, *x) {
                    axpy(dx, g, 1.0);
                }
                if let Some(db) = self.slot(grads, *bias) {
                    let n = db.len();
                    for row in g.chunks(n) {
                        for (d, v) in db.iter_mut().zip(row) {
                            *d += v;
                        }
                    }
                }
            }
            Op::Mul(a, b) => {
                let av = self.value(*a).data();
                let bv = self.value(*b).data();
                if let Some(da) = self.slot(grads, *a) {
                    for ((d, gi), bi) in da.iter_mut().zip(g).zip(bv) {
                        *d += gi * bi;
                    }
                }
                if let Some(db) = self.slot(grads, *b) {
                    for ((d, gi), ai) in db.iter_mut().zip(g).zip(av) {
                        *d += gi * ai;
                    }
                }
            }
            Op::Scale(a, s) => {
                if let Some(da) = self.slot(grads, *a) {
                    axpy(da, g, *s);
                }
            }
            Op::Sigmoid(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    for ((d, gi), y) in da.iter_mut().zip(g).zip(out.data()) {
                        *d += gi * y * (1.0 - y);
                    }
                }
            }
            Op::Tanh(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    for ((d, gi), y) in da.iter_mut().zip(g).zip(out.data()) {
                        *d += gi * (1.0 - y * y);
                    }
                }
            }
            Op::Relu(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    for ((d, gi), y) in da.iter_mut().zip(g).zip(out.data()) {
                        if *y > 0.0 {
                            *d += gi;
                        }
                    }
                }
            }
            Op::SoftmaxLast(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    let n = out.last_dim();
                    for ((drow, grow), yrow) in da.chunks_mut(n).zip(g.chunks(n)).zip(out.data().chunks(n)) {
                        let dot: f64 = grow.iter().zip(yrow).map(|(a, b)| a * b).sum();
                        for ((d, gi), y) in drow.iter_mut().zip(grow).zip(yrow) {
                            *d += y * (gi - dot);
                        }
                    }
                }
            }
            Op::LayerNorm {
                x,
                gamma,
                beta,
                normalized,
                inv_std,
            } => {
                let f = out.last_dim();
                let gam = self.value(*gamma).data().to_vec();
                if let Some(dg) = self.slot(grads, *gamma) {
                    for (grow, xrow) in g.chunks(f).zip(normalized.chunks(f)) {
                        for j in 0..f {
                            dg[j] += grow[j] * xrow[j];
                        }
                    }
                }
                if let Some(db) = self.slot(grads, *beta) {
                    for grow in g.chunks(f) {
                        for j in 0..f {
                            db[j] += grow[j];
                        }
                    }
                }
                if let Some(dx) = self.slot(grads, *x) {
                    let nf = f as f64;
                    let mut dxh = vec![0.0; f];
                    for (r, ((drow, grow), xrow)) in dx
                        .chunks_mut(f)
                        .zip(g.chunks(f))
                        .zip(normalized.chunks(f))
                        .enumerate()
                    {
                        let mut s1 = 0.0;
                        let mut s2 = 0.0;
                        for j in 0..f {
                            dxh[j] = grow[j] * gam[j];
                            s1 += dxh[j];
                            s2 += dxh[j] * xrow[j];
                        }
                        let scale = inv_std[r] / nf;
                        for j in 0..f {
                            drow[j] += scale * (nf * dxh[j] - s1 - xrow[j] * s2);
                        }
                    }
                }
            }
            Op::ConcatLast(parts) => {
                let width = out.last_dim();
                let rows = out.outer_len();
                let mut offset = 0;
                for p in parts {
                    let w = self.value(*p).last_dim();
                    if let Some(dp) = self.slot(grads, *p) {
                        for r in 0..rows {
                            let src = &g[r * width + offset..r * width + offset + w];
                            for (d, s) in dp[r * w..(r + 1) * w].iter_mut().zip(src) {
                                *d += s;
                            }
                        }
                    }
                    offset += w;
                }
            }
            Op::SliceLast { a, start } => {
                let w = self.value(*a).last_dim();
                let len = out.last_dim();
                if let Some(da) = self.slot(grads, *a) {
                    for (drow, grow) in da.chunks_mut(w).zip(g.chunks(len)) {
                        for (d, s) in drow[*start..*start + len].iter_mut().zip(grow) {
                            *d += s;
                        }
                    }
                }
            }
            Op::TimeStep { a, t } => {
                let shape = self.value(*a).shape().to_vec();
                let (b, steps, f) = (shape[0], shape[1], shape[2]);
                if let Some(da) = self.slot(grads, *a) {
                    for i in 0..b {
                        let off = (i * steps + t) * f;
                        axpy(&mut da[off..off + f], &g[i * f..(i + 1) * f], 1.0);
                    }
                }
            }
            Op::StackTime(steps) => {
                let (b, t_len, f) = (out.shape()[0], out.shape()[1], out.shape()[2]);
                for (t, s) in steps.iter().enumerate() {
                    if let Some(ds) = self.slot(grads, *s) {
                        for i in 0..b {
                            let src = (i * t_len + t) * f;
                            axpy(&mut ds[i * f..(i + 1) * f], &g[src..src + f], 1.0);
                        }
                    }
                }
            }
            Op::SliceTime { a, start } => {
                let steps = self.value(*a).shape()[1];
                let (b, len, f) = (out.shape()[0], out.shape()[1], out.shape()[2]);
                if let Some(da) = self.slot(grads, *a) {
                    for i in 0..b {
                        let off = (i * steps + start) * f;
                        axpy(
                            &mut da[off..off + len * f],
                            &g[i * len * f..(i + 1) * len * f],
                            1.0,
                        );
                    }
                }
            }
            Op::Reshape(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    axpy(da, g, 1.0);
                }
            }
            Op::MaxOverTime { a, argmax } => {
                let shape = self.value(*a).shape().to_vec();
                let (steps, c) = (shape[1], shape[2]);
                if let Some(da) = self.slot(grads, *a) {
                    for (idx, (&t, gi)) in argmax.iter().zip(g).enumerate() {
                        let (i, j) = (idx / c, idx % c);
                        da[(i * steps + t) * c + j] += gi;
                    }
                }
            }
            Op::Sum(a) => {
                if let Some(da) = self.slot(grads, *a) {
                    for d in da.iter_mut() {
                        *d += g[0];
                    }
                }
            }
            Op::BceWithLogits { z, targets } => {
                let n = targets.len() as f64;
                let zv = self.value(*z).data().to_vec();
                if let Some(dz) = self.slot(grads, *z) {
                    for ((d, zi), y) in dz.iter_mut().zip(&zv).zip(targets) {
                        *d += g[0] * (sigmoid_scalar(*zi) - y) / n;
                    }
                }
            }
        }
    }
}

fn axpy(dst: &mut [f64], src: &[f64], alpha: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}
