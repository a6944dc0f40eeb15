//! Value-level kernels. The tape in [`super::tape`] records these and supplies
//! their adjoints; they are also usable directly for inference-only code.

use super::NumArray;
use crate::error::{Error, Result};

/// `c = beta * c + a * b` for an `m x k` by `k x n` product, operands given by
/// element strides so transposes cost nothing.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n);
    if k > 0 {
        assert!(a.len() > (m - 1) * rsa + (k - 1) * csa);
        assert!(b.len() > (k - 1) * rsb + (n - 1) * csb);
    }
    // SAFETY: the bounds above cover every element dgemm touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub(crate) fn check_finite(op: &'static str, data: &[f64]) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

/// Matrix product. `a` may carry leading batch axes, which are flattened
/// into rows: `[.., k] x [k, n] -> [.., n]`.
pub fn matmul(a: &NumArray, b: &NumArray) -> Result<NumArray> {
    matmul_impl(a, b, false)
}

/// `a * b^T` with `b` stored as `[n, k]`.
pub fn matmul_nt(a: &NumArray, b: &NumArray) -> Result<NumArray> {
    matmul_impl(a, b, true)
}

pub(crate) fn matmul_impl(a: &NumArray, b: &NumArray, trans_b: bool) -> Result<NumArray> {
    if a.rank() == 0 || b.rank() != 2 {
        return Err(Error::shape("matmul", a.shape(), b.shape()));
    }
    let k = a.last_dim();
    let (bk, n) = if trans_b {
        (b.shape()[1], b.shape()[0])
    } else {
        (b.shape()[0], b.shape()[1])
    };
    if k != bk {
        return Err(Error::shape("matmul", a.shape(), b.shape()));
    }
    let m = a.outer_len();
    let mut out = vec![0.0; m * n];
    let bstride = if trans_b { (1, k) } else { (n, 1) };
    gemm(m, k, n, a.data(), (k, 1), b.data(), bstride, 0.0, &mut out);
    check_finite("matmul", &out)?;
    let mut shape = a.shape().to_vec();
    *shape.last_mut().unwrap() = n;
    Ok(NumArray::from_parts(shape, out))
}

/// Batched product over the leading axis: `[B, m, k] x [B, k, n] -> [B, m, n]`,
/// or with `trans_b`, `[B, m, k] x [B, n, k]^T`.
pub fn batch_matmul(a: &NumArray, b: &NumArray, trans_b: bool) -> Result<NumArray> {
    if a.rank() != 3 || b.rank() != 3 || a.shape()[0] != b.shape()[0] {
        return Err(Error::shape("batch_matmul", a.shape(), b.shape()));
    }
    let (batch, m, k) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    let (bk, n) = if trans_b {
        (b.shape()[2], b.shape()[1])
    } else {
        (b.shape()[1], b.shape()[2])
    };
    if k != bk {
        return Err(Error::shape("batch_matmul", a.shape(), b.shape()));
    }
    let mut out = vec![0.0; batch * m * n];
    let bstride = if trans_b { (1, k) } else { (n, 1) };
    for i in 0..batch {
        gemm(
            m,
            k,
            n,
            &a.data()[i * m * k..(i + 1) * m * k],
            (k, 1),
            &b.data()[i * k * n..(i + 1) * k * n],
            bstride,
            0.0,
            &mut out[i * m * n..(i + 1) * m * n],
        );
    }
    check_finite("batch_matmul", &out)?;
    Ok(NumArray::from_parts(vec![batch, m, n], out))
}

/// Row-wise softmax over the last axis, stabilized by subtracting the row max.
pub fn softmax_rows(x: &NumArray) -> Result<NumArray> {
    check_finite("softmax_rows", x.data())?;
    let n = x.last_dim();
    let mut out = x.data().to_vec();
    for row in out.chunks_mut(n.max(1)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Ok(NumArray::from_parts(x.shape().to_vec(), out))
}

/// Per-position normalization over the last axis with population variance,
/// followed by the affine `gamma`, `beta`.
///
/// Returns the output together with the normalized values and the inverse
/// standard deviation per row, which the adjoint reuses.
pub(crate) fn layer_norm_saved(
    x: &NumArray,
    gamma: &NumArray,
    beta: &NumArray,
    eps: f64,
) -> Result<(NumArray, Vec<f64>, Vec<f64>)> {
    let f = x.last_dim();
    if gamma.shape() != [f] || beta.shape() != [f] {
        return Err(Error::shape("layer_norm", x.shape(), gamma.shape()));
    }
    let rows = x.outer_len();
    let mut normalized = vec![0.0; x.len()];
    let mut inv_std = vec![0.0; rows];
    let mut out = vec![0.0; x.len()];
    for r in 0..rows {
        let row = &x.data()[r * f..(r + 1) * f];
        let mean = row.iter().sum::<f64>() / f as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / f as f64;
        let inv = 1.0 / (var + eps).sqrt();
        inv_std[r] = inv;
        for j in 0..f {
            let xh = (row[j] - mean) * inv;
            normalized[r * f + j] = xh;
            out[r * f + j] = xh * gamma.data()[j] + beta.data()[j];
        }
    }
    check_finite("layer_norm", &out)?;
    Ok((
        NumArray::from_parts(x.shape().to_vec(), out),
        normalized,
        inv_std,
    ))
}

pub fn layer_norm(x: &NumArray, gamma: &NumArray, beta: &NumArray, eps: f64) -> Result<NumArray> {
    layer_norm_saved(x, gamma, beta, eps).map(|(y, _, _)| y)
}

pub fn sigmoid_scalar(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn map(x: &NumArray, f: impl Fn(f64) -> f64) -> NumArray {
    NumArray::from_parts(x.shape().to_vec(), x.data().iter().map(|&v| f(v)).collect())
}

pub fn sigmoid(x: &NumArray) -> NumArray {
    map(x, sigmoid_scalar)
}

pub fn tanh(x: &NumArray) -> NumArray {
    map(x, f64::tanh)
}

pub fn relu(x: &NumArray) -> NumArray {
    map(x, |v| v.max(0.0))
}

fn zip_same(op: &'static str, a: &NumArray, b: &NumArray, f: impl Fn(f64, f64) -> f64) -> Result<NumArray> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    let out: Vec<f64> = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    check_finite(op, &out)?;
    Ok(NumArray::from_parts(a.shape().to_vec(), out))
}

pub fn add(a: &NumArray, b: &NumArray) -> Result<NumArray> {
    zip_same("add", a, b, |x, y| x + y)
}

pub fn mul(a: &NumArray, b: &NumArray) -> Result<NumArray> {
    zip_same("mul", a, b, |x, y| x * y)
}

/// Concatenates along the last axis; all leading axes must agree.
pub fn concat_last(parts: &[&NumArray]) -> Result<NumArray> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Contract("concat of zero arrays".into()))?;
    let lead = &first.shape()[..first.rank().saturating_sub(1)];
    for p in parts {
        if p.rank() != first.rank() || &p.shape()[..p.rank() - 1] != lead {
            return Err(Error::shape("concat_last", first.shape(), p.shape()));
        }
    }
    let rows = first.outer_len();
    let width: usize = parts.iter().map(|p| p.last_dim()).sum();
    let mut out = Vec::with_capacity(rows * width);
    for r in 0..rows {
        for p in parts {
            let w = p.last_dim();
            out.extend_from_slice(&p.data()[r * w..(r + 1) * w]);
        }
    }
    let mut shape = first.shape().to_vec();
    *shape.last_mut().unwrap() = width;
    Ok(NumArray::from_parts(shape, out))
}
