use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;

fn random(shape: &[usize], seed: u64) -> NumArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    NumArray::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn matmul_identity_and_selector() {
    let eye = NumArray::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let m = NumArray::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(matmul(&eye, &m).unwrap(), m);

    let sel = NumArray::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let col = NumArray::from_rows(&[vec![2.0], vec![3.0]]).unwrap();
    assert_eq!(matmul(&sel, &col).unwrap().data(), &[2.0]);
}

#[test]
fn matmul_shape_error_names_both_shapes() {
    let a = NumArray::zeros(&[2, 3]);
    let b = NumArray::zeros(&[2, 3]);
    let err = matmul(&a, &b).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("[2, 3]"), "{msg}");
    assert!(matches!(err, Error::Shape { .. }));
}

#[test]
fn matmul_gradient_matches_finite_differences() {
    let mut params = ParameterSet::new();
    params.insert("a", random(&[3, 4], 1)).unwrap();
    params.insert("b", random(&[4, 2], 2)).unwrap();
    let report = grad_check(
        |tape, p| {
            let y = tape.matmul(p.get("a")?, p.get("b")?)?;
            Ok(tape.sum(y))
        },
        &params,
        &GradCheckConfig::default(),
    )
    .unwrap();
    assert!(report.worst() <= 1e-6, "{report:?}");
}

#[test]
fn softmax_examples() {
    let x = NumArray::from_rows(&[vec![0.0, 0.0, 0.0], vec![1000.0, 0.0, -1000.0]]).unwrap();
    let y = softmax_rows(&x).unwrap();
    for v in &y.data()[..3] {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!((y.data()[3] - 1.0).abs() < 1e-15);
    assert!(y.data()[4] < 1e-300 && y.data()[4] >= 0.0);

    // 40-digit evaluation of exp(i) / sum exp(j).
    let oracle = [
        0.090_030_573_170_380_457_998_022_1,
        0.244_728_471_054_797_652_472_959_6,
        0.665_240_955_774_821_889_529_018_3,
    ];
    let y = softmax_rows(&NumArray::vector(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
    for (v, o) in y.data().iter().zip(oracle) {
        assert!((v - o).abs() <= 1e-12, "{v} vs {o}");
    }
}

#[test]
fn layer_norm_examples() {
    let x = NumArray::full(&[1, 4], 5.0);
    let one = NumArray::full(&[4], 1.0);
    let zero = NumArray::zeros(&[4]);
    let two = NumArray::full(&[4], 2.0);
    assert!(layer_norm(&x, &one, &zero, 1e-6).unwrap().data().iter().all(|&v| v == 0.0));
    assert!(layer_norm(&x, &one, &two, 1e-6).unwrap().data().iter().all(|&v| v == 2.0));

    let x = NumArray::vector(vec![1.0, 2.0, 3.0]).unwrap();
    let one = NumArray::full(&[3], 1.0);
    let zero = NumArray::zeros(&[3]);
    let eps = 1e-6;
    let y = layer_norm(&x, &one, &zero, eps).unwrap();
    let mean = y.sum() / 3.0;
    let var = y.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
    let sigma2 = 2.0 / 3.0;
    assert!(mean.abs() <= 1e-9);
    assert!((var - sigma2 / (sigma2 + eps)).abs() <= 1e-12);
}

#[test]
fn elementwise_examples() {
    assert_eq!(sigmoid(&NumArray::scalar(0.0)).data(), &[0.5]);
    assert_eq!(tanh(&NumArray::scalar(0.0)).data(), &[0.0]);
    let r = relu(&NumArray::vector(vec![-1.0, 0.0, 2.0]).unwrap());
    assert_eq!(r.data(), &[0.0, 0.0, 2.0]);
    let c = concat_last(&[&NumArray::zeros(&[2, 3]), &NumArray::zeros(&[2, 5])]).unwrap();
    assert_eq!(c.shape(), &[2, 8]);
    assert!(concat_last(&[&NumArray::zeros(&[2, 3]), &NumArray::zeros(&[3, 5])]).is_err());
}

#[test]
fn non_finite_values_are_rejected() {
    assert!(matches!(
        NumArray::new(&[2], vec![1.0, f64::NAN]),
        Err(Error::NonFinite(_))
    ));
    let big = NumArray::full(&[1, 2], 1e200);
    assert!(matches!(matmul(&big, &NumArray::full(&[2, 1], 1e200)), Err(Error::NonFinite(_))));
}

#[test]
fn backward_trivial_cases() {
    let mut tape = Tape::new();
    let p = tape.param("p", random(&[2, 3], 3));
    let q = tape.param("unused", random(&[4], 4));
    let _ = q;
    let s = tape.sum(p);
    let g = tape.backward(s).unwrap();
    assert!(g["p"].data().iter().all(|&v| v == 1.0));
    assert!(g["unused"].data().iter().all(|&v| v == 0.0));

    let mut tape = Tape::new();
    let p = tape.param("p", random(&[5], 5));
    let z = tape.affine(p, 0.0, 0.0).unwrap();
    let s = tape.sum(z);
    let g = tape.backward(s).unwrap();
    assert!(g["p"].data().iter().all(|&v| v == 0.0));
}

#[test]
fn backward_rejects_non_scalar_loss() {
    let mut tape = Tape::new();
    let p = tape.param("p", random(&[2], 6));
    assert!(matches!(tape.backward(p), Err(Error::Contract(_))));
}

#[test]
fn grad_check_linear_model_is_exact() {
    let mut params = ParameterSet::new();
    params.insert("w", NumArray::vector(vec![0.7]).unwrap()).unwrap();
    let x = NumArray::vector(vec![1.3]).unwrap();
    let report = grad_check(
        |tape, p| {
            let xv = tape.constant(x.clone());
            let y = tape.mul(p.get("w")?, xv)?;
            Ok(tape.sum(y))
        },
        &params,
        &GradCheckConfig::default(),
    )
    .unwrap();
    assert!(report.worst() <= 1e-9, "{report:?}");
}

/// Every tape operation, each inside a small composite with a random
/// weighting so that no gradient is trivially uniform.
#[test]
fn every_op_passes_grad_check() {
    let mut params = ParameterSet::new();
    params.insert("x3", random(&[2, 3, 4], 10)).unwrap();
    params.insert("w", random(&[4, 3], 11)).unwrap();
    params.insert("wt", random(&[3, 4], 12)).unwrap();
    params.insert("bias", random(&[3], 13)).unwrap();
    params.insert("gamma", random(&[4], 14)).unwrap();
    params.insert("beta", random(&[4], 15)).unwrap();
    params.insert("y3", random(&[2, 3, 4], 16)).unwrap();
    params.insert("z", random(&[2, 1], 17)).unwrap();
    let weights = random(&[2, 3, 3], 18);
    let weights_bmm = random(&[2, 3, 3], 19);
    let weights_time = random(&[2, 3], 20);

    let build = |tape: &mut Tape, p: &Bound| -> crate::error::Result<Var> {
        let x = p.get("x3")?;
        let h = tape.matmul(x, p.get("w")?)?;
        let h2 = tape.matmul_nt(x, p.get("wt")?)?;
        let h = tape.add(h, h2)?;
        let h = tape.add_bias(h, p.get("bias")?)?;
        let s = tape.sigmoid(h);
        let t = tape.tanh(h);
        let r = tape.relu(h);
        let m = tape.mul(s, t)?;
        let m = tape.add(m, r)?;
        let m = tape.affine(m, 1.7, -0.3)?;
        let sm = tape.softmax_last(m)?;
        let wv = tape.constant(weights.clone());
        let a = tape.mul(sm, wv)?;

        let ln = tape.layer_norm(p.get("y3")?, p.get("gamma")?, p.get("beta")?, 1e-6)?;
        let att = tape.batch_matmul(ln, x, true)?;
        let att2 = tape.batch_matmul(att, sm, false)?;
        let wb = tape.constant(weights_bmm.clone());
        let b = tape.mul(att2, wb)?;

        let c = tape.concat_last(&[a, b])?;
        let c = tape.slice_last(c, 1, 4)?;
        let steps: Vec<Var> = (0..3).rev().map(|t| tape.time_step(c, t)).collect::<Result<_, _>>()?;
        let st = tape.stack_time(&steps)?;
        let st = tape.slice_time(st, 1, 2)?;
        let mx = tape.max_over_time(st)?;
        let flat = tape.reshape(mx, &[8])?;
        let total = tape.sum(flat);

        let pooled = tape.max_over_time(ln)?;
        let pooled = tape.slice_last(pooled, 0, 3)?;
        let wt = tape.constant(weights_time.clone());
        let pooled = tape.mul(pooled, wt)?;
        let ones = tape.constant(NumArray::full(&[3, 1], 1.0));
        let logits = tape.matmul(pooled, ones)?;
        let logits = tape.add(logits, p.get("z")?)?;
        let bce = tape.bce_with_logits(logits, &[1.0, 0.0])?;

        let out = tape.add(total, bce)?;
        Ok(out)
    };
    let report = grad_check(build, &params, &GradCheckConfig::default()).unwrap();
    assert!(report.worst() <= 1e-5, "{report:#?}");
}

#[test]
fn kernels_are_deterministic() {
    let a = random(&[7, 9], 30);
    let b = random(&[9, 5], 31);
    let r1 = matmul(&a, &b).unwrap();
    let r2 = matmul(&a, &b).unwrap();
    assert!(r1.data().iter().zip(r2.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 1..12), 1..6)) {
        let width = rows[0].len();
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r.resize(width, 0.0); r }).collect();
        let y = softmax_rows(&NumArray::from_rows(&rows).unwrap()).unwrap();
        for row in y.data().chunks(width) {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn layer_norm_output_is_centred(
        rows in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 5), 1..8),
        gamma in -3.0f64..3.0,
    ) {
        // Centring needs a feature-uniform gain; per-feature gains reweight the mean.
        let x = NumArray::from_rows(&rows).unwrap();
        let y = layer_norm(&x, &NumArray::full(&[5], gamma), &NumArray::zeros(&[5]), 1e-6).unwrap();
        for row in y.data().chunks(5) {
            prop_assert!((row.iter().sum::<f64>() / 5.0).abs() <= 1e-9);
        }
    }
}
