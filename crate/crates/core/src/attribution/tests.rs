use super::*;
use crate::evaluation::fractional_ranks;
use crate::models::{Architecture, ModelSpec};

fn rows_of<'a>(rows: &'a [f64], d: usize) -> impl Iterator<Item = &'a [f64]> {
    rows.chunks(d)
}

/// Linear in every column.
fn linear(w: Vec<f64>) -> impl Fn(&[f64]) -> Result<Vec<f64>> {
    move |rows| Ok(rows_of(rows, w.len()).map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum()).collect())
}

/// Ten columns with interactions; column 9 is ignored.
fn toy(rows: &[f64]) -> Result<Vec<f64>> {
    Ok(rows_of(rows, 10)
        .map(|r| {
            r[0] * r[1] + (r[2] - r[3]).tanh() + 0.5 * r[4] * r[4] + r[5] * r[6] * r[7] + (r[8] * 2.0).sin()
        })
        .collect())
}

fn toy_point() -> (Vec<f64>, Vec<f64>) {
    (
        vec![1.0, 2.0, -0.5, 0.7, 1.5, 0.9, -1.2, 0.8, 0.4, 3.0],
        vec![0.1, -0.3, 0.2, 0.0, -0.4, 0.3, 0.5, -0.2, -0.6, 0.0],
    )
}

#[test]
fn linear_game_credits_each_term() {
    let w = vec![2.0, -1.0, 0.5, 3.0];
    let x = [1.0, 2.0, 3.0, 4.0];
    let b = [0.5, 0.0, -1.0, 4.0];
    let e = exact_shapley(&linear(w.clone()), &x, &b, &[0, 1, 2, 3]).unwrap();
    for i in 0..4 {
        assert!((e.values[i] - w[i] * (x[i] - b[i])).abs() < 1e-12);
    }
    // Inactive columns stay at the background.
    let e = exact_shapley(&linear(w.clone()), &x, &b, &[1, 3]).unwrap();
    assert!((e.values[0] + 2.0).abs() < 1e-12 && e.values[1].abs() < 1e-12);
    assert!((e.prediction - (1.0 + -2.0 + 0.5 * -1.0 + 12.0)).abs() < 1e-12);
}

#[test]
fn symmetric_columns_share_equally() {
    let f = |rows: &[f64]| Ok(rows_of(rows, 3).map(|r| r[0] * r[1] + r[2]).collect());
    let e = exact_shapley(&f, &[2.0, 2.0, 1.0], &[0.0, 0.0, 0.0], &[0, 1, 2]).unwrap();
    assert_eq!(e.values[0], e.values[1]);
    assert!((e.values[0] - 2.0).abs() < 1e-12);
}

#[test]
fn enumeration_is_efficient_and_ignores_dummies() {
    let (x, b) = toy_point();
    let all: Vec<usize> = (0..10).collect();
    let e = exact_shapley(&toy, &x, &b, &all).unwrap();
    assert!(e.efficiency_gap().abs() <= 1e-10);
    assert!((e.prediction - toy(&x).unwrap()[0]).abs() <= 1e-12);
    assert!((e.base - toy(&b).unwrap()[0]).abs() <= 1e-12);
    assert_eq!(e.values[9], 0.0);
}

#[test]
fn enumeration_refuses_large_or_malformed_games() {
    let x = vec![1.0; 13];
    let b = vec![0.0; 13];
    let f = linear(vec![1.0; 13]);
    let all: Vec<usize> = (0..13).collect();
    assert!(matches!(exact_shapley(&f, &x, &b, &all), Err(Error::Config(_))));
    assert!(exact_shapley(&f, &x, &b, &all[..12]).is_ok());
    assert!(matches!(exact_shapley(&f, &x, &b, &[0, 0]), Err(Error::Config(_))));
    assert!(matches!(exact_shapley(&f, &x, &b, &[13]), Err(Error::Config(_))));
    assert!(exact_shapley(&f, &x, &b[..3], &[0]).is_err());
}

#[test]
fn sampling_matches_enumeration_on_toy_model() {
    let (x, b) = toy_point();
    let all: Vec<usize> = (0..10).collect();
    let exact = exact_shapley(&toy, &x, &b, &all).unwrap();
    let s = sampled_shapley(&toy, &x, &b, 2000, 17).unwrap();
    let range = exact.values.iter().cloned().fold(f64::MIN, f64::max) - exact.values.iter().cloned().fold(f64::MAX, f64::min);
    let dev = s.values.iter().zip(&exact.values).map(|(a, e)| (a - e).abs()).sum::<f64>() / 10.0;
    assert!(dev <= 0.05 * range, "deviation {dev}, range {range}");
    assert!(s.efficiency_gap().abs() <= 1e-10);
    for (v, se) in s.values.iter().zip(&s.se) {
        assert!(se.is_finite() && *se >= 0.0, "{v} {se}");
    }
    assert_eq!(s.values[9], 0.0);
    assert_eq!(s.se[9], 0.0);
}

#[test]
fn ignored_inputs_get_nothing() {
    let f = |rows: &[f64]| Ok(vec![0.25; rows.len() / 5]);
    let x = [1.0, -2.0, 3.0, 0.5, 9.0];
    let s = sampled_shapley(&f, &x, &[0.0; 5], 50, 1).unwrap();
    for (v, se) in s.values.iter().zip(&s.se) {
        assert!(v.abs() <= 3.0 * se);
    }
    assert_eq!(s.base, 0.25);
}

#[test]
fn doubling_permutations_shrinks_error_by_root_two() {
    let (x, b) = toy_point();
    let avg = |n| {
        let s = sampled_shapley(&toy, &x, &b, n, 3).unwrap();
        s.se[..9].iter().sum::<f64>() / 9.0
    };
    let ratio = avg(2000) / avg(1000);
    let expect = 1.0 / 2f64.sqrt();
    assert!((ratio - expect).abs() <= 0.2 * expect, "{ratio}");
}

#[test]
fn sampling_is_deterministic_and_worker_independent() {
    let (x, b) = toy_point();
    let a = sampled_shapley(&toy, &x, &b, 100, 9).unwrap();
    assert_eq!(a, sampled_shapley(&toy, &x, &b, 100, 9).unwrap());
    assert_ne!(a, sampled_shapley(&toy, &x, &b, 100, 10).unwrap());
    assert!(matches!(sampled_shapley(&toy, &x, &b, 0, 9), Err(Error::Config(_))));

    let inputs: Vec<Vec<f64>> = (0..6).map(|i| x.iter().map(|v| v * i as f64 / 3.0).collect()).collect();
    let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
    let one = explain_all(&toy, &refs, &b, 40, 4, 1).unwrap();
    let three = explain_all(&toy, &refs, &b, 40, 4, 3).unwrap();
    assert_eq!(one, three);
    assert_ne!(one[1].values, one[2].values);
}

#[test]
fn background_is_mean_of_drawn_rows() {
    let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, 1.0]).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    // Fewer rows than the draw size: every row is used.
    assert_eq!(background_mean(&refs, 5).unwrap(), vec![14.5, 1.0]);
    let rows: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64]).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let a = background_mean(&refs, 5).unwrap();
    assert_eq!(a, background_mean(&refs, 5).unwrap());
    assert_ne!(a, background_mean(&refs, 6).unwrap());
    assert!(background_mean(&[], 0).is_err());
}

fn matrix(steps: usize, names: &[&str], samples: Vec<(Vec<f64>, Vec<f64>)>) -> AttributionMatrix {
    AttributionMatrix {
        model_tag: "toy".into(),
        steps,
        feature_names: names.iter().map(|s| s.to_string()).collect(),
        samples: samples
            .into_iter()
            .enumerate()
            .map(|(i, (values, raw))| SampleAttribution {
                id: format!("s{i}"),
                explanation: Explanation {
                    base: 0.0,
                    prediction: values.iter().sum(),
                    se: vec![0.0; values.len()],
                    values,
                },
                raw,
            })
            .collect(),
    }
}

fn standard_names() -> Vec<String> {
    (0..17).map(|i| format!("f{i}")).collect()
}

#[test]
fn zero_attributions_rank_in_column_order_and_count_nothing() {
    let names = standard_names();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let set = matrix(14, &names, vec![(vec![0.0; 238], vec![0.0; 238]); 3]);
    let r = importance_report(&set).unwrap();
    assert!(r.columns.iter().all(|c| c.rank == c.column + 1));
    assert!(r.month_counts.iter().all(|(_, n)| *n == 0));
    assert_eq!(r.format_counts(), "feature,months\n");
}

#[test]
fn ranks_form_a_permutation_and_counts_are_bounded() {
    use rand::Rng;
    let names = standard_names();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = (0..5)
        .map(|_| ((0..238).map(|_| rng.gen_range(-1.0..1.0)).collect(), vec![0.0; 238]))
        .collect();
    let r = importance_report(&matrix(14, &names, samples)).unwrap();
    let mut ranks: Vec<usize> = r.columns.iter().map(|c| c.rank).collect();
    ranks.sort();
    assert_eq!(ranks, (1..=238).collect::<Vec<_>>());
    assert!(r.month_counts.iter().all(|(_, n)| *n <= 14));
    assert_eq!(r.month_counts.iter().map(|(_, n)| n).sum::<usize>(), 50);
    let ranked = r.ranked();
    assert!(ranked.windows(2).all(|w| w[0].importance >= w[1].importance));
}

#[test]
fn dominant_feature_fills_every_month() {
    // Feature 2 matters in every month, feature 5 only in the last one.
    let (steps, f) = (14, 17);
    let names = standard_names();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let w: Vec<f64> = (0..steps * f)
        .map(|c| match (c / f, c % f) {
            (13, 5) => 10.0,
            (_, 5) => 0.0,
            (_, 2) => 1.0,
            (m, j) => 0.001 * ((m * 7 + j * 3) % 11) as f64,
        })
        .collect();
    let x: Vec<f64> = vec![1.0; steps * f];
    let b = vec![0.0; steps * f];
    let e = sampled_shapley(&linear(w), &x, &b, 3, 0).unwrap();
    let set = matrix(steps, &names, vec![(e.values, x)]);
    let r = importance_report(&set).unwrap();
    assert_eq!(r.ranked()[0].column, 13 * f + 5);
    assert_eq!(r.month_counts[2], ("f2".to_string(), 14));
    assert_eq!(r.month_counts[5].1, 1);
    assert!(r.format_counts().starts_with("feature,months\nf2,14\n"));
    assert!(r.format_ranking().starts_with("rank,month,feature,importance\n1,14,f5,"));
}

#[test]
fn summary_rows_cover_every_column() {
    let names = standard_names();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let one = matrix(14, &names, vec![(vec![0.5; 238], vec![2.0; 238])]);
    let mut buf = Vec::new();
    write_summary(&mut buf, &one).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + 238);
    assert_eq!(text.lines().nth(1).unwrap(), "s0,1,f0,5.000000000000e-1,2.000000000000e0,0.000000e0");
    assert!(text.lines().last().unwrap().starts_with("s0,14,f16,"));

    let three = matrix(14, &names, vec![(vec![0.5; 238], vec![2.0; 238]); 3]);
    let mut buf = Vec::new();
    write_summary(&mut buf, &three).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 238);

    let bad = matrix(14, &names, vec![(vec![0.5; 237], vec![2.0; 238])]);
    assert!(write_summary(Vec::new(), &bad).is_err());
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (fractional_ranks(a), fractional_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn monotone_feature_values_track_their_attributions() {
    use rand::Rng;
    // Increasing in column 0, with other columns mixing in.
    let f = |rows: &[f64]| Ok(rows_of(rows, 4).map(|r| (r[0] + 0.3 * r[1] * r[2]).tanh() + 0.2 * r[3]).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inputs: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
    let background = background_mean(&refs, 0).unwrap();
    let e = explain_all(&f, &refs, &background, 200, 1, 1).unwrap();
    let shap: Vec<f64> = e.iter().map(|e| e.values[0]).collect();
    let centred: Vec<f64> = inputs.iter().map(|x| x[0] - background[0]).collect();
    assert!(spearman(&shap, &centred) >= 0.9);
}

#[test]
fn model_explanations_add_up_to_the_prediction() {
    let spec = ModelSpec {
        architecture: Architecture::ReseBilstm,
        steps: 3,
        features: 2,
        hidden: 4,
        heads: 2,
        key_width: 2,
        head_hidden: 5,
        dropout: 0.1,
        conv_channels: 4,
        conv_kernel: 2,
        seed: 1,
    };
    let model = Model::build(spec).unwrap();
    let f = model_value_fn(&model);
    let x = [0.5, -1.0, 1.5, 0.2, -0.3, 0.8];
    let b = [0.0; 6];
    let s = sampled_shapley(&f, &x, &b, 30, 2).unwrap();
    let predict = |v: &[f64]| model.predict(&NumArray::new(&[1, 3, 2], v.to_vec()).unwrap()).unwrap()[0];
    assert!((s.prediction - predict(&x)).abs() < 1e-12);
    assert!((s.base - predict(&b)).abs() < 1e-12);
    assert!(s.efficiency_gap().abs() < 1e-10);
    let all: Vec<usize> = (0..6).collect();
    let exact = exact_shapley(&f, &x, &b, &all).unwrap();
    assert!(exact.efficiency_gap().abs() < 1e-10);
}

#[test]
fn picked_samples_balance_the_classes() {
    let samples: Vec<SampleRef> = (0..100)
        .map(|i| SampleRef {
            run: i,
            offset: 0,
            label: (i % 10 == 0) as u8,
        })
        .collect();
    let p = pick_samples(&samples, 8, 3);
    assert_eq!(p.len(), 8);
    assert_eq!(p.iter().filter(|s| s.label == 1).count(), 4);
    assert!(p.windows(2).all(|w| w[0].run < w[1].run));
    assert_eq!(p, pick_samples(&samples, 8, 3));
    // Too few positives: negatives fill the rest.
    let p = pick_samples(&samples, 30, 3);
    assert_eq!((p.len(), p.iter().filter(|s| s.label == 1).count()), (30, 10));
    assert_eq!(pick_samples(&samples, 500, 0).len(), 100);
}
