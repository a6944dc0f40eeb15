use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;

fn appendix() -> Vec<MetricRow> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/appendix_tables.csv");
    read_table(std::path::Path::new(path)).unwrap()
}

fn cohort(rows: &[MetricRow], name: &str) -> Vec<ModelMetrics> {
    rows.iter()
        .filter(|r| r.cohort == name)
        .map(|r| (r.model.clone(), r.values))
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, ties: bool) -> (Vec<f64>, Vec<u8>) {
    let scores = (0..n)
        .map(|_| {
            let s: f64 = rng.gen();
            if ties {
                (s * 10.0).floor() / 10.0
            } else {
                s
            }
        })
        .collect();
    let labels = (0..n).map(|_| rng.gen_range(0..2)).collect();
    (scores, labels)
}

#[test]
fn confusion_examples() {
    let c = confusion(&[0.9, 0.1], &[1, 0], THRESHOLD).unwrap();
    assert_eq!(c, Confusion { tp: 1, tn: 1, fp: 0, fn_: 0 });
    let c = confusion(&[0.5; 4], &[1, 0, 1, 0], THRESHOLD).unwrap();
    assert_eq!((c.tp, c.fp), (2, 2));
    assert!(matches!(confusion(&[0.5], &[1, 0], THRESHOLD), Err(Error::Contract(_))));
}

#[test]
fn confusion_matches_independent_tally() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let (scores, labels) = random_instance(&mut rng, 200, true);
        let c = confusion(&scores, &labels, THRESHOLD).unwrap();
        let mut tally = [[0u64; 2]; 2];
        for i in 0..scores.len() {
            let predicted = if scores[i] < 0.5 { 0 } else { 1 };
            tally[predicted][labels[i] as usize] += 1;
        }
        assert_eq!([c.tn, c.fn_, c.fp, c.tp], [tally[0][0], tally[0][1], tally[1][0], tally[1][1]]);
        assert_eq!(c.total(), 200);
        let m = threshold_metrics(&c);
        let correct = (0..200).filter(|&i| (scores[i] >= 0.5) == (labels[i] == 1)).count();
        assert_eq!(m.accuracy.unwrap(), correct as f64 / 200.0);
    }
}

#[test]
fn metric_arithmetic() {
    let m = threshold_metrics(&Confusion { tp: 50, tn: 40, fp: 10, fn_: 0 });
    assert!((m.accuracy.unwrap() - 0.9).abs() < 1e-15);
    assert!((m.precision.unwrap() - 5.0 / 6.0).abs() < 1e-15);
    assert_eq!(m.recall, Some(1.0));
    assert!((m.f1.unwrap() - 10.0 / 11.0).abs() < 1e-15);

    let m = threshold_metrics(&Confusion { tp: 0, tn: 5, fp: 0, fn_: 3 });
    assert_eq!(m.precision, None);
    assert_eq!(m.f1, None);
    assert_eq!(m.recall, Some(0.0));

    let m = threshold_metrics(&Confusion { tp: 30, tn: 0, fp: 10, fn_: 10 });
    assert_eq!(m.precision, m.recall);
    assert!((m.f1.unwrap() - m.precision.unwrap()).abs() < 1e-15);

    let m = threshold_metrics(&Confusion { tp: 0, tn: 1, fp: 2, fn_: 3 });
    assert_eq!((m.precision, m.recall, m.f1), (Some(0.0), Some(0.0), Some(0.0)));
}

#[test]
fn f1_is_harmonic_mean_of_stored_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let c = Confusion {
            tp: rng.gen_range(0..50),
            tn: rng.gen_range(0..50),
            fp: rng.gen_range(0..50),
            fn_: rng.gen_range(0..50),
        };
        let m = threshold_metrics(&c);
        if let (Some(p), Some(r), Some(f)) = (m.precision, m.recall, m.f1) {
            if p + r > 0.0 {
                assert!((f - 2.0 * p * r / (p + r)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn auc_examples() {
    let s = [0.9, 0.8, 0.2, 0.1];
    assert_eq!(auc(&s, &[1, 1, 0, 0]).unwrap(), Some(1.0));
    assert_eq!(auc(&s, &[0, 0, 1, 1]).unwrap(), Some(0.0));
    assert_eq!(auc(&[0.3, 0.3], &[1, 0]).unwrap(), Some(0.5));
    assert_eq!(auc(&s, &[1; 4]).unwrap(), None);
}

fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

#[test]
fn auc_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..100 {
        let (scores, labels) = random_instance(&mut rng, 100, k % 2 == 0);
        let a = auc(&scores, &labels).unwrap().unwrap();
        assert!((a - pairwise_auc(&scores, &labels)).abs() <= 1e-12);
    }
}

#[test]
fn auc_invariant_under_monotone_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (scores, labels) = random_instance(&mut rng, 80, true);
        let a = auc(&scores, &labels).unwrap();
        let (k, c) = (rng.gen_range(0.1..5.0), rng.gen_range(-3.0..3.0));
        let mapped: Vec<f64> = scores.iter().map(|s| (k * s + c).exp().atan()).collect();
        assert_eq!(auc(&mapped, &labels).unwrap(), a);
    }
}

#[test]
fn fractional_ranks_share_ties_and_sum_correctly() {
    assert_eq!(fractional_ranks(&[0.9, 0.5, 0.9, 0.1]), vec![1.5, 3.0, 1.5, 4.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let k = rng.gen_range(1..30);
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(0..5) as f64).collect();
        let sum: f64 = fractional_ranks(&v).iter().sum();
        assert_eq!(sum, (k * (k + 1)) as f64 / 2.0);
    }
}

#[test]
fn dominant_model_averages_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mut entries: Vec<ModelMetrics> = (0..6)
            .map(|i| (format!("m{i}"), [(); 5].map(|_| Some(rng.gen_range(0.0..0.9)))))
            .collect();
        entries[3].1 = [Some(0.95); 5];
        let t = avgr_cohort("c", &entries).unwrap();
        assert_eq!(t.avgr[3], 1.0);
    }
}

#[test]
fn identical_models_tie() {
    let v = [Some(0.8), Some(0.7), Some(0.6), Some(0.65), Some(0.9)];
    let entries = vec![
        ("a".to_string(), v),
        ("b".to_string(), v),
        ("c".to_string(), [Some(0.5); 5]),
    ];
    let t = avgr_cohort("c", &entries).unwrap();
    assert_eq!(t.avgr, vec![1.5, 1.5, 3.0]);
}

#[test]
fn undefined_metrics_are_refused() {
    let entries = vec![
        ("a".to_string(), [Some(0.8), None, Some(0.6), Some(0.65), Some(0.9)]),
        ("b".to_string(), [Some(0.5); 5]),
    ];
    assert!(matches!(avgr_cohort("c", &entries), Err(Error::Undefined(_))));
}

#[test]
fn cohort_row_2017q2() {
    let rows = appendix();
    assert_eq!(rows.len(), 44 * 6);
    let t = avgr_cohort("2017Q2", &cohort(&rows, "2017Q2")).unwrap();
    let published = [3.0, 3.2, 4.0, 5.2, 4.6, 1.0];
    // GRU and RNN share an AUC of 0.959 at three decimals; the rest are untied.
    let tied = ["GRU", "RNN"];
    for (i, m) in t.models.iter().enumerate() {
        let d = (t.avgr[i] - published[i]).abs();
        if tied.contains(&m.as_str()) {
            assert!(d <= 0.3 + 1e-12, "{m}: {}", t.avgr[i]);
        } else {
            assert!(d < 1e-12, "{m}: {}", t.avgr[i]);
        }
    }
}

#[test]
fn year_row_2017() {
    let rows = appendix();
    let tables = rank_rows(&rows, Group::Year).unwrap();
    assert_eq!(tables.len(), 11);
    let t = tables.iter().find(|t| t.group == "2017").unwrap();
    let published = [11.05, 10.75, 13.70, 21.75, 12.60, 5.15];
    for i in 0..6 {
        assert!((t.avgr[i] - published[i]).abs() <= 0.6, "{}: {}", t.models[i], t.avgr[i]);
    }
    // Pooled ranks over 24 entries sum to 24*25/2 per metric.
    let total: f64 = t.avgr.iter().sum::<f64>() * 4.0;
    assert!((total - 300.0).abs() < 1e-9);
}

#[test]
fn year_extremes_and_label_invariance() {
    let rows = appendix();
    let quarters: Vec<(String, Vec<ModelMetrics>)> =
        ["2017Q1", "2017Q2", "2017Q3", "2017Q4"].iter().map(|q| (q.to_string(), cohort(&rows, q))).collect();
    let base = avgr_year("2017", &quarters).unwrap();

    let mut boosted = quarters.clone();
    for (_, entries) in &mut boosted {
        entries[2].1 = [Some(0.999); 5];
    }
    assert_eq!(avgr_year("2017", &boosted).unwrap().avgr[2], 2.5);

    let mut shuffled = quarters.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (_, entries) in &mut shuffled {
        rand::seq::SliceRandom::shuffle(entries.as_mut_slice(), &mut rng);
    }
    shuffled.reverse();
    let t = avgr_year("2017", &shuffled).unwrap();
    for (i, m) in base.models.iter().enumerate() {
        assert!((t.avgr_of(m).unwrap() - base.avgr[i]).abs() < 1e-12);
    }

    assert!(matches!(avgr_year("2017", &quarters[..3]), Err(Error::Data(_))));
}

#[test]
fn table_round_trip_and_errors() {
    let rows = vec![
        MetricRow {
            model: "ResE-BiLSTM".into(),
            cohort: "2017Q2".into(),
            trial: Some(3),
            values: [Some(0.93), None, Some(0.1 + 0.2), Some(1.0), Some(0.0)],
        },
        MetricRow {
            model: "LSTM".into(),
            cohort: "2017Q2".into(),
            trial: None,
            values: [Some(0.5); 5],
        },
    ];
    assert_eq!(parse_table(&format_table(&rows)).unwrap(), rows);
    assert!(matches!(parse_table("a,b\n"), Err(Error::Parse { line: 1, .. })));
    let bad = format!("{HEADER}\nm,c,1,0.1,0.2,0.3,0.4\n");
    assert!(matches!(parse_table(&bad), Err(Error::Parse { line: 2, .. })));
    let bad = format!("{HEADER}\nm,c,x,0.1,0.2,0.3,0.4,0.5\n");
    assert!(parse_table(&bad).is_err());
}

#[test]
fn trials_average_before_ranking() {
    let row = |model: &str, trial, v: f64| MetricRow {
        model: model.into(),
        cohort: "2020Q1".into(),
        trial: Some(trial),
        values: [Some(v); 5],
    };
    let rows = vec![row("a", 0, 0.9), row("a", 1, 0.5), row("b", 0, 0.6), row("b", 1, 0.6)];
    let means = average_trials(&rows);
    assert_eq!(means.len(), 2);
    assert!((means[0].values[0].unwrap() - 0.7).abs() < 1e-15);
    let t = rank_rows(&rows, Group::Cohort).unwrap();
    assert_eq!(t[0].avgr, vec![1.0, 2.0]);
    assert!(format_avgr(&t).starts_with("group,a,b\n2020Q1,1,2\n"));
}
