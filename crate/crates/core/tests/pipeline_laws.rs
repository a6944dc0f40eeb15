use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use reseb_core::pipeline::{
    build_cohort, label_run, split_by_loan, undersample, window_count, Clds, Layout, MonthlyRecord, Period,
    PipelineConfig, SampleRef, INPUT_MONTHS,
};
use reseb_core::Error;

/// Delinquency codes of one loan; 99 stands for unavailable.
fn loan_strategy() -> impl Strategy<Value = Vec<u32>> {
    let code = prop_oneof![
        12 => Just(0u32),
        1 => 1u32..5,
        1 => Just(99u32),
    ];
    prop::collection::vec(code, 0..45)
}

fn records(loans: &[Vec<u32>], gap_at: &[Option<usize>]) -> Vec<MonthlyRecord> {
    let mut out = Vec::new();
    for (l, (codes, gap)) in loans.iter().zip(gap_at).enumerate() {
        let mut period = Period::new(2015, 1 + (l % 12) as u8).unwrap();
        for (i, &c) in codes.iter().enumerate() {
            if Some(i) == *gap {
                period = period.offset(2);
            }
            let clds = if c == 99 { Clds::Unavailable } else { Clds::Months(c) };
            let mut r = MonthlyRecord::bare(format!("L{l}"), period, clds);
            r.current_actual_upb = Some(1e5 - 300.0 * i as f64 - l as f64);
            r.current_ir = Some(3.0 + (i % 5) as f64 * 0.25);
            out.push(r);
            period = period.offset(1);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn pipeline_laws_hold(
        loans in prop::collection::vec(loan_strategy(), 1..7),
        gaps in prop::collection::vec(prop::option::weighted(0.2, 1usize..40), 7),
        stride in 1usize..4,
        seed in any::<u64>(),
    ) {
        // Window counts per contiguous run.
        for codes in &loans {
            let recs = records(std::slice::from_ref(codes), &[None]);
            let (_, n) = label_run(&recs, 1);
            prop_assert_eq!(n, codes.len().saturating_sub(18));
            let (_, n) = label_run(&recs, stride);
            prop_assert_eq!(n, window_count(codes.len(), stride));
        }

        let recs = records(&loans, &gaps[..loans.len()]);
        let clds: BTreeMap<(String, Period), Clds> =
            recs.iter().map(|r| ((r.loan_id.clone(), r.period), r.clds)).collect();
        let config = PipelineConfig { stride, seed, ..Default::default() };
        let ds = match build_cohort("p", recs, &Layout::compact(), &config) {
            Ok((ds, _)) => ds,
            Err(Error::Data(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };

        // Leak freedom over every emitted sample.
        for s in ds.train.iter().chain(&ds.test) {
            let id = ds.loan_id(s).to_string();
            let start = ds.start_period(s);
            for m in 0..INPUT_MONTHS {
                prop_assert_eq!(clds[&(id.clone(), start.offset(m as i64))], Clds::Months(0));
            }
        }

        // Disjoint partitions.
        let train: BTreeSet<&str> = ds.train.iter().map(|s| ds.loan_id(s)).collect();
        prop_assert!(ds.test.iter().all(|s| !train.contains(ds.loan_id(s))));

        // Balance.
        match ds.balanced_train(seed) {
            Ok(b) => {
                let pos = b.iter().filter(|s| s.label == 1).count();
                prop_assert_eq!(2 * pos, b.len());
            }
            Err(e) => prop_assert!(matches!(e, Error::Data(_))),
        }
    }

    #[test]
    fn undersampled_counts_are_equal(
        labels in prop::collection::vec(0u8..2, 2..300),
        seed in any::<u64>(),
    ) {
        let samples: Vec<SampleRef> = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| SampleRef { run: i as u32, offset: 0, label })
            .collect();
        let pos = labels.iter().filter(|&&y| y == 1).count();
        match undersample(&samples, seed) {
            Ok(b) => {
                let kept = b.iter().filter(|s| s.label == 1).count();
                prop_assert_eq!(2 * kept, b.len());
                prop_assert_eq!(kept, pos.min(labels.len() - pos));
            }
            Err(_) => prop_assert!(pos == 0 || pos == labels.len()),
        }
    }
}

/// 1000 loans at a 3% default rate: stratifying by loan keeps the test
/// default rate close to the overall rate.
#[test]
fn stratified_split_preserves_default_rate() {
    let mut samples = Vec::new();
    for loan in 0..1000u32 {
        let defaulter = loan % 100 < 3;
        for offset in 0..10 {
            samples.push(SampleRef {
                run: loan,
                offset,
                label: defaulter as u8,
            });
        }
    }
    let rate = |set: &[SampleRef]| set.iter().filter(|s| s.label == 1).count() as f64 / set.len() as f64;
    let overall = rate(&samples);
    assert_eq!(overall, 0.03);
    for seed in 0..20 {
        let (train, test) = split_by_loan(&samples, |s| s.run as usize, 0.7, seed).unwrap();
        assert!((rate(&test) - overall).abs() <= 0.005, "seed {seed}: {}", rate(&test));
        assert!((rate(&train) - overall).abs() <= 0.005);
        let share = train.len() as f64 / samples.len() as f64;
        assert!((share - 0.7).abs() < 0.01);
    }
}
