//! Windowed, split, standardized cohorts.
//!
//! Encoded months are stored once per contiguous run of a loan; a sample is
//! a reference `(run, offset)` whose inputs are the 14 rows starting at
//! `offset`, so overlapping windows share storage.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{group_loans, FeatureEncoder, GroupDiagnostics, LoanSeries, NUMERIC_COUNT};
use super::layout::Layout;
use super::record::{MonthlyRecord, Period};
use super::windows::{label_window, window_starts, INPUT_MONTHS, WINDOW_MONTHS};
use crate::error::{Error, Result};
use crate::tensor::NumArray;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stride: usize,
    pub train_ratio: f64,
    pub seed: u64,
    /// Also undersample the test partition to 1:1 (drawn once with `seed`).
    pub balanced_test: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            train_ratio: 0.7,
            seed: 0,
            balanced_test: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::Config(format!("train ratio {} outside (0, 1)", self.train_ratio)));
        }
        Ok(())
    }
}

/// A window reference into a [`CohortDataset`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SampleRef {
    pub run: u32,
    pub offset: u32,
    pub label: u8,
}

/// Consecutive encoded months of one loan.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedRun {
    /// Index into [`CohortDataset::loan_ids`].
    pub loan: usize,
    pub first_period: Period,
    /// Row-major `[months, F]`.
    pub months: Vec<f64>,
}

/// Per-numeric-feature z-score parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ScalingStats {
    /// Population statistics of the numeric columns of `rows`. Columns with
    /// zero variance get scale 1; their indices are returned.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]>) -> (Self, Vec<usize>) {
        let mut n = 0usize;
        let mut sum = [0.0; NUMERIC_COUNT];
        let mut sq = [0.0; NUMERIC_COUNT];
        let rows: Vec<&[f64]> = rows.collect();
        for r in &rows {
            n += 1;
            for j in 0..NUMERIC_COUNT {
                sum[j] += r[j];
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| if n > 0 { s / n as f64 } else { 0.0 }).collect();
        for r in &rows {
            for j in 0..NUMERIC_COUNT {
                sq[j] += (r[j] - mean[j]).powi(2);
            }
        }
        let mut zero = Vec::new();
        let std = (0..NUMERIC_COUNT)
            .map(|j| {
                let s = if n > 0 { (sq[j] / n as f64).sqrt() } else { 0.0 };
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    zero.push(j);
                    1.0
                }
            })
            .collect();
        (Self { mean, std }, zero)
    }

    pub fn identity() -> Self {
        Self {
            mean: vec![0.0; NUMERIC_COUNT],
            std: vec![1.0; NUMERIC_COUNT],
        }
    }

    /// Standardizes the numeric prefix of every `width`-wide row in place.
    pub fn apply(&self, data: &mut [f64], width: usize) {
        for row in data.chunks_mut(width) {
            for j in 0..NUMERIC_COUNT {
                row[j] = (row[j] - self.mean[j]) / self.std[j];
            }
        }
    }

    pub fn invert(&self, data: &mut [f64], width: usize) {
        for row in data.chunks_mut(width) {
            for j in 0..NUMERIC_COUNT {
                row[j] = row[j] * self.std[j] + self.mean[j];
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub grouping: GroupDiagnostics,
    pub runs: usize,
    pub candidates: usize,
    /// Candidates dropped because an input month was not current.
    pub filtered: usize,
    pub positives: usize,
    pub negatives: usize,
    pub loans_with_samples: usize,
    pub train_loans: usize,
    pub test_loans: usize,
    /// Numeric features with zero training variance (scale 1 used).
    pub zero_variance: Vec<String>,
}

/// Samples of one cohort after windowing, splitting and scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct CohortDataset {
    pub cohort: String,
    pub feature_names: Vec<String>,
    pub loan_ids: Vec<String>,
    pub runs: Vec<EncodedRun>,
    /// Training partition at its natural class ratio.
    pub train: Vec<SampleRef>,
    pub test: Vec<SampleRef>,
    pub scaling: ScalingStats,
    pub balanced_test: bool,
}

impl CohortDataset {
    pub fn features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn inputs(&self, s: &SampleRef) -> &[f64] {
        let f = self.features();
        let start = s.offset as usize * f;
        &self.runs[s.run as usize].months[start..start + INPUT_MONTHS * f]
    }

    pub fn loan_id(&self, s: &SampleRef) -> &str {
        &self.loan_ids[self.runs[s.run as usize].loan]
    }

    pub fn start_period(&self, s: &SampleRef) -> Period {
        self.runs[s.run as usize].first_period.offset(s.offset as i64)
    }

    /// A 1:1 training set drawn from the training partition.
    pub fn balanced_train(&self, seed: u64) -> Result<Vec<SampleRef>> {
        undersample(&self.train, seed)
    }

    /// Inputs `[B, 14, F]` and labels of the given samples.
    pub fn batch(&self, samples: &[SampleRef]) -> (NumArray, Vec<f64>) {
        let f = self.features();
        let mut data = Vec::with_capacity(samples.len() * INPUT_MONTHS * f);
        for s in samples {
            data.extend_from_slice(self.inputs(s));
        }
        let labels = samples.iter().map(|s| s.label as f64).collect();
        let x = NumArray::new(&[samples.len(), INPUT_MONTHS, f], data).expect("encoded features are finite");
        (x, labels)
    }

    /// Raw (unscaled) inputs of a sample.
    pub fn raw_inputs(&self, s: &SampleRef) -> Vec<f64> {
        let mut v = self.inputs(s).to_vec();
        self.scaling.invert(&mut v, self.features());
        v
    }
}

/// Assigns whole loans to train or test, stratified by whether the loan has
/// any positive sample. Returns the train and test samples in input order.
pub fn split_by_loan(
    samples: &[SampleRef],
    loan_of: impl Fn(&SampleRef) -> usize,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<SampleRef>, Vec<SampleRef>)> {
    let mut loans: Vec<(usize, bool)> = Vec::new();
    {
        let mut seen = std::collections::BTreeMap::new();
        for s in samples {
            let e = seen.entry(loan_of(s)).or_insert(false);
            *e |= s.label == 1;
        }
        loans.extend(seen);
    }
    if loans.len() < 2 {
        return Err(Error::Data(format!(
            "cannot split {} loan(s) into train and test",
            loans.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_loans = std::collections::BTreeSet::new();
    let mut strata: Vec<Vec<usize>> = [true, false]
        .iter()
        .map(|&p| loans.iter().filter(|l| l.1 == p).map(|l| l.0).collect())
        .collect();
    let mut test_count = 0;
    for stratum in &mut strata {
        stratum.shuffle(&mut rng);
        let k = (ratio * stratum.len() as f64).round() as usize;
        train_loans.extend(stratum[..k].iter().copied());
        test_count += stratum.len() - k;
    }
    // Keep both partitions non-empty.
    if test_count == 0 {
        let biggest = strata.iter().max_by_key(|s| s.len()).unwrap();
        train_loans.remove(biggest.last().unwrap());
    } else if train_loans.is_empty() {
        let biggest = strata.iter().max_by_key(|s| s.len()).unwrap();
        train_loans.insert(biggest[0]);
    }
    let (train, test) = samples.iter().partition(|s| train_loans.contains(&loan_of(s)));
    Ok((train, test))
}

/// Keeps every sample of the minority class and an equal-size uniform draw
/// of the majority class, preserving input order.
pub fn undersample(samples: &[SampleRef], seed: u64) -> Result<Vec<SampleRef>> {
    let pos: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == 1).collect();
    let neg: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Data(format!(
            "cannot balance {} positive and {} negative samples",
            pos.len(),
            neg.len()
        )));
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|i| majority[i])
        .chain(minority)
        .collect();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| samples[i]).collect())
}

/// Labeled windows of one run (offsets relative to the run) plus the number
/// of candidates considered.
pub fn label_run(run: &[MonthlyRecord], stride: usize) -> (Vec<(usize, u8)>, usize) {
    let starts = window_starts(run.len(), stride);
    let n = starts.len();
    let kept = starts
        .into_iter()
        .filter_map(|s| {
            let clds: Vec<_> = run[s..s + WINDOW_MONTHS].iter().map(|r| r.clds).collect();
            label_window(&clds).map(|y| (s, y))
        })
        .collect();
    (kept, n)
}

/// Full pipeline from parsed records to a standardized cohort.
pub fn build_cohort(
    cohort: &str,
    records: Vec<MonthlyRecord>,
    layout: &Layout,
    config: &PipelineConfig,
) -> Result<(CohortDataset, PipelineDiagnostics)> {
    let (loans, grouping) = group_loans(records);
    build_from_loans(cohort, &loans, grouping, layout, config)
}

pub fn build_from_loans(
    cohort: &str,
    loans: &[LoanSeries],
    grouping: GroupDiagnostics,
    layout: &Layout,
    config: &PipelineConfig,
) -> Result<(CohortDataset, PipelineDiagnostics)> {
    config.validate()?;
    layout.validate()?;
    let encoder = FeatureEncoder::new(layout.clone());
    let f = encoder.width();

    // Per loan: (runs with encoded months, labeled windows per run, candidate count).
    type LoanOut = (Vec<(Period, Vec<f64>, Vec<(usize, u8)>)>, usize);
    let per_loan: Vec<LoanOut> = loans
        .par_iter()
        .map(|loan| {
            let mut candidates = 0;
            let runs = loan
                .contiguous_runs()
                .into_iter()
                .map(|run| {
                    let (windows, n) = label_run(run, config.stride);
                    candidates += n;
                    (run[0].period, encoder.encode(run), windows)
                })
                .collect();
            (runs, candidates)
        })
        .collect();

    let mut diag = PipelineDiagnostics {
        grouping,
        ..Default::default()
    };
    let mut runs = Vec::new();
    let mut samples = Vec::new();
    for (loan, (loan_runs, candidates)) in per_loan.into_iter().enumerate() {
        diag.candidates += candidates;
        for (first_period, months, windows) in loan_runs {
            let run = runs.len() as u32;
            samples.extend(windows.iter().map(|&(offset, label)| SampleRef {
                run,
                offset: offset as u32,
                label,
            }));
            runs.push(EncodedRun {
                loan,
                first_period,
                months,
            });
        }
    }
    diag.runs = runs.len();
    diag.filtered = diag.candidates - samples.len();
    diag.positives = samples.iter().filter(|s| s.label == 1).count();
    diag.negatives = samples.len() - diag.positives;

    let loan_of = |s: &SampleRef| runs[s.run as usize].loan;
    let (train, mut test) = split_by_loan(&samples, loan_of, config.train_ratio, config.seed)?;
    let count_loans = |set: &[SampleRef]| set.iter().map(loan_of).collect::<std::collections::BTreeSet<_>>().len();
    diag.train_loans = count_loans(&train);
    diag.test_loans = count_loans(&test);
    diag.loans_with_samples = diag.train_loans + diag.test_loans;

    // Fit on every distinct month that appears in a training input window.
    let mut covered: Vec<Vec<bool>> = runs.iter().map(|r| vec![false; r.months.len() / f]).collect();
    for s in &train {
        let c = &mut covered[s.run as usize];
        c[s.offset as usize..s.offset as usize + INPUT_MONTHS].fill(true);
    }
    let fit_rows = runs.iter().zip(&covered).flat_map(|(r, c)| {
        r.months
            .chunks(f)
            .zip(c)
            .filter_map(|(row, &used)| used.then_some(row))
    });
    let (scaling, zero) = ScalingStats::fit(fit_rows);
    diag.zero_variance = zero.iter().map(|&j| encoder.names()[j].clone()).collect();
    for j in &diag.zero_variance {
        log::warn!("feature {j} has zero variance in training data; left unscaled");
    }
    for r in &mut runs {
        scaling.apply(&mut r.months, f);
    }

    if config.balanced_test {
        test = undersample(&test, config.seed)?;
    }

    let dataset = CohortDataset {
        cohort: cohort.to_string(),
        feature_names: encoder.names(),
        loan_ids: loans.iter().map(|l| l.loan_id.clone()).collect(),
        runs,
        train,
        test,
        scaling,
        balanced_test: config.balanced_test,
    };
    Ok((dataset, diag))
}
