use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five reported metrics, in table column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1, Metric::Auc];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Auc => "auc",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(y) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Contract(format!("label {y} is not 0 or 1")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Contract("NaN score".into()));
    }
    Ok(())
}

/// Counts with the rule `score >= threshold` predicts positive.
pub fn confusion(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Confusion> {
    check_inputs(scores, labels)?;
    let mut c = Confusion::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Threshold metrics; `None` marks a zero denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdMetrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn threshold_metrics(c: &Confusion) -> ThresholdMetrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    // Harmonic mean of precision and recall, which is 0 when both are 0.
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    ThresholdMetrics {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
    }
}

/// Mean ranks (1-based, ascending), ties sharing the mean of the ranks they span.
pub(crate) fn mean_ranks_ascending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Area under the ROC curve as the Mann-Whitney statistic, ties counting one
/// half. `None` when either class is absent.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<Option<f64>> {
    check_inputs(scores, labels)?;
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Ok(None);
    }
    let ranks = mean_ranks_ascending(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &y)| y == 1).map(|(r, _)| r).sum();
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(Some(u / (pos as f64 * neg as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub confusion: Confusion,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
}

impl MetricsReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Auc => self.auc,
        }
    }

    pub fn values(&self) -> [Option<f64>; 5] {
        Metric::ALL.map(|m| self.get(m))
    }
}

pub fn evaluate(scores: &[f64], labels: &[u8], threshold: f64) -> Result<MetricsReport> {
    let confusion = confusion(scores, labels, threshold)?;
    let t = threshold_metrics(&confusion);
    Ok(MetricsReport {
        confusion,
        accuracy: t.accuracy,
        precision: t.precision,
        recall: t.recall,
        f1: t.f1,
        auc: auc(scores, labels)?,
    })
}
