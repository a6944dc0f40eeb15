use serde::{Deserialize, Serialize};

use super::features::LoanSeries;

/// Cohort-level statistics: loans, history lengths in months, and the share
/// of loans that ever reach three months delinquent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub loans: usize,
    pub mean_length: f64,
    pub median_length: f64,
    pub default_rate: f64,
}

pub fn cohort_summary(loans: &[LoanSeries]) -> CohortSummary {
    let n = loans.len();
    if n == 0 {
        return CohortSummary {
            loans: 0,
            mean_length: 0.0,
            median_length: 0.0,
            default_rate: 0.0,
        };
    }
    let mut lengths: Vec<usize> = loans.iter().map(|l| l.records.len()).collect();
    lengths.sort_unstable();
    let median_length = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
    };
    CohortSummary {
        loans: n,
        mean_length: lengths.iter().sum::<usize>() as f64 / n as f64,
        median_length,
        default_rate: loans.iter().filter(|l| l.ever_defaulted()).count() as f64 / n as f64,
    }
}
