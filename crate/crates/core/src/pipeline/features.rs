//! Per-loan grouping and month-level feature encoding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layout::{CategorySet, Layout};
use super::record::MonthlyRecord;

/// Numeric columns, in feature order. The two deltas are derived.
pub const NUMERIC_FEATURES: [&str; 8] = [
    "current_actual_upb",
    "interest_bearing_upb",
    "current_deferred_upb",
    "current_ir",
    "eltv",
    "current_month_modification_cost",
    "interest_bearing_upb_delta",
    "current_actual_upb_delta",
];

pub const NUMERIC_COUNT: usize = NUMERIC_FEATURES.len();

/// All months of one loan, sorted by period and free of duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct LoanSeries {
    pub loan_id: String,
    pub records: Vec<MonthlyRecord>,
}

impl LoanSeries {
    /// Maximal runs of consecutive months.
    pub fn contiguous_runs(&self) -> Vec<&[MonthlyRecord]> {
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 1..=self.records.len() {
            let breaks = i == self.records.len()
                || self.records[i].period.index() != self.records[i - 1].period.index() + 1;
            if breaks {
                if i > start {
                    runs.push(&self.records[start..i]);
                }
                start = i;
            }
        }
        runs
    }

    pub fn ever_defaulted(&self) -> bool {
        self.records.iter().any(|r| r.clds.is_default())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupDiagnostics {
    pub loans: usize,
    /// Repeated (loan_id, period) rows; the first occurrence is kept.
    pub duplicate_rows: usize,
    /// Missing months inside a loan's history.
    pub gaps: usize,
}

/// Groups records by loan, ordered by loan id, each loan sorted by period.
pub fn group_loans(records: Vec<MonthlyRecord>) -> (Vec<LoanSeries>, GroupDiagnostics) {
    let mut by_loan: BTreeMap<String, Vec<MonthlyRecord>> = BTreeMap::new();
    for r in records {
        by_loan.entry(r.loan_id.clone()).or_default().push(r);
    }
    let mut diag = GroupDiagnostics::default();
    let loans = by_loan
        .into_iter()
        .map(|(loan_id, mut recs)| {
            recs.sort_by_key(|r| r.period);
            let before = recs.len();
            recs.dedup_by_key(|r| r.period);
            diag.duplicate_rows += before - recs.len();
            diag.gaps += recs
                .windows(2)
                .filter(|w| w[1].period.index() != w[0].period.index() + 1)
                .count();
            LoanSeries { loan_id, records: recs }
        })
        .collect::<Vec<_>>();
    diag.loans = loans.len();
    (loans, diag)
}

/// Maps contiguous months to fixed-width feature rows.
#[derive(Clone, Debug)]
pub struct FeatureEncoder {
    layout: Layout,
}

impl FeatureEncoder {
    pub fn new(layout: Layout) -> Self {
        Self { layout }
    }

    pub fn width(&self) -> usize {
        NUMERIC_COUNT + self.layout.category_sets().iter().map(|(_, s)| s.levels.len()).sum::<usize>()
    }

    /// Column names, one-hot columns written as `field=level`.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = NUMERIC_FEATURES.iter().map(|s| s.to_string()).collect();
        for (field, set) in self.layout.category_sets() {
            names.extend(set.levels.iter().map(|l| format!("{field}={l}")));
        }
        names
    }

    /// Row-major `[months.len(), width]` features for consecutive months.
    ///
    /// Missing numerics become 0. A delta is 0 in the first month and
    /// whenever either month's value is missing.
    pub fn encode(&self, months: &[MonthlyRecord]) -> Vec<f64> {
        let width = self.width();
        let mut out = Vec::with_capacity(months.len() * width);
        for (t, r) in months.iter().enumerate() {
            let delta = |get: fn(&MonthlyRecord) -> Option<f64>| match (t.checked_sub(1).map(|p| get(&months[p])), get(r)) {
                (Some(Some(prev)), Some(cur)) => cur - prev,
                _ => 0.0,
            };
            out.extend([
                r.current_actual_upb.unwrap_or(0.0),
                r.interest_bearing_upb.unwrap_or(0.0),
                r.current_deferred_upb.unwrap_or(0.0),
                r.current_ir.unwrap_or(0.0),
                r.eltv.unwrap_or(0.0),
                r.current_month_modification_cost.unwrap_or(0.0),
                delta(|r| r.interest_bearing_upb),
                delta(|r| r.current_actual_upb),
            ]);
            let cats: [(&CategorySet, &Option<String>); 3] = [
                (&self.layout.modification_flag, &r.modification_flag),
                (&self.layout.delinquency_due_to_disaster, &r.delinquency_due_to_disaster),
                (&self.layout.borrower_assistance_status_code, &r.borrower_assistance_status_code),
            ];
            for (set, value) in cats {
                let (hot, _) = set.encode(value.as_deref());
                out.extend((0..set.levels.len()).map(|i| if i == hot { 1.0 } else { 0.0 }));
            }
        }
        out
    }
}
