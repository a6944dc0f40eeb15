//! Confusion-matrix metrics, ROC AUC, and average-rank aggregation across
//! models.

mod metrics;
mod rank;
mod table;

pub use metrics::{auc, confusion, evaluate, threshold_metrics, Confusion, Metric, MetricsReport, ThresholdMetrics};
pub use rank::{avgr_cohort, avgr_year, format_avgr, format_ranks, fractional_ranks, rank_rows, Group, ModelMetrics, RankTable};
pub use table::{average_trials, format_table, parse_table, read_table, write_table, MetricRow, HEADER};

/// Predictions at or above this score count as positive.
pub const THRESHOLD: f64 = 0.5;

#[cfg(test)]
mod tests;
