//! From delimited loan-performance rows to labeled, leak-free, split and
//! standardized window samples.

pub mod archive;
mod dataset;
mod features;
mod layout;
mod parse;
mod record;
mod summary;
pub mod windows;

pub use archive::{read_archive, read_manifest, write_archive, CohortManifest};
pub use dataset::{
    build_cohort, build_from_loans, label_run, split_by_loan, undersample, CohortDataset, EncodedRun, PipelineConfig,
    PipelineDiagnostics, SampleRef, ScalingStats,
};
pub use features::{group_loans, FeatureEncoder, GroupDiagnostics, LoanSeries, NUMERIC_COUNT, NUMERIC_FEATURES};
pub use layout::{CategorySet, Field, Layout};
pub use parse::{parse_file, parse_reader, ParseDiagnostics};
pub use record::{Clds, MonthlyRecord, Period};
pub use summary::{cohort_summary, CohortSummary};
pub use windows::{label_window, window_count, window_starts, INPUT_MONTHS, LABEL_START, WINDOW_MONTHS};

/// Writes records in the compact layout, one line each.
pub fn write_compact<W: std::io::Write>(mut w: W, records: &[MonthlyRecord], delimiter: char) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_compact_line(delimiter))?;
    }
    Ok(())
}
