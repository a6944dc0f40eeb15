//! 19-month sliding windows: 14 input months, a 2-month blank, 3 label months.

use super::record::Clds;

pub const WINDOW_MONTHS: usize = 19;
pub const INPUT_MONTHS: usize = 14;
/// Zero-based offset of the first label month.
pub const LABEL_START: usize = 16;

/// Start offsets of every window in a run of `len` consecutive months.
pub fn window_starts(len: usize, stride: usize) -> Vec<usize> {
    assert!(stride >= 1, "stride must be positive");
    if len < WINDOW_MONTHS {
        return Vec::new();
    }
    (0..=len - WINDOW_MONTHS).step_by(stride).collect()
}

/// Number of windows [`window_starts`] yields.
pub fn window_count(len: usize, stride: usize) -> usize {
    if len < WINDOW_MONTHS {
        0
    } else {
        (len - WINDOW_MONTHS) / stride + 1
    }
}

/// Label of a 19-month delinquency slice, or `None` when the input months
/// are not all current (any delinquency or an unavailable code).
///
/// The label is 1 iff a label month is three or more months delinquent;
/// unavailable codes in the label months count as not defaulted.
pub fn label_window(clds: &[Clds]) -> Option<u8> {
    assert_eq!(clds.len(), WINDOW_MONTHS);
    if !clds[..INPUT_MONTHS].iter().all(|c| c.is_current()) {
        return None;
    }
    Some(clds[LABEL_START..].iter().any(|c| c.is_default()) as u8)
}
