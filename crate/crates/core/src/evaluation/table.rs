//! Metric tables as delimited text: one header line, then
//! `model,cohort,trial,accuracy,precision,recall,f1,auc` rows. A trial of
//! `mean` marks an averaged row and `NA` an undefined metric.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::{Metric, MetricsReport};
use crate::error::{Error, Result};

pub const HEADER: &str = "model,cohort,trial,accuracy,precision,recall,f1,auc";

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub cohort: String,
    /// `None` for a row that already averages several trials.
    pub trial: Option<usize>,
    pub values: [Option<f64>; 5],
}

impl MetricRow {
    pub fn from_report(model: &str, cohort: &str, trial: Option<usize>, report: &MetricsReport) -> Self {
        Self {
            model: model.to_string(),
            cohort: cohort.to_string(),
            trial,
            values: report.values(),
        }
    }

    pub fn get(&self, m: Metric) -> Option<f64> {
        self.values[m as usize]
    }
}

fn value(text: &str, line: usize, column: &str) -> Result<Option<f64>> {
    if text == "NA" {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::Parse {
            line,
            message: format!("{column} value {text:?} is not a number or NA"),
        }),
    }
}

pub fn parse_table(text: &str) -> Result<Vec<MetricRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((i, h)) => {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected header {HEADER:?}, found {:?}", h.trim()),
            })
        }
        None => return Ok(Vec::new()),
    }
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            if cells.len() != 8 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 8 columns, found {}", cells.len()),
                });
            }
            if cells[0].is_empty() || cells[1].is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty model or cohort".into(),
                });
            }
            let trial = match cells[2] {
                "mean" => None,
                t => Some(t.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("trial {t:?} is neither an index nor mean"),
                })?),
            };
            let mut values = [None; 5];
            for (k, m) in Metric::ALL.iter().enumerate() {
                values[k] = value(cells[3 + k], line, m.name())?;
            }
            Ok(MetricRow {
                model: cells[0].to_string(),
                cohort: cells[1].to_string(),
                trial,
                values,
            })
        })
        .collect()
}

pub fn format_table(rows: &[MetricRow]) -> String {
    let mut out = format!("{HEADER}\n");
    for r in rows {
        let trial = r.trial.map_or("mean".to_string(), |t| t.to_string());
        write!(out, "{},{},{trial}", r.model, r.cohort).unwrap();
        for v in r.values {
            match v {
                Some(x) => write!(out, ",{x}").unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn read_table(path: &Path) -> Result<Vec<MetricRow>> {
    parse_table(&std::fs::read_to_string(path)?)
}

pub fn write_table(path: &Path, rows: &[MetricRow]) -> Result<()> {
    Ok(std::fs::write(path, format_table(rows))?)
}

/// Averages every (model, cohort) pair over its rows, keeping first-seen
/// order. A metric undefined in any trial is undefined in the mean.
pub fn average_trials(rows: &[MetricRow]) -> Vec<MetricRow> {
    let mut out: Vec<(MetricRow, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(o, _)| o.model == r.model && o.cohort == r.cohort) {
            Some((o, n)) => {
                for k in 0..5 {
                    o.values[k] = o.values[k].zip(r.values[k]).map(|(a, b)| a + b);
                }
                *n += 1;
            }
            None => out.push((r.clone(), 1)),
        }
    }
    out.into_iter()
        .map(|(mut r, n)| {
            r.trial = None;
            for v in &mut r.values {
                *v = v.map(|x| x / n as f64);
            }
            r
        })
        .collect()
}
