//! Delimited performance-file reader.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::layout::{Field, Layout};
use super::record::{Clds, MonthlyRecord, Period};
use crate::error::{Error, Result};

/// How many rejected rows keep their message for the manifest.
const KEPT_MESSAGES: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub rows_read: usize,
    pub rows_rejected: usize,
    /// Numeric or date fields that were present but unparseable, per field.
    pub unparseable_fields: BTreeMap<String, usize>,
    /// Categorical values outside the configured levels, per field.
    pub unknown_categories: BTreeMap<String, usize>,
    /// The first few rejection messages, prefixed with the line number.
    pub messages: Vec<String>,
}

impl ParseDiagnostics {
    fn reject(&mut self, line: usize, message: String) {
        self.rows_rejected += 1;
        if self.messages.len() < KEPT_MESSAGES {
            self.messages.push(format!("line {line}: {message}"));
        }
    }
}

struct Row<'a> {
    fields: Vec<&'a str>,
    layout: &'a Layout,
}

impl<'a> Row<'a> {
    fn raw(&self, f: Field) -> Option<&'a str> {
        let i = *self.layout.columns.get(&f)?;
        let v = self.fields.get(i)?.trim();
        (!v.is_empty()).then_some(v)
    }
}

fn numeric(row: &Row, f: Field, diag: &mut ParseDiagnostics) -> Option<f64> {
    let v = row.raw(f)?;
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(x),
        _ => {
            *diag.unparseable_fields.entry(f.to_string()).or_default() += 1;
            None
        }
    }
}

fn date(row: &Row, f: Field, diag: &mut ParseDiagnostics) -> Option<Period> {
    let v = row.raw(f)?;
    match v.parse() {
        Ok(p) => Some(p),
        Err(_) => {
            *diag.unparseable_fields.entry(f.to_string()).or_default() += 1;
            None
        }
    }
}

fn category(row: &Row, f: Field, diag: &mut ParseDiagnostics) -> Option<String> {
    let v = row.raw(f)?;
    let set = match f {
        Field::ModificationFlag => &row.layout.modification_flag,
        Field::DelinquencyDueToDisaster => &row.layout.delinquency_due_to_disaster,
        _ => &row.layout.borrower_assistance_status_code,
    };
    if !set.levels.iter().any(|l| l == v) {
        *diag.unknown_categories.entry(f.to_string()).or_default() += 1;
    }
    Some(v.to_string())
}

/// Parses one line. `Ok(None)` means the row was rejected and counted.
fn parse_line(line: &str, layout: &Layout, diag: &mut ParseDiagnostics) -> std::result::Result<MonthlyRecord, String> {
    let row = Row {
        fields: line.split(layout.delimiter).collect(),
        layout,
    };
    let loan_id = row.raw(Field::LoanId).ok_or("missing loan_id")?;
    let period = row
        .raw(Field::Period)
        .ok_or_else(|| "missing period".to_string())?
        .parse::<Period>()
        .map_err(|e| e.to_string())?;
    let clds = row.raw(Field::Clds).map_or(Clds::Unavailable, Clds::parse);
    Ok(MonthlyRecord {
        loan_id: loan_id.to_string(),
        period,
        clds,
        current_actual_upb: numeric(&row, Field::CurrentActualUpb, diag),
        interest_bearing_upb: numeric(&row, Field::InterestBearingUpb, diag),
        current_deferred_upb: numeric(&row, Field::CurrentDeferredUpb, diag),
        current_ir: numeric(&row, Field::CurrentIr, diag),
        eltv: numeric(&row, Field::Eltv, diag),
        modification_flag: category(&row, Field::ModificationFlag, diag),
        delinquency_due_to_disaster: category(&row, Field::DelinquencyDueToDisaster, diag),
        borrower_assistance_status_code: category(&row, Field::BorrowerAssistanceStatusCode, diag),
        current_month_modification_cost: numeric(&row, Field::CurrentMonthModificationCost, diag),
        ddlpi: date(&row, Field::Ddlpi, diag),
        defect_settlement_date: date(&row, Field::DefectSettlementDate, diag),
    })
}

/// Reads every record of a headerless delimited file.
///
/// Rows without a usable loan id or period are skipped and counted; with
/// `strict` the first such row aborts with its line number. Blank lines are
/// ignored.
pub fn parse_reader<R: BufRead>(reader: R, layout: &Layout, strict: bool) -> Result<(Vec<MonthlyRecord>, ParseDiagnostics)> {
    layout.validate()?;
    let mut diag = ParseDiagnostics::default();
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        diag.rows_read += 1;
        match parse_line(line, layout, &mut diag) {
            Ok(r) => records.push(r),
            Err(message) if strict => return Err(Error::Parse { line: i + 1, message }),
            Err(message) => diag.reject(i + 1, message),
        }
    }
    Ok((records, diag))
}

pub fn parse_file(path: &std::path::Path, layout: &Layout, strict: bool) -> Result<(Vec<MonthlyRecord>, ParseDiagnostics)> {
    let file = std::fs::File::open(path)?;
    parse_reader(std::io::BufReader::new(file), layout, strict)
}
