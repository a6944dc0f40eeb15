use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calendar month, ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Period {
    pub year: u16,
    pub month: u8,
}

impl Period {
    pub fn new(year: u16, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    /// Months since year 0, so consecutive months differ by one.
    pub fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_index(index: i64) -> Self {
        Self {
            year: index.div_euclid(12) as u16,
            month: (index.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_index(self.index() + months)
    }

    /// `"2009Q1"`-style cohort label of the quarter containing this month.
    pub fn quarter_label(self) -> String {
        format!("{}Q{}", self.year, (self.month - 1) / 3 + 1)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = Error;

    /// Accepts `YYYYMM`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 6 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Data(format!("period {s:?} is not YYYYMM")));
        }
        Self::new(s[..4].parse().unwrap(), s[4..].parse().unwrap())
    }
}

impl TryFrom<String> for Period {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Period> for String {
    fn from(p: Period) -> String {
        p.to_string()
    }
}

/// Current loan delinquency status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clds {
    /// Whole months delinquent.
    Months(u32),
    /// Non-numeric code such as `RA`, or an empty field.
    Unavailable,
}

impl Clds {
    pub fn parse(s: &str) -> Self {
        s.trim().parse().map(Self::Months).unwrap_or(Self::Unavailable)
    }

    pub fn is_current(self) -> bool {
        self == Self::Months(0)
    }

    /// Three or more months delinquent.
    pub fn is_default(self) -> bool {
        matches!(self, Self::Months(m) if m >= 3)
    }
}

impl fmt::Display for Clds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Months(m) => write!(f, "{m}"),
            Self::Unavailable => f.write_str("RA"),
        }
    }
}

/// One loan-month of the performance file.
#[derive(Clone, Debug, PartialEq)]
pub struct MonthlyRecord {
    pub loan_id: String,
    pub period: Period,
    pub clds: Clds,
    pub current_actual_upb: Option<f64>,
    pub interest_bearing_upb: Option<f64>,
    pub current_deferred_upb: Option<f64>,
    pub current_ir: Option<f64>,
    pub eltv: Option<f64>,
    pub modification_flag: Option<String>,
    pub delinquency_due_to_disaster: Option<String>,
    pub borrower_assistance_status_code: Option<String>,
    pub current_month_modification_cost: Option<f64>,
    pub ddlpi: Option<Period>,
    pub defect_settlement_date: Option<Period>,
}

impl MonthlyRecord {
    /// A current record with every optional field missing.
    pub fn bare(loan_id: impl Into<String>, period: Period, clds: Clds) -> Self {
        Self {
            loan_id: loan_id.into(),
            period,
            clds,
            current_actual_upb: None,
            interest_bearing_upb: None,
            current_deferred_upb: None,
            current_ir: None,
            eltv: None,
            modification_flag: None,
            delinquency_due_to_disaster: None,
            borrower_assistance_status_code: None,
            current_month_modification_cost: None,
            ddlpi: None,
            defect_settlement_date: None,
        }
    }

    /// The compact pipe-delimited line for this record (no newline).
    pub fn to_compact_line(&self, delimiter: char) -> String {
        fn num(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.2}")).unwrap_or_default()
        }
        fn text(v: &Option<String>) -> String {
            v.clone().unwrap_or_default()
        }
        fn date(v: Option<Period>) -> String {
            v.map(|p| p.to_string()).unwrap_or_default()
        }
        let fields = [
            self.loan_id.clone(),
            self.period.to_string(),
            self.clds.to_string(),
            num(self.current_actual_upb),
            num(self.interest_bearing_upb),
            num(self.current_deferred_upb),
            self.current_ir.map(|x| format!("{x:.3}")).unwrap_or_default(),
            self.eltv.map(|x| format!("{x:.2}")).unwrap_or_default(),
            text(&self.modification_flag),
            text(&self.delinquency_due_to_disaster),
            text(&self.borrower_assistance_status_code),
            num(self.current_month_modification_cost),
            date(self.ddlpi),
            date(self.defect_settlement_date),
        ];
        fields.join(&delimiter.to_string())
    }
}
