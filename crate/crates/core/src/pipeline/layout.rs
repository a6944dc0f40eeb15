//! Column layout of a delimited performance file and the category sets used
//! for one-hot encoding.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every field of a monthly performance record the pipeline understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    LoanId,
    Period,
    Clds,
    CurrentActualUpb,
    InterestBearingUpb,
    CurrentDeferredUpb,
    CurrentIr,
    Eltv,
    ModificationFlag,
    DelinquencyDueToDisaster,
    BorrowerAssistanceStatusCode,
    CurrentMonthModificationCost,
    Ddlpi,
    DefectSettlementDate,
}

impl Field {
    /// Order of the compact layout written by `synth` and `ingest`.
    pub const ALL: [Field; 14] = [
        Self::LoanId,
        Self::Period,
        Self::Clds,
        Self::CurrentActualUpb,
        Self::InterestBearingUpb,
        Self::CurrentDeferredUpb,
        Self::CurrentIr,
        Self::Eltv,
        Self::ModificationFlag,
        Self::DelinquencyDueToDisaster,
        Self::BorrowerAssistanceStatusCode,
        Self::CurrentMonthModificationCost,
        Self::Ddlpi,
        Self::DefectSettlementDate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LoanId => "loan_id",
            Self::Period => "period",
            Self::Clds => "clds",
            Self::CurrentActualUpb => "current_actual_upb",
            Self::InterestBearingUpb => "interest_bearing_upb",
            Self::CurrentDeferredUpb => "current_deferred_upb",
            Self::CurrentIr => "current_ir",
            Self::Eltv => "eltv",
            Self::ModificationFlag => "modification_flag",
            Self::DelinquencyDueToDisaster => "delinquency_due_to_disaster",
            Self::BorrowerAssistanceStatusCode => "borrower_assistance_status_code",
            Self::CurrentMonthModificationCost => "current_month_modification_cost",
            Self::Ddlpi => "ddlpi",
            Self::DefectSettlementDate => "defect_settlement_date",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown field {s:?}")))
    }
}

/// Levels of one categorical field. Values that are empty or not listed map
/// to `missing`, which must itself be one of the levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySet {
    pub levels: Vec<String>,
    pub missing: String,
}

impl CategorySet {
    fn new(levels: &[&str], missing: &str) -> Self {
        Self {
            levels: levels.iter().map(|s| s.to_string()).collect(),
            missing: missing.to_string(),
        }
    }

    /// Index of the level `value` encodes to, and whether it was a listed
    /// level (as opposed to falling back to the missing level).
    pub fn encode(&self, value: Option<&str>) -> (usize, bool) {
        let missing = self.levels.iter().position(|l| *l == self.missing).unwrap_or(0);
        match value {
            Some(v) => match self.levels.iter().position(|l| l == v) {
                Some(i) => (i, true),
                None => (missing, false),
            },
            None => (missing, true),
        }
    }
}

/// Column positions plus category sets; serialized as TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Zero-based column index per field. Fields absent here read as missing,
    /// except `loan_id`, `period` and `clds` which are required.
    pub columns: BTreeMap<Field, usize>,
    pub modification_flag: CategorySet,
    pub delinquency_due_to_disaster: CategorySet,
    pub borrower_assistance_status_code: CategorySet,
}

fn default_delimiter() -> char {
    '|'
}

impl Default for Layout {
    fn default() -> Self {
        Self::compact()
    }
}

impl Layout {
    /// The 14-column layout in [`Field::ALL`] order.
    pub fn compact() -> Self {
        Self {
            delimiter: '|',
            columns: Field::ALL.iter().enumerate().map(|(i, f)| (*f, i)).collect(),
            modification_flag: CategorySet::new(&["Y", "P", "N"], "N"),
            delinquency_due_to_disaster: CategorySet::new(&["Y", "NAN"], "NAN"),
            borrower_assistance_status_code: CategorySet::new(&["F", "R", "T", "NAN"], "NAN"),
        }
    }

    /// Positions in the 32-column monthly performance file published with
    /// the single-family loan-level dataset.
    pub fn freddie_mac() -> Self {
        let columns = [
            (Field::LoanId, 0),
            (Field::Period, 1),
            (Field::CurrentActualUpb, 2),
            (Field::Clds, 3),
            (Field::DefectSettlementDate, 6),
            (Field::ModificationFlag, 7),
            (Field::CurrentIr, 10),
            (Field::CurrentDeferredUpb, 11),
            (Field::Ddlpi, 12),
            (Field::Eltv, 25),
            (Field::DelinquencyDueToDisaster, 28),
            (Field::BorrowerAssistanceStatusCode, 29),
            (Field::CurrentMonthModificationCost, 30),
            (Field::InterestBearingUpb, 31),
        ];
        Self {
            columns: columns.into_iter().collect(),
            ..Self::compact()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "compact" => Ok(Self::compact()),
            "freddie_mac" => Ok(Self::freddie_mac()),
            _ => Err(Error::Config(format!("unknown layout preset {name:?}"))),
        }
    }

    /// A preset name or a path to a TOML layout file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if Path::new(spec).is_file() {
            Self::from_toml(&std::fs::read_to_string(spec)?)
        } else {
            Self::preset(spec)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let layout: Self = toml::from_str(text).map_err(|e| Error::Config(format!("layout: {e}")))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("layout serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for f in [Field::LoanId, Field::Period, Field::Clds] {
            if !self.columns.contains_key(&f) {
                return Err(Error::Config(format!("layout lacks required column {f}")));
            }
        }
        for (name, set) in self.category_sets() {
            if set.levels.is_empty() || !set.levels.contains(&set.missing) {
                return Err(Error::Config(format!(
                    "{name}: missing level {:?} must be one of {:?}",
                    set.missing, set.levels
                )));
            }
        }
        Ok(())
    }

    pub fn category_sets(&self) -> [(Field, &CategorySet); 3] {
        [
            (Field::ModificationFlag, &self.modification_flag),
            (Field::DelinquencyDueToDisaster, &self.delinquency_due_to_disaster),
            (Field::BorrowerAssistanceStatusCode, &self.borrower_assistance_status_code),
        ]
    }

    /// Number of fields a row must have to cover every mapped column.
    pub fn min_columns(&self) -> usize {
        self.columns.values().max().map_or(0, |m| m + 1)
    }
}
