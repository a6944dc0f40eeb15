//! Fractional-rank aggregation of model results within a cohort or across
//! the four quarterly cohorts of a year. Lower average rank is better.

use std::fmt::Write as _;
use std::str::FromStr;

use super::metrics::{mean_ranks_ascending, Metric};
use super::table::{average_trials, MetricRow};
use crate::error::{Error, Result};

/// Ranks with the largest value ranked 1; ties share the mean of their ranks.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    mean_ranks_ascending(&negated)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Cohort,
    Year,
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cohort" => Ok(Group::Cohort),
            "year" => Ok(Group::Year),
            _ => Err(Error::Config(format!("group {s:?} is neither cohort nor year"))),
        }
    }
}

/// Per-model ranks for one group. For a year, each metric's rank is the
/// model's mean pooled rank over the four quarters.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    pub group: String,
    pub models: Vec<String>,
    pub ranks: Vec<[f64; 5]>,
    pub avgr: Vec<f64>,
}

impl RankTable {
    pub fn avgr_of(&self, model: &str) -> Option<f64> {
        self.models.iter().position(|m| m == model).map(|i| self.avgr[i])
    }
}

/// One model's five metric values within a cohort.
pub type ModelMetrics = (String, [Option<f64>; 5]);

fn defined(group: &str, entries: &[ModelMetrics]) -> Result<Vec<[f64; 5]>> {
    let mut seen = std::collections::BTreeSet::new();
    entries
        .iter()
        .map(|(model, values)| {
            if !seen.insert(model) {
                return Err(Error::Data(format!("model {model} appears twice in {group}")));
            }
            let mut out = [0.0; 5];
            for (k, m) in Metric::ALL.iter().enumerate() {
                out[k] = values[k].ok_or_else(|| {
                    Error::Undefined(format!("{} of {model} in {group} is undefined; cannot rank", m.name()))
                })?;
            }
            Ok(out)
        })
        .collect()
}

pub fn avgr_cohort(cohort: &str, entries: &[ModelMetrics]) -> Result<RankTable> {
    let values = defined(cohort, entries)?;
    if values.is_empty() {
        return Err(Error::Data(format!("no models to rank in {cohort}")));
    }
    let mut ranks = vec![[0.0; 5]; values.len()];
    for k in 0..5 {
        let column: Vec<f64> = values.iter().map(|v| v[k]).collect();
        for (i, r) in fractional_ranks(&column).into_iter().enumerate() {
            ranks[i][k] = r;
        }
    }
    Ok(RankTable {
        group: cohort.to_string(),
        models: entries.iter().map(|e| e.0.clone()).collect(),
        avgr: ranks.iter().map(|r| r.iter().sum::<f64>() / 5.0).collect(),
        ranks,
    })
}

/// Pools the (model, quarter) entries of four quarters per metric and ranks
/// them together.
pub fn avgr_year(year: &str, quarters: &[(String, Vec<ModelMetrics>)]) -> Result<RankTable> {
    if quarters.len() != 4 {
        return Err(Error::Data(format!(
            "year {year} has {} quarterly cohorts, expected 4",
            quarters.len()
        )));
    }
    let models: Vec<String> = quarters[0].1.iter().map(|e| e.0.clone()).collect();
    let mut pooled: Vec<(usize, [f64; 5])> = Vec::new();
    for (cohort, entries) in quarters {
        let values = defined(cohort, entries)?;
        for ((model, _), v) in entries.iter().zip(values) {
            let i = models.iter().position(|m| m == model).ok_or_else(|| {
                Error::Data(format!("model {model} appears in {cohort} but not in {}", quarters[0].0))
            })?;
            pooled.push((i, v));
        }
        if entries.len() != models.len() {
            return Err(Error::Data(format!("{cohort} and {} rank different model sets", quarters[0].0)));
        }
    }
    let mut ranks = vec![[0.0; 5]; models.len()];
    for k in 0..5 {
        let column: Vec<f64> = pooled.iter().map(|p| p.1[k]).collect();
        for (&(i, _), r) in pooled.iter().zip(fractional_ranks(&column)) {
            ranks[i][k] += r / 4.0;
        }
    }
    Ok(RankTable {
        group: year.to_string(),
        avgr: ranks.iter().map(|r| r.iter().sum::<f64>() / 5.0).collect(),
        models,
        ranks,
    })
}

/// `"2017"` for a `"2017Q3"` cohort label.
fn year_of(cohort: &str) -> Result<&str> {
    let ok = cohort.len() == 6
        && cohort[..4].bytes().all(|b| b.is_ascii_digit())
        && matches!(&cohort[4..], "Q1" | "Q2" | "Q3" | "Q4");
    if ok {
        Ok(&cohort[..4])
    } else {
        Err(Error::Data(format!("cohort {cohort:?} is not a YYYYQn quarter label")))
    }
}

/// Averages trials, then ranks each cohort or each year. Groups come out in
/// first-seen order.
pub fn rank_rows(rows: &[MetricRow], group: Group) -> Result<Vec<RankTable>> {
    let means = average_trials(rows);
    let mut cohorts: Vec<(String, Vec<ModelMetrics>)> = Vec::new();
    for r in &means {
        let entry = (r.model.clone(), r.values);
        match cohorts.iter_mut().find(|(c, _)| *c == r.cohort) {
            Some((_, e)) => e.push(entry),
            None => cohorts.push((r.cohort.clone(), vec![entry])),
        }
    }
    match group {
        Group::Cohort => cohorts.iter().map(|(c, e)| avgr_cohort(c, e)).collect(),
        Group::Year => {
            let mut years: Vec<(String, Vec<(String, Vec<ModelMetrics>)>)> = Vec::new();
            for (c, e) in cohorts {
                let y = year_of(&c)?.to_string();
                match years.iter_mut().find(|(yy, _)| *yy == y) {
                    Some((_, q)) => q.push((c, e)),
                    None => years.push((y, vec![(c, e)])),
                }
            }
            years.iter().map(|(y, q)| avgr_year(y, q)).collect()
        }
    }
}

/// Wide layout: one row per group, one AvgR column per model.
pub fn format_avgr(tables: &[RankTable]) -> String {
    let mut models: Vec<&str> = Vec::new();
    for t in tables {
        for m in &t.models {
            if !models.contains(&m.as_str()) {
                models.push(m);
            }
        }
    }
    let mut out = format!("group,{}\n", models.join(","));
    for t in tables {
        out.push_str(&t.group);
        for m in &models {
            match t.avgr_of(m) {
                Some(v) => write!(out, ",{}", round(v)).unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

/// Long layout: every per-metric rank and the AvgR of every model.
pub fn format_ranks(tables: &[RankTable]) -> String {
    let names: Vec<String> = Metric::ALL.iter().map(|m| format!("{}_rank", m.name())).collect();
    let mut out = format!("group,model,{},avgr\n", names.join(","));
    for t in tables {
        for (i, m) in t.models.iter().enumerate() {
            write!(out, "{},{m}", t.group).unwrap();
            for r in t.ranks[i] {
                write!(out, ",{}", round(r)).unwrap();
            }
            writeln!(out, ",{}", round(t.avgr[i])).unwrap();
        }
    }
    out
}

/// Ranks are multiples of 1/40 at most, so 6 decimals print them exactly
/// without float noise.
fn round(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}
