//! Synthetic loan-performance cohorts with a plantable default signal.
//!
//! Every loan amortizes with noisy principal payments. Loans chosen to
//! default walk through delinquency codes 1, 2, 3 and keep worsening until
//! the record ends. In the months before that ramp their principal payments
//! shrink toward zero and their loan-to-value drifts up, scaled by the signal
//! strength; at strength zero the two classes are indistinguishable before
//! the ramp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Clds, MonthlyRecord, Period};

/// Months of precursor before the first delinquent month.
pub const PRECURSOR_MONTHS: usize = 6;
/// Delinquent months from the first missed payment to default (codes 1, 2, 3).
const RAMP: usize = 3;
/// Shortest defaulting loan: the default month must leave room for a full
/// window ending on it.
const MIN_DEFAULT_MONTH: usize = 18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub loans: usize,
    pub min_months: usize,
    pub max_months: usize,
    /// Share of non-defaulting loans at least one window long.
    pub long_fraction: f64,
    pub default_rate: f64,
    pub signal: f64,
    pub seed: u64,
    /// First month of the origination quarter.
    pub start: Period,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            loans: 5000,
            min_months: 6,
            max_months: 60,
            long_fraction: 0.9,
            default_rate: 0.05,
            signal: 0.8,
            seed: 7,
            start: Period { year: 2017, month: 1 },
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.loans == 0 {
            return bad("loan count must be positive".into());
        }
        if !(self.default_rate > 0.0 && self.default_rate < 1.0) {
            return bad(format!("default rate {} must lie strictly between 0 and 1", self.default_rate));
        }
        if !(0.0..=1.0).contains(&self.signal) {
            return bad(format!("signal strength {} must lie in [0, 1]", self.signal));
        }
        if !(0.0..=1.0).contains(&self.long_fraction) {
            return bad(format!("long fraction {} must lie in [0, 1]", self.long_fraction));
        }
        let shortest_default = MIN_DEFAULT_MONTH + 1 + RAMP;
        if self.min_months == 0 || self.min_months > self.max_months || self.max_months < shortest_default {
            return bad(format!(
                "length range [{}, {}] must be non-empty and reach {shortest_default} months",
                self.min_months, self.max_months
            ));
        }
        if self.long_fraction < 1.0 && self.min_months > 18 {
            return bad("short loans requested but min_months exceeds 18".into());
        }
        Ok(())
    }
}

/// Loan id of the `i`-th generated loan.
pub fn loan_id(i: usize) -> String {
    format!("S{i:06}")
}

/// All records, ordered by loan then month. Each loan draws from its own
/// stream, so a loan's records do not depend on how many loans precede it.
pub fn generate(config: &SynthConfig) -> Result<Vec<MonthlyRecord>> {
    config.validate()?;
    Ok((0..config.loans).flat_map(|i| generate_loan(config, i)).collect())
}

fn round_to(x: f64, places: i32) -> f64 {
    let k = 10f64.powi(places);
    (x * k).round() / k
}

/// Scheduled monthly payment of a fixed-rate mortgage.
fn annuity(principal: f64, monthly_rate: f64, term: usize) -> f64 {
    principal * monthly_rate / (1.0 - (1.0 + monthly_rate).powi(-(term as i32)))
}

pub fn generate_loan(config: &SynthConfig, index: usize) -> Vec<MonthlyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let noise = Normal::new(0.0, 1.0).unwrap();

    let defaults = rng.gen_bool(config.default_rate);
    let long_min = (MIN_DEFAULT_MONTH + 1).max(config.min_months);
    let length = if defaults {
        rng.gen_range((MIN_DEFAULT_MONTH + 1 + RAMP).max(config.min_months)..=config.max_months)
    } else if rng.gen_bool(config.long_fraction) {
        rng.gen_range(long_min..=config.max_months)
    } else {
        rng.gen_range(config.min_months..=18.min(config.max_months))
    };
    // Default month and the worsening tail after it.
    let default_month = if defaults {
        let tail = rng.gen_range(0..=(length - 1 - MIN_DEFAULT_MONTH).min(RAMP));
        Some(length - 1 - tail)
    } else {
        None
    };

    let start = config.start.offset(rng.gen_range(0..3));
    let original = round_to(rng.gen_range(150_000.0..250_000.0), 2);
    let rate = round_to(rng.gen_range(3.0..5.0), 3);
    let monthly = rate / 1200.0;
    let payment = annuity(original, monthly, 360);
    let ltv0 = rng.gen_range(60.0..95.0);
    let house = original / (ltv0 / 100.0);
    let modified_from = if rng.gen_bool(0.02) {
        Some(rng.gen_range(0..length))
    } else {
        None
    };

    let mut upb: f64 = original;
    let mut drift = 0.0;
    let mut out = Vec::with_capacity(length);
    for t in 0..length {
        let clds = match default_month {
            Some(d) if t + RAMP > d => (t + RAMP - d) as u32,
            _ => 0,
        };
        // Precursor strength ramps from 1/PRECURSOR_MONTHS up to 1 at the
        // month before the first missed payment.
        let precursor = match default_month {
            Some(d) if t + RAMP < d && t + RAMP + PRECURSOR_MONTHS >= d => {
                (t + RAMP + PRECURSOR_MONTHS + 1 - d) as f64 / PRECURSOR_MONTHS as f64
            }
            _ => 0.0,
        };
        let scheduled = payment - upb * monthly;
        let eps = noise.sample(&mut rng);
        let eltv_eps = noise.sample(&mut rng);
        if t > 0 {
            let principal = if clds > 0 {
                0.0
            } else {
                scheduled * (1.0 - config.signal * precursor) * (1.0 + 0.1 * eps)
            };
            upb = round_to((upb - principal.max(0.0)).max(0.0), 2);
        }
        drift += config.signal * precursor * 2.0;
        let eltv = round_to(100.0 * upb / house + drift + 0.3 * eltv_eps, 2);

        let mut r = MonthlyRecord::bare(loan_id(index), start.offset(t as i64), Clds::Months(clds));
        r.current_actual_upb = Some(upb);
        r.interest_bearing_upb = Some(upb);
        r.current_deferred_upb = Some(0.0);
        r.current_ir = Some(rate);
        r.eltv = Some(eltv);
        r.current_month_modification_cost = Some(0.0);
        r.modification_flag = Some(if modified_from.is_some_and(|m| t >= m) { "Y" } else { "N" }.into());
        if clds > 0 {
            r.borrower_assistance_status_code = Some("F".into());
            r.ddlpi = Some(start.offset(default_month.unwrap() as i64 - RAMP as i64));
        }
        out.push(r);
    }
    out
}
