//! Central finite-difference verification of tape gradients.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Bound, ParameterSet, Tape, Var};
use crate::error::Result;

/// Relative error as used by every gradient check in this crate.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    pub eps: f64,
    /// Coordinates sampled per parameter; parameters smaller than this are
    /// checked exhaustively.
    pub samples_per_param: usize,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            samples_per_param: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Maximum relative error per parameter name.
    pub max_rel_error: BTreeMap<String, f64>,
    pub coordinates_checked: usize,
}

impl GradCheckReport {
    pub fn worst(&self) -> f64 {
        self.max_rel_error.values().copied().fold(0.0, f64::max)
    }
}

/// Compares the tape gradient of `forward` against central differences.
///
/// `forward` builds a scalar loss on the given tape from the bound
/// parameters; it must be deterministic.
pub fn grad_check<F>(forward: F, params: &ParameterSet, config: &GradCheckConfig) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &Bound) -> Result<Var>,
{
    let eval = |p: &ParameterSet| -> Result<f64> {
        let mut tape = Tape::new();
        let bound = p.bind(&mut tape);
        let loss = forward(&mut tape, &bound)?;
        Ok(tape.value(loss).data()[0])
    };

    let mut tape = Tape::new();
    let bound = params.bind(&mut tape);
    let loss = forward(&mut tape, &bound)?;
    let grads = tape.backward(loss)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut work = params.clone();
    let mut report = GradCheckReport {
        max_rel_error: BTreeMap::new(),
        coordinates_checked: 0,
    };
    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in names {
        let n = params.get(&name).unwrap().len();
        let coords: Vec<usize> = if n <= config.samples_per_param {
            (0..n).collect()
        } else {
            sample(&mut rng, n, config.samples_per_param).into_vec()
        };
        let mut worst: f64 = 0.0;
        for c in coords {
            let orig = params.get(&name).unwrap().data()[c];
            work.get_mut(&name).unwrap().data_mut()[c] = orig + config.eps;
            let plus = eval(&work)?;
            work.get_mut(&name).unwrap().data_mut()[c] = orig - config.eps;
            let minus = eval(&work)?;
            work.get_mut(&name).unwrap().data_mut()[c] = orig;
            let numeric = (plus - minus) / (2.0 * config.eps);
            let analytic = grads[&name].data()[c];
            worst = worst.max(relative_error(analytic, numeric));
            report.coordinates_checked += 1;
        }
        report.max_rel_error.insert(name, worst);
    }
    Ok(report)
}
