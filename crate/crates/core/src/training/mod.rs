//! Mini-batch training with Adam on binary cross-entropy, and the repeated
//! trial protocol: trial `k` reseeds initialization, undersampling, shuffling
//! and dropout with `seed + k`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{evaluate, MetricsReport, THRESHOLD};
use crate::models::{Model, ModelSpec};
use crate::pipeline::{undersample, CohortDataset, SampleRef};
use crate::tensor::{NumArray, ParameterSet, Tape};

/// Read access to encoded samples. Training and evaluation fetch every input
/// through this trait, which lets tests observe exactly what they touch.
pub trait SampleStore: Sync {
    /// Inputs `[B, T, F]` and labels for the given samples, in order.
    fn batch(&self, samples: &[SampleRef]) -> (NumArray, Vec<f64>);
}

impl SampleStore for CohortDataset {
    fn batch(&self, samples: &[SampleRef]) -> (NumArray, Vec<f64>) {
        CohortDataset::batch(self, samples)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop after this many epochs without a lower mean training loss.
    pub patience: Option<usize>,
    /// Overrides the model spec's dropout rate while training.
    pub dropout: f64,
    /// Batch size used when scoring samples; has no effect on results.
    pub eval_batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            patience: None,
            dropout: 0.1,
            eval_batch_size: 512,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.epochs == 0 || self.batch_size == 0 || self.eval_batch_size == 0 {
            return bad("epochs and batch sizes must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return bad("moment decays must lie in [0, 1) and epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.patience == Some(0) {
            return bad("patience must be positive when set");
        }
        Ok(())
    }
}

struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    lr: f64,
    step: i32,
    moments: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
}

impl Adam {
    fn new(config: &TrainConfig) -> Self {
        Self {
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
            lr: config.learning_rate,
            step: 0,
            moments: BTreeMap::new(),
        }
    }

    fn update(&mut self, params: &mut ParameterSet, grads: &BTreeMap<String, NumArray>) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (name, value) in params.iter_mut() {
            let Some(g) = grads.get(name) else { continue };
            let (m, v) = self
                .moments
                .entry(name.to_string())
                .or_insert_with(|| (vec![0.0; g.len()], vec![0.0; g.len()]));
            for (((p, &gi), mi), vi) in value.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let delta = self.lr * (*mi / c1) / ((*vi / c2).sqrt() + self.epsilon);
                if delta != 0.0 {
                    *p -= delta;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    /// Mean batch loss per completed epoch.
    pub epoch_loss: Vec<f64>,
}

impl TrainHistory {
    /// One `key=value` line per step, stable across runs with equal inputs.
    pub fn log_lines(&self, trial: Option<usize>) -> String {
        let mut out = String::new();
        for s in &self.steps {
            if let Some(k) = trial {
                write!(out, "trial={k} ").unwrap();
            }
            writeln!(out, "seed={} epoch={} step={} loss={:.12e}", self.seed, s.epoch, s.step, s.loss).unwrap();
        }
        out
    }
}

/// Trains `model` in place on `samples`, which should already be balanced.
/// The seed drives shuffling and dropout masks.
pub fn train<S: SampleStore + ?Sized>(
    model: &mut Model,
    store: &S,
    samples: &[SampleRef],
    config: &TrainConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Data("no training samples".into()));
    }
    model.spec.dropout = config.dropout;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
    dropout_rng.set_stream(1);
    let mut adam = Adam::new(config);
    let mut history = TrainHistory {
        seed: config.seed,
        ..Default::default()
    };
    let mut order: Vec<SampleRef> = samples.to_vec();
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut step = 0;
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let (x, y) = store.batch(chunk);
            let mut tape = Tape::new();
            let p = model.params.bind(&mut tape);
            let xv = tape.constant(x);
            let at = |what: String| {
                Error::Training(format!(
                    "{what} at epoch {epoch}, batch {b} (step {step}, first sample run {} offset {})",
                    chunk[0].run, chunk[0].offset
                ))
            };
            let loss = model
                .loss(&mut tape, &p, xv, &y, Some(&mut dropout_rng))
                .map_err(|e| at(e.to_string()))?;
            let value = tape.value(loss).data()[0];
            if !value.is_finite() {
                return Err(at(format!("non-finite loss {value}")));
            }
            let grads = tape.backward(loss).map_err(|e| at(e.to_string()))?;
            adam.update(&mut model.params, &grads);
            log::trace!("seed={} epoch={epoch} step={step} loss={value:.6}", config.seed);
            history.steps.push(StepRecord { epoch, step, loss: value });
            total += value;
            batches += 1;
            step += 1;
        }
        let mean = total / batches as f64;
        log::debug!("seed={} epoch={epoch} mean_loss={mean:.6}", config.seed);
        history.epoch_loss.push(mean);
        if let Some(patience) = config.patience {
            if mean < best {
                best = mean;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    break;
                }
            }
        }
    }
    Ok(history)
}

/// Default probabilities for `samples`, in order.
pub fn predict<S: SampleStore + ?Sized>(
    model: &Model,
    store: &S,
    samples: &[SampleRef],
    batch_size: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(batch_size.max(1)) {
        let (x, _) = store.batch(chunk);
        out.extend(model.predict(&x)?);
    }
    Ok(out)
}

pub fn evaluate_model<S: SampleStore + ?Sized>(
    model: &Model,
    store: &S,
    samples: &[SampleRef],
    batch_size: usize,
) -> Result<MetricsReport> {
    let scores = predict(model, store, samples, batch_size)?;
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    evaluate(&scores, &labels, THRESHOLD)
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub report: MetricsReport,
    pub history: TrainHistory,
    pub model: Model,
}

#[derive(Clone, Debug)]
pub struct TrialSet {
    pub trials: Vec<TrialResult>,
}

impl TrialSet {
    /// Per-metric mean over trials; undefined if any trial left it undefined.
    pub fn mean(&self) -> [Option<f64>; 5] {
        let n = self.trials.len() as f64;
        let mut out = [Some(0.0); 5];
        for t in &self.trials {
            for (o, v) in out.iter_mut().zip(t.report.values()) {
                *o = o.zip(v).map(|(a, b)| a + b);
            }
        }
        out.map(|v| v.map(|x| x / n))
    }

    /// Sample standard deviation of one metric over trials.
    pub fn std(&self, metric: crate::evaluation::Metric) -> Option<f64> {
        let values: Option<Vec<f64>> = self.trials.iter().map(|t| t.report.get(metric)).collect();
        let values = values?;
        if values.len() < 2 {
            return Some(0.0);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
    }
}

/// Runs one trial: build with `seed`, balance the training samples with
/// `seed`, train with `seed`, then score the test samples.
pub fn run_trial<S: SampleStore + ?Sized>(
    spec: &ModelSpec,
    store: &S,
    train_samples: &[SampleRef],
    test_samples: &[SampleRef],
    config: &TrainConfig,
    index: usize,
) -> Result<TrialResult> {
    let seed = config.seed.wrapping_add(index as u64);
    let wrap = |e: Error| Error::Training(format!("trial {index} (seed {seed}): {e}"));
    let mut spec = spec.clone();
    spec.seed = seed;
    let mut model = Model::build(spec).map_err(wrap)?;
    let balanced = undersample(train_samples, seed).map_err(wrap)?;
    let trial_config = TrainConfig {
        seed,
        ..config.clone()
    };
    let history = train(&mut model, store, &balanced, &trial_config).map_err(wrap)?;
    let report = evaluate_model(&model, store, test_samples, config.eval_batch_size).map_err(wrap)?;
    Ok(TrialResult {
        index,
        seed,
        report,
        history,
        model,
    })
}

/// `n` independent trials spread over `workers` threads. Results do not
/// depend on the worker count.
pub fn run_trials<S: SampleStore + ?Sized>(
    spec: &ModelSpec,
    store: &S,
    train_samples: &[SampleRef],
    test_samples: &[SampleRef],
    config: &TrainConfig,
    n: usize,
    workers: usize,
) -> Result<TrialSet> {
    if n == 0 {
        return Err(Error::Config("trial count must be at least 1".into()));
    }
    config.validate()?;
    let run = |k| run_trial(spec, store, train_samples, test_samples, config, k);
    let trials: Result<Vec<TrialResult>> = if workers <= 1 {
        (0..n).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(run).collect())
    };
    Ok(TrialSet { trials: trials? })
}
