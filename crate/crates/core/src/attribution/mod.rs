//! Shapley attribution over the flattened `[months, features]` model input:
//! exact enumeration for small games, permutation sampling at full width,
//! importance ranking with top-50 month counts, and summary-plot export.

mod shapley;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::pipeline::SampleRef;
use crate::tensor::NumArray;

pub use shapley::{exact_shapley, sampled_shapley, Explanation, MAX_EXACT_COLUMNS};

/// Training samples averaged into the background point.
pub const BACKGROUND_SAMPLES: usize = 100;
/// Size of the ranking prefix whose months are counted per feature.
pub const TOP_SLOTS: usize = 50;

/// Column-wise mean of up to `BACKGROUND_SAMPLES` rows drawn without
/// replacement using `seed`.
pub fn background_mean(rows: &[&[f64]], seed: u64) -> Result<Vec<f64>> {
    let Some(first) = rows.first() else {
        return Err(Error::Data("no rows to draw a background from".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, rows.len(), BACKGROUND_SAMPLES.min(rows.len()));
    let mut mean = vec![0.0; first.len()];
    for i in picked.iter() {
        if rows[i].len() != mean.len() {
            return Err(Error::shape("background row", &[rows[i].len()], &[mean.len()]));
        }
        for (m, v) in mean.iter_mut().zip(rows[i]) {
            *m += v;
        }
    }
    let n = picked.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Up to `count` samples to explain, half from each class where possible,
/// drawn without replacement with `seed` and returned in input order.
pub fn pick_samples(samples: &[SampleRef], count: usize, seed: u64) -> Vec<SampleRef> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == 1).collect();
    let neg: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == 0).collect();
    let want_pos = (count / 2).max(count.saturating_sub(neg.len())).min(pos.len());
    let want_neg = (count - want_pos).min(neg.len());
    let mut picked: Vec<usize> = Vec::with_capacity(want_pos + want_neg);
    for (class, n) in [(&pos, want_pos), (&neg, want_neg)] {
        picked.extend(rand::seq::index::sample(&mut rng, class.len(), n).iter().map(|k| class[k]));
    }
    picked.sort_unstable();
    picked.into_iter().map(|i| samples[i]).collect()
}

/// Value function of a model: flattened `steps * features` rows in,
/// default probabilities out.
pub fn model_value_fn(model: &Model) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_ {
    let (t, f) = (model.spec.steps, model.spec.features);
    move |rows: &[f64]| {
        let n = rows.len() / (t * f);
        let mut out = Vec::with_capacity(n);
        for chunk in rows.chunks(512 * t * f) {
            let x = NumArray::new(&[chunk.len() / (t * f), t, f], chunk.to_vec())?;
            out.extend(model.predict(&x)?);
        }
        Ok(out)
    }
}

/// Sampled explanations of many inputs. Input `i` draws its permutations
/// from stream `i` of `seed`, so results do not depend on `workers`.
pub fn explain_all<F>(
    f: &F,
    inputs: &[&[f64]],
    background: &[f64],
    permutations: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Explanation>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let one = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        shapley::sampled_with(f, inputs[i], background, permutations, &mut rng)
    };
    if workers <= 1 {
        return (0..inputs.len()).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..inputs.len()).into_par_iter().map(one).collect())
}

/// One explained sample with the unscaled input it was computed for.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleAttribution {
    pub id: String,
    pub explanation: Explanation,
    pub raw: Vec<f64>,
}

/// Explanations over a shared `[steps, features]` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributionMatrix {
    pub model_tag: String,
    pub steps: usize,
    pub feature_names: Vec<String>,
    pub samples: Vec<SampleAttribution>,
}

impl AttributionMatrix {
    pub fn columns(&self) -> usize {
        self.steps * self.feature_names.len()
    }

    fn check(&self) -> Result<()> {
        let d = self.columns();
        for s in &self.samples {
            let e = &s.explanation;
            if e.values.len() != d || e.se.len() != d || s.raw.len() != d {
                return Err(Error::shape("attribution sample", &[e.values.len(), s.raw.len()], &[d, d]));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnImportance {
    /// `month * features + feature`, months counted from 0.
    pub column: usize,
    pub month: usize,
    pub feature: String,
    /// Mean absolute Shapley value over the explained samples.
    pub importance: f64,
    /// 1 is most important.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceReport {
    /// In column order.
    pub columns: Vec<ColumnImportance>,
    /// Per base feature, in feature order: months among the top slots.
    pub month_counts: Vec<(String, usize)>,
}

impl ImportanceReport {
    /// Columns from rank 1 down.
    pub fn ranked(&self) -> Vec<&ColumnImportance> {
        let mut v: Vec<&ColumnImportance> = self.columns.iter().collect();
        v.sort_by_key(|c| c.rank);
        v
    }

    /// Features present in the top slots, most months first; ties keep
    /// feature order.
    pub fn format_counts(&self) -> String {
        let mut rows: Vec<&(String, usize)> = self.month_counts.iter().filter(|(_, n)| *n > 0).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1));
        let mut out = String::from("feature,months\n");
        for (name, n) in rows {
            out.push_str(&format!("{name},{n}\n"));
        }
        out
    }

    pub fn format_ranking(&self) -> String {
        let mut out = String::from("rank,month,feature,importance\n");
        for c in self.ranked() {
            out.push_str(&format!("{},{},{},{:.9e}\n", c.rank, c.month + 1, c.feature, c.importance));
        }
        out
    }
}

/// Ranks columns by mean |value|. Equal importance goes to the lower column
/// index, which makes all-zero attributions rank in column order. Month
/// counts only consider top columns with nonzero importance.
pub fn importance_report(set: &AttributionMatrix) -> Result<ImportanceReport> {
    set.check()?;
    let f = set.feature_names.len();
    let d = set.columns();
    let n = set.samples.len().max(1) as f64;
    let mut importance = vec![0.0; d];
    for s in &set.samples {
        for (m, v) in importance.iter_mut().zip(&s.explanation.values) {
            *m += v.abs();
        }
    }
    importance.iter_mut().for_each(|m| *m /= n);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    let mut rank = vec![0; d];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r + 1;
    }
    let columns = (0..d)
        .map(|c| ColumnImportance {
            column: c,
            month: c / f,
            feature: set.feature_names[c % f].clone(),
            importance: importance[c],
            rank: rank[c],
        })
        .collect();
    let mut counts = vec![0; f];
    // A column with no attribution at all holds no slot, however it ranks.
    for &c in order.iter().take(TOP_SLOTS).filter(|&&c| importance[c] > 0.0) {
        counts[c % f] += 1;
    }
    Ok(ImportanceReport {
        columns,
        month_counts: set.feature_names.iter().cloned().zip(counts).collect(),
    })
}

pub const SUMMARY_HEADER: &str = "sample_id,month,feature,shapley,raw,se";

/// The point cloud of a summary plot: one row per sample and column, with
/// months counted from 1.
pub fn write_summary<W: Write>(mut w: W, set: &AttributionMatrix) -> Result<()> {
    set.check()?;
    let f = set.feature_names.len();
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in &set.samples {
        for c in 0..set.columns() {
            writeln!(
                w,
                "{},{},{},{:.12e},{:.12e},{:.6e}",
                s.id,
                c / f + 1,
                set.feature_names[c % f],
                s.explanation.values[c],
                s.raw[c],
                s.explanation.se[c]
            )?;
        }
    }
    Ok(())
}

/// What produced an attribution file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionManifest {
    pub model_checkpoint: String,
    pub model_tag: String,
    pub background_seed: u64,
    pub background_samples: usize,
    pub permutations: usize,
    pub permutation_seed: u64,
    pub samples: usize,
}

#[cfg(test)]
mod tests;
