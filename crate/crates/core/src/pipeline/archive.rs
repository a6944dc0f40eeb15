//! On-disk cohort archive: a binary array container, a TOML manifest, the
//! loan id list and a per-sample provenance table.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{CohortDataset, EncodedRun, PipelineConfig, PipelineDiagnostics, SampleRef, ScalingStats};
use super::layout::Layout;
use super::parse::ParseDiagnostics;
use super::record::Period;
use super::summary::CohortSummary;
use crate::error::{Error, Result};
use crate::tensor::{checkpoint, NumArray, ParameterSet};

pub const ARRAYS_FILE: &str = "samples.reseb";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const LOANS_FILE: &str = "loans.txt";
pub const PROVENANCE_FILE: &str = "samples.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub cohort: String,
    pub features: usize,
    pub feature_names: Vec<String>,
    pub train_samples: usize,
    pub train_positives: usize,
    pub test_samples: usize,
    pub test_positives: usize,
    pub balanced_test: bool,
    pub pipeline: PipelineConfig,
    pub scaling: ScalingStats,
    pub diagnostics: PipelineDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<CohortSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse: Option<ParseDiagnostics>,
    pub layout: Layout,
}

impl CohortManifest {
    pub fn new(dataset: &CohortDataset, config: &PipelineConfig, layout: &Layout, diagnostics: PipelineDiagnostics) -> Self {
        let positives = |s: &[SampleRef]| s.iter().filter(|x| x.label == 1).count();
        Self {
            cohort: dataset.cohort.clone(),
            features: dataset.features(),
            feature_names: dataset.feature_names.clone(),
            train_samples: dataset.train.len(),
            train_positives: positives(&dataset.train),
            test_samples: dataset.test.len(),
            test_positives: positives(&dataset.test),
            balanced_test: dataset.balanced_test,
            pipeline: config.clone(),
            scaling: dataset.scaling.clone(),
            diagnostics,
            summary: None,
            parse: None,
            layout: layout.clone(),
        }
    }
}

fn vector(values: impl Iterator<Item = f64>) -> NumArray {
    let v: Vec<f64> = values.collect();
    NumArray::new(&[v.len()], v).expect("finite index values")
}

fn put_samples(arrays: &mut ParameterSet, prefix: &str, samples: &[SampleRef]) -> Result<()> {
    arrays.insert(format!("{prefix}.run"), vector(samples.iter().map(|s| s.run as f64)))?;
    arrays.insert(format!("{prefix}.offset"), vector(samples.iter().map(|s| s.offset as f64)))?;
    arrays.insert(format!("{prefix}.label"), vector(samples.iter().map(|s| s.label as f64)))
}

fn get<'a>(arrays: &'a ParameterSet, name: &str) -> Result<&'a [f64]> {
    arrays
        .get(name)
        .map(NumArray::data)
        .ok_or_else(|| Error::Format(format!("archive lacks array {name}")))
}

fn get_samples(arrays: &ParameterSet, prefix: &str, runs: &[EncodedRun], width: usize) -> Result<Vec<SampleRef>> {
    let run = get(arrays, &format!("{prefix}.run"))?;
    let offset = get(arrays, &format!("{prefix}.offset"))?;
    let label = get(arrays, &format!("{prefix}.label"))?;
    if run.len() != offset.len() || run.len() != label.len() {
        return Err(Error::Format(format!("{prefix} sample arrays differ in length")));
    }
    (0..run.len())
        .map(|i| {
            let s = SampleRef {
                run: run[i] as u32,
                offset: offset[i] as u32,
                label: label[i] as u8,
            };
            let months = runs.get(s.run as usize).map(|r| r.months.len() / width);
            match months {
                Some(m) if s.offset as usize + super::windows::INPUT_MONTHS <= m && s.label <= 1 => Ok(s),
                _ => Err(Error::Format(format!("{prefix} sample {i} points outside the stored months"))),
            }
        })
        .collect()
}

pub fn write_archive(dir: &Path, dataset: &CohortDataset, manifest: &CohortManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let f = dataset.features();
    let total: usize = dataset.runs.iter().map(|r| r.months.len() / f).sum();
    let mut months = Vec::with_capacity(total * f);
    let mut starts = Vec::with_capacity(dataset.runs.len());
    for r in &dataset.runs {
        starts.push((months.len() / f) as f64);
        months.extend_from_slice(&r.months);
    }
    let mut arrays = ParameterSet::new();
    arrays.insert("months", NumArray::new(&[total, f], months)?)?;
    arrays.insert("runs.start", vector(starts.into_iter()))?;
    arrays.insert("runs.len", vector(dataset.runs.iter().map(|r| (r.months.len() / f) as f64)))?;
    arrays.insert("runs.loan", vector(dataset.runs.iter().map(|r| r.loan as f64)))?;
    arrays.insert("runs.first_period", vector(dataset.runs.iter().map(|r| r.first_period.index() as f64)))?;
    put_samples(&mut arrays, "train", &dataset.train)?;
    put_samples(&mut arrays, "test", &dataset.test)?;
    arrays.insert("scaling.mean", vector(dataset.scaling.mean.iter().copied()))?;
    arrays.insert("scaling.std", vector(dataset.scaling.std.iter().copied()))?;
    checkpoint::save(&dir.join(ARRAYS_FILE), &arrays)?;

    let text = toml::to_string(manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text)?;

    let mut loans = String::new();
    for id in &dataset.loan_ids {
        loans.push_str(id);
        loans.push('\n');
    }
    std::fs::write(dir.join(LOANS_FILE), loans)?;

    let mut prov = String::from("split,index,loan_id,start_period,label\n");
    for (split, set) in [("train", &dataset.train), ("test", &dataset.test)] {
        for (i, s) in set.iter().enumerate() {
            writeln!(prov, "{split},{i},{},{},{}", dataset.loan_id(s), dataset.start_period(s), s.label).unwrap();
        }
    }
    std::fs::write(dir.join(PROVENANCE_FILE), prov)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<CohortManifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", MANIFEST_FILE)))
}

pub fn read_archive(dir: &Path) -> Result<(CohortDataset, CohortManifest)> {
    let manifest = read_manifest(dir)?;
    let arrays = checkpoint::load(&dir.join(ARRAYS_FILE))?;
    let loan_ids: Vec<String> = std::fs::read_to_string(dir.join(LOANS_FILE))?
        .lines()
        .map(str::to_string)
        .collect();
    let f = manifest.features;
    let months = arrays
        .get("months")
        .ok_or_else(|| Error::Format("archive lacks array months".into()))?;
    if months.rank() != 2 || months.shape()[1] != f {
        return Err(Error::Format(format!(
            "months array has shape {:?}, expected [_, {f}]",
            months.shape()
        )));
    }
    let (start, len, loan, first) = (
        get(&arrays, "runs.start")?,
        get(&arrays, "runs.len")?,
        get(&arrays, "runs.loan")?,
        get(&arrays, "runs.first_period")?,
    );
    let mut runs = Vec::with_capacity(start.len());
    for i in 0..start.len() {
        let (a, n) = (start[i] as usize, len[i] as usize);
        if (a + n) * f > months.len() || loan[i] as usize >= loan_ids.len() {
            return Err(Error::Format(format!("run {i} points outside the archive")));
        }
        runs.push(EncodedRun {
            loan: loan[i] as usize,
            first_period: Period::from_index(first[i] as i64),
            months: months.data()[a * f..(a + n) * f].to_vec(),
        });
    }
    let train = get_samples(&arrays, "train", &runs, f)?;
    let test = get_samples(&arrays, "test", &runs, f)?;
    let scaling = ScalingStats {
        mean: get(&arrays, "scaling.mean")?.to_vec(),
        std: get(&arrays, "scaling.std")?.to_vec(),
    };
    let dataset = CohortDataset {
        cohort: manifest.cohort.clone(),
        feature_names: manifest.feature_names.clone(),
        loan_ids,
        runs,
        train,
        test,
        scaling,
        balanced_test: manifest.balanced_test,
    };
    Ok((dataset, manifest))
}
