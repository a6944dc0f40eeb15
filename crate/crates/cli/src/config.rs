//! The run configuration: one TOML section per module. Every key is
//! optional and flags override whatever the file sets.

use std::path::Path;

use reseb_core::models::ModelSpec;
use reseb_core::pipeline::PipelineConfig;
use reseb_core::synth::SynthConfig;
use reseb_core::training::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Preset name or path to a layout TOML file.
    pub layout: String,
    /// Overrides the layout's delimiter when set.
    pub delimiter: Option<char>,
    /// Name recorded for the cohort built by `window`.
    pub cohort: String,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            layout: "compact".into(),
            delimiter: None,
            cohort: "cohort".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialsConfig {
    pub count: usize,
    pub workers: usize,
}

impl Default for TrialsConfig {
    fn default() -> Self {
        Self { count: 10, workers: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub samples: usize,
    pub permutations: usize,
    pub seed: u64,
    pub background_seed: u64,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            samples: 20,
            permutations: 30,
            seed: 0,
            background_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    pub synth: SynthConfig,
    pub pipeline: PipelineConfig,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub trials: TrialsConfig,
    pub explain: ExplainConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            // The rendered error quotes the offending source line; keep the
            // position and the message only.
            let text = e.to_string();
            let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
            let msg = match (lines.first(), lines.last()) {
                (Some(a), Some(b)) if a != b => format!("{a}: {b}"),
                _ => e.message().to_string(),
            };
            CliError::Validation(format!("config {}: {msg}", path.display()))
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}
