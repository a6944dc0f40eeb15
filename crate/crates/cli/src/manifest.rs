use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const RUN_MANIFEST: &str = "run.toml";

/// Describes the command that produced an output directory. This is the
/// only file a rerun is allowed to change.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub versions: BTreeMap<String, String>,
    pub timing: Timing,
    /// The effective configuration after flags were applied.
    pub config: toml::Table,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

pub fn config_hash(config_toml: &str) -> String {
    Sha256::digest(config_toml.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Run {
    command: String,
    config_toml: String,
    started: SystemTime,
    clock: Instant,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Run {
    pub fn start(command: &str, config_toml: String) -> Self {
        Self {
            command: command.into(),
            config_toml,
            started: SystemTime::now(),
            clock: Instant::now(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn finish(self, dir: &Path) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command,
            config_hash: config_hash(&self.config_toml),
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            versions: BTreeMap::from([("reseb".to_string(), env!("CARGO_PKG_VERSION").to_string())]),
            timing: Timing {
                started_unix: self.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            },
            config: self.config_toml.parse().expect("config re-parses"),
        };
        std::fs::write(dir.join(RUN_MANIFEST), toml::to_string(&manifest).expect("manifest serializes"))?;
        Ok(())
    }
}
