// SPDX-License-Identifier: Apache-2.0

//! Run manifests written next to every output artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub flags: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// Input path to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
}

pub struct Recorder {
    command: String,
    flags: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Recorder {
    pub fn new(command: &str, flags: impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            flags: serde_json::to_value(flags).unwrap_or(serde_json::Value::Null),
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    /// Reads an input file and records its hash.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.output(path);
        Ok(())
    }

    /// Records an output written elsewhere.
    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes `<first output>.manifest.json`.
    pub fn finish(self) -> Result<PathBuf> {
        let first = self.outputs.first().cloned().unwrap_or_else(|| PathBuf::from(&self.command));
        let mut name = first.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let manifest = RunManifest {
            command: self.command,
            args: std::env::args().collect(),
            flags: self.flags,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
