//! Output files and the run manifest.
//!
//! Commands collect everything in memory and write once at the end, so a
//! failing run leaves no partial files behind.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use shoebox::ImpulseResponse;

use crate::failure::Outcome;
use crate::table::Table;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    /// Seeds of the individual random streams, by purpose.
    pub seeds: BTreeMap<String, u64>,
    pub engine_version: String,
    pub cli_version: String,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, Value>,
}

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    seeds: BTreeMap<String, u64>,
    summary: BTreeMap<String, Value>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Outcome<()> {
        self.files.push((name.to_string(), table.to_csv()?));
        Ok(())
    }

    pub fn wav(&mut self, name: &str, h: &ImpulseResponse) -> Outcome<()> {
        self.files.push((name.to_string(), h.wav_bytes()?));
        Ok(())
    }

    pub fn seed(&mut self, purpose: &str, seed: u64) {
        self.seeds.insert(purpose.to_string(), seed);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn summary(&self) -> &BTreeMap<String, Value> {
        &self.summary
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes every file and the manifest into `dir`.
    pub fn commit(self, dir: &Path, command: &str, config: Value, seed: Option<u64>) -> Outcome<RunManifest> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            seed,
            seeds: self.seeds,
            engine_version: shoebox::VERSION.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.files.into_iter().map(|(n, _)| n).collect(),
            summary: self.summary,
        };
        std::fs::write(dir.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(manifest)
    }
}
