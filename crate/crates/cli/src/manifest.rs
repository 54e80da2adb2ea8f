use serde::{Deserialize, Serialize};

use crate::io::{OutputDir, OutputFile};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Provenance record written once per output directory.
///
/// Everything except `wall_clock_s` is a function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub subcommand: String,
    pub config_hash: Option<String>,
    pub master_seed: Option<u64>,
    pub outputs: Vec<OutputFile>,
    pub wall_clock_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_hash: Option<String>, master_seed: Option<u64>) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config_hash,
            master_seed,
            outputs: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    /// Records the files written so far and writes the manifest itself.
    pub fn finish(mut self, out: &mut OutputDir, wall_clock_s: f64) -> crate::error::Result<Self> {
        self.outputs = out.written().to_vec();
        self.wall_clock_s = wall_clock_s;
        out.write_json(MANIFEST_NAME, &self)?;
        Ok(self)
    }
}
