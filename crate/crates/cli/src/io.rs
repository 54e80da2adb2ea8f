//! Output directories, CSV/JSON writers and the ensemble file.
//!
//! Ensemble file layout (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `RCOMBENS` |
//! | 4 | format version (`u32`, currently 1) |
//! | 8 | header length `h` (`u64`) |
//! | h | UTF-8 JSON [`EnsembleHeader`] |
//! | rest | amplitudes as `(re, im)` pairs of `f64`, ordered shot, fiber, line, τ cell |

use std::fs;
use std::path::{Path, PathBuf};

use raman_comb_core::ensemble::ShotEnsemble;
use raman_comb_core::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"RCOMBENS";
pub const FORMAT_VERSION: u32 = 1;

/// A file written by a subcommand, with its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Output directory that remembers what was written to it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[OutputFile] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(OutputFile {
            path: name.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("summaries always serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        self.write(name, &table.to_csv())
    }
}

/// Column-oriented table rendered as CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Two-column `(x, y)` table.
    pub fn curve(x_name: &str, y_name: &str, x: &[f64], y: &[f64]) -> Self {
        let mut t = Table::new(&[x_name, y_name]);
        for (a, b) in x.iter().zip(y) {
            t.push(vec![num(*a), num(*b)]);
        }
        t
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory writes cannot fail");
        for row in &self.rows {
            w.write_record(row).expect("in-memory writes cannot fail");
        }
        w.into_inner().expect("in-memory writes cannot fail")
    }
}

/// Shortest round-trip decimal form; empty for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// JSON header of an ensemble file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleHeader {
    pub config: RunConfig,
    pub master_seed: u64,
    pub shots: usize,
    pub fibers: usize,
    pub ntau: usize,
    pub orders: Vec<i32>,
    pub pump_scales: Vec<f64>,
    pub data_sha256: String,
}

fn data_bytes(data: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() * 16);
    for c in data {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn encode_ensemble(config: &RunConfig, ensemble: &ShotEnsemble) -> Vec<u8> {
    let data = data_bytes(&ensemble.data);
    let header = EnsembleHeader {
        config: config.clone(),
        master_seed: ensemble.spec.master_seed,
        shots: ensemble.shots(),
        fibers: ensemble.fibers(),
        ntau: ensemble.ntau(),
        orders: ensemble.orders.clone(),
        pump_scales: ensemble.pump_scales.clone(),
        data_sha256: hex(&Sha256::digest(&data)),
    };
    let header = serde_json::to_vec(&header).expect("headers always serialize");
    let mut out = Vec::with_capacity(20 + header.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&data);
    out
}

pub fn decode_ensemble(bytes: &[u8], path: &Path) -> Result<(RunConfig, ShotEnsemble)> {
    let bad = |reason: &str| CliError::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(bad(&format!("unsupported format version {version}")));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() < len {
        return Err(bad("truncated header"));
    }
    let header: EnsembleHeader = serde_json::from_slice(&body[..len]).map_err(|e| bad(&format!("header: {e}")))?;
    let data = &body[len..];
    if hex(&Sha256::digest(data)) != header.data_sha256 {
        return Err(bad("data checksum mismatch"));
    }
    let values = header.shots * header.fibers * header.orders.len() * header.ntau;
    if data.len() != values * 16 {
        return Err(bad("data length does not match the header"));
    }
    let resolved = header.config.resolve()?;
    if resolved.grid.ntau != header.ntau
        || resolved.spec.shots != header.shots
        || resolved.spec.fibers != header.fibers
        || resolved.spec.master_seed != header.master_seed
        || resolved.medium.sideband_orders() != header.orders
    {
        return Err(bad("header does not match its embedded configuration"));
    }
    let data = data
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let ensemble = ShotEnsemble {
        config: resolved.medium,
        pump: resolved.pump,
        grid: resolved.grid,
        spec: resolved.spec,
        orders: header.orders,
        pump_scales: header.pump_scales,
        data,
    };
    Ok((header.config, ensemble))
}

pub fn read_ensemble(path: &Path) -> Result<(RunConfig, ShotEnsemble)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_ensemble(&bytes, path)
}
