//! Run configuration (TOML).
//!
//! ```toml
//! schema_version = 1
//! seed = 1
//!
//! [medium]
//! kind = "two_mode"        # two_mode | stokes_only | comb | explicit | physical
//! gain = 12.0
//! mismatch = 30.0
//!
//! [grid]
//! nz = 64
//! ntau = 64
//!
//! [ensemble]
//! shots = 1000
//! fibers = 2
//! ```
//!
//! Every other section (`pump`, `integrator`, `detector`, `analysis`) is
//! optional; see `configs/` for the full set of keys.

use std::path::Path;

use raman_comb_core::ensemble::EnsembleSpec;
use raman_comb_core::interferometry::DetectorConfig;
use raman_comb_core::model::{
    normalize_config, CharacteristicsGrid, MediumConfig, PhysicalMedium, PumpPulse, PumpShape, RawMedium,
    DEFAULT_RAMAN_SHIFT,
};
use raman_comb_core::propagator::{Integrator, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub medium: MediumSection,
    #[serde(default)]
    pub pump: PumpSection,
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MediumSection {
    TwoMode {
        gain: f64,
        mismatch: f64,
        #[serde(default)]
        damping: f64,
        #[serde(default)]
        langevin: bool,
    },
    StokesOnly {
        gain: f64,
    },
    Comb {
        stokes: u32,
        anti_stokes: u32,
        gain: f64,
        mismatch: f64,
        #[serde(default = "default_shift")]
        raman_shift: f64,
        #[serde(default)]
        damping: f64,
        #[serde(default)]
        langevin: bool,
    },
    Explicit(MediumConfig),
    Physical(PhysicalMedium),
}

fn default_shift() -> f64 {
    DEFAULT_RAMAN_SHIFT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(default)]
    pub shape: PumpShape,
    #[serde(default = "one")]
    pub energy_scale: f64,
    /// Relative shot-to-shot energy jitter.
    #[serde(default)]
    pub jitter: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PumpSection {
    fn default() -> Self {
        PumpSection {
            shape: PumpShape::default(),
            energy_scale: 1.0,
            jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nz: usize,
    pub ntau: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub scheme: Scheme,
    pub step_limit: f64,
    pub depletion_limit: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let i = Integrator::default();
        IntegratorSection {
            scheme: i.scheme,
            step_limit: i.step_limit,
            depletion_limit: i.depletion_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub shots: usize,
    pub fibers: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { shots: 1000, fibers: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Sideband lines to fit (the pump is always fitted).
    pub lines: Vec<i32>,
    /// `(n, m)` pairs for the mutual-coherence histograms.
    pub pairs: Vec<[i32; 2]>,
    /// Measure line phases against the pump fringe, which removes a
    /// common interferometer piston.
    pub pump_reference: bool,
    pub phase_bins: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            lines: vec![-1, 1],
            pairs: vec![[1, -1]],
            pump_reference: false,
            phase_bins: raman_comb_core::statistics::PHASE_BINS,
        }
    }
}

/// Everything the core needs, validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub medium: MediumConfig,
    pub pump: PumpPulse,
    pub grid: CharacteristicsGrid,
    pub spec: EnsembleSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        config.check_version()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    fn check_version(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configurations always serialize")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("configurations always serialize");
        hex(&Sha256::digest(json))
    }

    pub fn medium_config(&self) -> Result<MediumConfig> {
        let config = match &self.medium {
            MediumSection::TwoMode {
                gain,
                mismatch,
                damping,
                langevin,
            } => {
                let mut c = MediumConfig::two_mode(*gain, *mismatch)?;
                c.damping = *damping;
                c.langevin = *langevin;
                c
            }
            MediumSection::StokesOnly { gain } => MediumConfig::stokes_only(*gain)?,
            MediumSection::Comb {
                stokes,
                anti_stokes,
                gain,
                mismatch,
                raman_shift,
                damping,
                langevin,
            } => {
                let mut c = MediumConfig::comb(*stokes, *anti_stokes, *gain, *mismatch, *raman_shift)?;
                c.damping = *damping;
                c.langevin = *langevin;
                c
            }
            MediumSection::Explicit(c) => normalize_config(&RawMedium::Dimensionless(c.clone()))?,
            MediumSection::Physical(p) => normalize_config(&RawMedium::Physical(p.clone()))?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn integrator(&self) -> Integrator {
        Integrator {
            scheme: self.integrator.scheme,
            step_limit: self.integrator.step_limit,
            depletion_limit: self.integrator.depletion_limit,
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.check_version()?;
        let medium = self.medium_config()?;
        let pump = PumpPulse {
            shape: self.pump.shape.clone(),
            energy_scale: self.pump.energy_scale,
        };
        pump.validate()?;
        let grid = CharacteristicsGrid::unit(self.grid.nz, self.grid.ntau)?;
        let integrator = self.integrator();
        if !(integrator.step_limit > 0.0) {
            return Err(CliError::config("integrator.step_limit", "must be positive"));
        }
        if !(integrator.depletion_limit > 0.0) {
            return Err(CliError::config("integrator.depletion_limit", "must be positive"));
        }
        let spec = EnsembleSpec {
            integrator,
            pump_jitter: self.pump.jitter,
            ..EnsembleSpec::new(self.ensemble.shots, self.ensemble.fibers, self.seed)
        };
        spec.validate()?;
        self.detector.validate()?;
        if self.analysis.phase_bins < 2 {
            return Err(CliError::config("analysis.phase_bins", "need at least 2 bins"));
        }
        for [n, m] in &self.analysis.pairs {
            for order in [n, m] {
                if *order == 0 || medium.line(*order).is_none() {
                    return Err(CliError::config(
                        "analysis.pairs",
                        format!("line {order} is not a sideband of the medium"),
                    ));
                }
            }
        }
        for order in &self.analysis.lines {
            if medium.line(*order).is_none() {
                return Err(CliError::config(
                    "analysis.lines",
                    format!("line {order} is not in the medium"),
                ));
            }
        }
        Ok(Resolved {
            medium,
            pump,
            grid,
            spec,
        })
    }

    /// Sidebands that the analysis needs fitted: the configured lines plus
    /// every line named in a pair.
    pub fn fitted_lines(&self) -> Vec<i32> {
        let mut lines: Vec<i32> = self.analysis.lines.clone();
        for [n, m] in &self.analysis.pairs {
            lines.extend([*n, *m]);
        }
        lines.retain(|&n| n != 0);
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
