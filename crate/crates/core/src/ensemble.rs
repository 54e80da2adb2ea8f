//! Vacuum seeding and Monte Carlo shots.
//!
//! The fields are linear (two-mode) or bilinear (full comb) in the seeds, and
//! every observable of interest is a normally paired moment. Sampling the
//! seeded channels as circular complex Gaussians with the vacuum covariance
//! therefore reproduces those moments; orderings that would need a separate
//! anti-normal term are not represented.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::model::{CharacteristicsGrid, FieldRecord, MediumConfig, PumpPulse};
use crate::propagator::{apply_damping_langevin, InitialConditions, Integrator};
use crate::rng::{complex_gaussian, normal, substream, Purpose, StreamId};
use crate::{Complex64, Error, Result};

/// Samples vacuum initial conditions.
///
/// Only the first Stokes and anti-Stokes lines and the coherence have
/// nonzero vacuum correlators; higher orders start empty. Field cells get
/// variance `1/dτ`, coherence cells `1/dz`. Draws are taken in the order
/// Stokes, anti-Stokes, coherence.
pub fn sample_vacuum<R: Rng + ?Sized>(
    config: &MediumConfig,
    grid: &CharacteristicsGrid,
    rng: &mut R,
) -> InitialConditions {
    let mut init = InitialConditions::zeros(config, grid);
    let vt = 1.0 / grid.dtau();
    let vz = 1.0 / grid.dz();
    for order in [-1, 1] {
        if let Some(line) = init.line_mut(order) {
            for v in line.iter_mut() {
                *v = complex_gaussian(rng, vt);
            }
        }
    }
    for v in init.coherence.iter_mut() {
        *v = complex_gaussian(rng, vz);
    }
    init
}

/// How to run an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub shots: usize,
    pub fibers: usize,
    pub master_seed: u64,
    pub integrator: Integrator,
    /// Relative standard deviation of the per-shot pump energy (shared by
    /// both fibers).
    pub pump_jitter: f64,
}

impl EnsembleSpec {
    pub fn new(shots: usize, fibers: usize, master_seed: u64) -> Self {
        EnsembleSpec {
            shots,
            fibers,
            master_seed,
            integrator: Integrator::default(),
            pump_jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::config("ensemble.shots", "need at least one shot"));
        }
        if !(1..=2).contains(&self.fibers) {
            return Err(Error::config("ensemble.fibers", "must be 1 or 2"));
        }
        if !(self.pump_jitter >= 0.0) || !self.pump_jitter.is_finite() {
            return Err(Error::config(
                "ensemble.pump_power_jitter",
                "must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

/// Pump energy scale of a shot.
pub fn shot_pump_scale(spec: &EnsembleSpec, shot: usize) -> f64 {
    if spec.pump_jitter == 0.0 {
        return 1.0;
    }
    let mut rng = substream(spec.master_seed, StreamId::new(shot, 0, Purpose::PumpJitter, 0));
    (1.0 + spec.pump_jitter * normal(&mut rng)).max(0.0)
}

/// Simulates one `(shot, fiber)` realization. The result depends only on
/// the inputs, never on which other shots run or in which order.
pub fn run_shot(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    spec: &EnsembleSpec,
    shot: usize,
    fiber: usize,
) -> Result<FieldRecord> {
    let annotate = |e: Error| Error::Shot {
        shot,
        fiber,
        source: Box::new(e),
    };
    let mut vac = substream(spec.master_seed, StreamId::new(shot, fiber, Purpose::Vacuum, 0));
    let init = sample_vacuum(config, grid, &mut vac);
    let noise = if config.langevin && config.damping > 0.0 {
        let mut rng = substream(spec.master_seed, StreamId::new(shot, fiber, Purpose::Langevin, 0));
        Some(apply_damping_langevin(config, grid, &mut rng).map_err(annotate)?)
    } else {
        None
    };
    let shot_pump = PumpPulse {
        energy_scale: pump.energy_scale * shot_pump_scale(spec, shot),
        ..pump.clone()
    };
    let mut record = if config.is_two_mode() {
        spec.integrator
            .two_mode(config, &shot_pump, grid, &init, noise.as_ref())
    } else {
        spec.integrator
            .multiline(config, &shot_pump, grid, &init, noise.as_ref())
    }
    .map_err(annotate)?;
    record.seed = Some(spec.master_seed);
    Ok(record)
}

/// Output amplitudes of many independent shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEnsemble {
    pub config: MediumConfig,
    pub pump: PumpPulse,
    pub grid: CharacteristicsGrid,
    pub spec: EnsembleSpec,
    /// Stored sideband orders.
    pub orders: Vec<i32>,
    /// Pump energy scale of each shot.
    pub pump_scales: Vec<f64>,
    /// `data[((shot·fibers + fiber)·lines + line)·ntau + j]`.
    pub data: Vec<Complex64>,
}

impl ShotEnsemble {
    /// Collects per-shot records given in `(shot, fiber)` order.
    pub fn assemble(
        config: &MediumConfig,
        pump: &PumpPulse,
        grid: &CharacteristicsGrid,
        spec: &EnsembleSpec,
        records: &[FieldRecord],
    ) -> Result<Self> {
        if records.len() != spec.shots * spec.fibers {
            return Err(Error::Shape(alloc::format!(
                "expected {} records, got {}",
                spec.shots * spec.fibers,
                records.len()
            )));
        }
        let orders = config.sideband_orders();
        let mut data = Vec::with_capacity(records.len() * orders.len() * grid.ntau);
        for r in records {
            if r.orders != orders || r.grid != *grid {
                return Err(Error::Shape("record does not match the ensemble layout".into()));
            }
            for f in &r.fields {
                data.extend_from_slice(f);
            }
        }
        Ok(ShotEnsemble {
            config: config.clone(),
            pump: pump.clone(),
            grid: *grid,
            spec: *spec,
            orders,
            pump_scales: (0..spec.shots).map(|s| shot_pump_scale(spec, s)).collect(),
            data,
        })
    }

    pub fn shots(&self) -> usize {
        self.spec.shots
    }

    pub fn fibers(&self) -> usize {
        self.spec.fibers
    }

    pub fn ntau(&self) -> usize {
        self.grid.ntau
    }

    fn line_index(&self, order: i32) -> Result<usize> {
        self.orders
            .iter()
            .position(|&n| n == order)
            .ok_or(Error::MissingLine(order))
    }

    /// Output envelope of a line on one shot and fiber.
    pub fn amplitude(&self, shot: usize, fiber: usize, order: i32) -> Result<&[Complex64]> {
        let k = self.line_index(order)?;
        if shot >= self.shots() || fiber >= self.fibers() {
            return Err(Error::Shape(alloc::format!("no shot {shot} / fiber {fiber}")));
        }
        let nt = self.ntau();
        let start = ((shot * self.fibers() + fiber) * self.orders.len() + k) * nt;
        Ok(&self.data[start..start + nt])
    }

    /// Classical pump envelope of a shot (identical in both fibers).
    pub fn pump_amplitude(&self, shot: usize) -> Vec<Complex64> {
        let p = PumpPulse {
            energy_scale: self.pump.energy_scale * self.pump_scales[shot],
            ..self.pump.clone()
        };
        p.cell_amplitudes(&self.grid, self.config.pump_photons)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect()
    }

    /// Photon number of a line on one shot, `Σ |b|² dτ`.
    pub fn energy(&self, shot: usize, fiber: usize, order: i32) -> Result<f64> {
        Ok(self
            .amplitude(shot, fiber, order)?
            .iter()
            .map(|b| b.norm_sqr())
            .sum::<f64>()
            * self.grid.dtau())
    }

    /// Pulse-integrated amplitude `Σ b dτ`; its argument is the phase of the
    /// (single-mode) pulse.
    pub fn integrated_amplitude(&self, shot: usize, fiber: usize, order: i32) -> Result<Complex64> {
        Ok(self.amplitude(shot, fiber, order)?.iter().sum::<Complex64>() * self.grid.dtau())
    }

    pub fn line_phase(&self, shot: usize, fiber: usize, order: i32) -> Result<f64> {
        Ok(self.integrated_amplitude(shot, fiber, order)?.arg())
    }

    /// Energies of a line across shots for one fiber.
    pub fn energies(&self, fiber: usize, order: i32) -> Result<Vec<f64>> {
        (0..self.shots()).map(|s| self.energy(s, fiber, order)).collect()
    }
}

/// Runs every shot sequentially. The CLI provides a parallel runner with
/// identical results.
pub fn run_ensemble(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    spec: &EnsembleSpec,
) -> Result<ShotEnsemble> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.shots * spec.fibers);
    for shot in 0..spec.shots {
        for fiber in 0..spec.fibers {
            records.push(run_shot(config, pump, grid, spec, shot, fiber)?);
        }
    }
    ShotEnsemble::assemble(config, pump, grid, spec, &records)
}

/// Spread of the per-shot phase `arg b(τ)` over the cells that hold the
/// central `fraction` of the pulse energy, measured from the
/// energy-weighted mean phase. Returns the largest absolute deviation.
pub fn phase_excursion(amplitude: &[Complex64], fraction: f64) -> f64 {
    let total: f64 = amplitude.iter().map(|b| b.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let lo = 0.5 * (1.0 - fraction) * total;
    let hi = total - lo;
    let mut cum = 0.0;
    let mut cells = vec![];
    for b in amplitude {
        let next = cum + b.norm_sqr();
        if next >= lo && cum <= hi {
            cells.push(*b);
        }
        cum = next;
    }
    let mean: Complex64 = cells.iter().map(|b| b * b.norm()).sum();
    let reference = mean.arg();
    cells
        .iter()
        .map(|b| crate::math::wrap_phase(b.arg() - reference).abs())
        .fold(0.0, f64::max)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, sqrt(var / n))
}
