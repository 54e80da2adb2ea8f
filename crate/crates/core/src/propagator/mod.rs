//! Integration of the sideband / molecular-coherence equations on the
//! characteristics grid.
//!
//! The sweep runs over τ cells (outer) and z cells (inner). Inside a cell the
//! fields are known on the `z = z_i` edge and the coherence on the `τ = τ_j`
//! edge; one cell update produces the opposite edges. Three cell schemes are
//! available:
//!
//! * [`Scheme::PredictorCorrector`]: explicit two-stage (Heun) update.
//! * [`Scheme::Implicit`]: trapezoidal update in both directions. It keeps the
//!   order-weighted photon bookkeeping exact to rounding error.
//! * [`Scheme::Richardson`]: the implicit scheme on the grid and on a 2×
//!   refinement (seeds held piecewise constant on the coarse cells),
//!   extrapolated to fourth order.

mod green;
mod langevin;
mod multiline;
mod two_mode;

pub use green::GreenKernelOracle;
pub use langevin::{apply_damping_langevin, LangevinNoise};
pub use multiline::integrate_multiline;
pub use two_mode::{integrate_two_mode, TwoModeResponses};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{CharacteristicsGrid, MediumConfig, PumpPulse};
use crate::{Complex64, Error, Result};

/// Cell update scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    PredictorCorrector,
    Implicit,
    Richardson,
}

/// Initial sideband envelopes at `z = 0` and coherence at `τ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    /// Orders of the seeded lines; every sideband of the medium appears once.
    pub orders: Vec<i32>,
    /// `fields[k][j]`: line `orders[k]` in τ cell `j`.
    pub fields: Vec<Vec<Complex64>>,
    /// `coherence[i]`: z cell `i`.
    pub coherence: Vec<Complex64>,
}

impl InitialConditions {
    /// All-zero initial conditions for the sidebands of `config`.
    pub fn zeros(config: &MediumConfig, grid: &CharacteristicsGrid) -> Self {
        let orders = config.sideband_orders();
        InitialConditions {
            fields: alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); grid.ntau]; orders.len()],
            orders,
            coherence: alloc::vec![Complex64::new(0.0, 0.0); grid.nz],
        }
    }

    pub fn line(&self, order: i32) -> Option<&[Complex64]> {
        let k = self.orders.iter().position(|&n| n == order)?;
        Some(&self.fields[k])
    }

    pub fn line_mut(&mut self, order: i32) -> Option<&mut Vec<Complex64>> {
        let k = self.orders.iter().position(|&n| n == order)?;
        Some(&mut self.fields[k])
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.orders != other.orders
            || self.coherence.len() != other.coherence.len()
            || self.fields.iter().zip(&other.fields).any(|(x, y)| x.len() != y.len())
        {
            return Err(Error::Shape("initial conditions differ in shape".into()));
        }
        let mix = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(x, y)| a * x + b * y).collect()
        };
        Ok(InitialConditions {
            orders: self.orders.clone(),
            fields: self.fields.iter().zip(&other.fields).map(|(x, y)| mix(x, y)).collect(),
            coherence: mix(&self.coherence, &other.coherence),
        })
    }

    /// Input photon number of a line, `Σ |b|² dτ`.
    pub fn photons(&self, order: i32, grid: &CharacteristicsGrid) -> f64 {
        self.line(order)
            .map(|f| f.iter().map(|b| b.norm_sqr()).sum::<f64>() * grid.dtau())
            .unwrap_or(0.0)
    }

    /// Input molecular excitations, `Σ |Q|² dz`.
    pub fn excitations(&self, grid: &CharacteristicsGrid) -> f64 {
        self.coherence.iter().map(|q| q.norm_sqr()).sum::<f64>() * grid.dz()
    }

    pub(crate) fn check(&self, config: &MediumConfig, grid: &CharacteristicsGrid) -> Result<()> {
        if self.orders != config.sideband_orders() {
            return Err(Error::Shape(
                "initial conditions must list every sideband of the medium".into(),
            ));
        }
        if self.fields.iter().any(|f| f.len() != grid.ntau) || self.coherence.len() != grid.nz {
            return Err(Error::Shape("initial conditions do not match the grid".into()));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.fields.iter().flatten().all(finite) || !self.coherence.iter().all(finite) {
            return Err(Error::NonFinite("initial conditions"));
        }
        Ok(())
    }
}

/// Integrator settings and validity guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrator {
    pub scheme: Scheme,
    /// Maximum allowed `|μ b_0| · max(dz, dτ)` in any cell.
    pub step_limit: f64,
    /// Maximum sideband energy as a fraction of the pump energy.
    pub depletion_limit: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            scheme: Scheme::default(),
            step_limit: 0.2,
            depletion_limit: 0.1,
        }
    }
}

impl Integrator {
    pub fn with_scheme(scheme: Scheme) -> Self {
        Integrator {
            scheme,
            ..Self::default()
        }
    }

    /// Rejects grids on which a single cell carries too much gain.
    pub fn check_step(&self, config: &MediumConfig, pump: &PumpPulse, grid: &CharacteristicsGrid) -> Result<()> {
        let peak = pump
            .cell_amplitudes(grid, config.pump_photons)
            .into_iter()
            .fold(0.0, f64::max);
        let mu = config
            .couplings
            .iter()
            .filter_map(|c| config.coupling(c.upper))
            .map(|m| m.norm())
            .fold(0.0, f64::max);
        let gain = mu * peak * grid.dz().max(grid.dtau());
        if gain >= self.step_limit {
            return Err(Error::StepSize {
                gain,
                limit: self.step_limit,
            });
        }
        Ok(())
    }

    /// Rejects outputs whose sideband energy is no longer small compared
    /// with the pump.
    pub fn check_depletion(
        &self,
        config: &MediumConfig,
        pump: &PumpPulse,
        photons: impl IntoIterator<Item = (i32, f64)>,
    ) -> Result<()> {
        let energy: f64 = photons
            .into_iter()
            .map(|(n, p)| config.line(n).map_or(0.0, |l| l.omega) * p)
            .sum();
        let pump_energy = config.pump_photons * pump.energy_scale;
        if pump_energy == 0.0 {
            // Nothing is amplified without a pump.
            return Ok(());
        }
        let fraction = energy / pump_energy;
        if !fraction.is_finite() {
            return Err(Error::NonFinite("sideband energy"));
        }
        if fraction > self.depletion_limit {
            return Err(Error::Depletion {
                fraction,
                limit: self.depletion_limit,
            });
        }
        Ok(())
    }
}

/// Order-weighted photon bookkeeping of one integration:
/// `Σ_n n·ΔN_n + ΔN_mol`, which vanishes for the exact dynamics without
/// damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bookkeeping {
    /// `Σ_n n·ΔN_n + ΔN_mol`.
    pub residual: f64,
    /// Generated photons `Σ_n |ΔN_n|` and excitations, used as the scale.
    pub generated: f64,
}

impl Bookkeeping {
    pub fn relative(&self) -> f64 {
        if self.generated == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.generated
        }
    }
}

/// Evaluates the bookkeeping identity from initial conditions and the output.
pub fn photon_bookkeeping(init: &InitialConditions, record: &crate::model::FieldRecord) -> Result<Bookkeeping> {
    let grid = &record.grid;
    let mut residual = 0.0;
    let mut generated = 0.0;
    for &n in &record.orders {
        let delta = record.photons(n)? - init.photons(n, grid);
        residual += n as f64 * delta;
        generated += delta.abs();
    }
    let dmol = record.excitations() - init.excitations(grid);
    residual += dmol;
    generated += dmol.abs();
    Ok(Bookkeeping { residual, generated })
}

#[inline]
pub(crate) fn is_finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}
