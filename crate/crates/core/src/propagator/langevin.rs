use alloc::vec::Vec;

use rand::Rng;

use crate::model::{CharacteristicsGrid, MediumConfig};
use crate::rng::complex_gaussian;
use crate::{Complex64, Error, Result};

/// Piecewise-constant Langevin forcing of the molecular coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinNoise {
    pub nz: usize,
    pub ntau: usize,
    /// `values[j·nz + i]`: forcing in z cell `i`, τ cell `j`.
    pub values: Vec<Complex64>,
}

impl LangevinNoise {
    pub(crate) fn check(&self, grid: &CharacteristicsGrid) -> Result<()> {
        if self.nz != grid.nz || self.ntau != grid.ntau || self.values.len() != grid.nz * grid.ntau {
            return Err(Error::Shape("Langevin forcing does not match the grid".into()));
        }
        Ok(())
    }
}

/// Samples the forcing that accompanies the damping `Γ`.
///
/// Each cell gets an independent circular Gaussian with variance
/// `2Γ / (dz·dτ)`. With the trapezoidal coherence update this keeps an
/// undriven coherence at its vacuum variance `1/dz` exactly.
pub fn apply_damping_langevin<R: Rng + ?Sized>(
    config: &MediumConfig,
    grid: &CharacteristicsGrid,
    rng: &mut R,
) -> Result<LangevinNoise> {
    if !config.langevin {
        return Err(Error::config("medium.langevin", "Langevin forcing is disabled"));
    }
    let var = 2.0 * config.damping / (grid.dz() * grid.dtau());
    let values = (0..grid.nz * grid.ntau).map(|_| complex_gaussian(rng, var)).collect();
    Ok(LangevinNoise {
        nz: grid.nz,
        ntau: grid.ntau,
        values,
    })
}
