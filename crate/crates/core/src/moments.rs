//! Deterministic second moments of the two-mode channel.
//!
//! The output is linear in the vacuum seeds, so every second moment is a
//! weighted sum over the response columns computed by
//! [`Integrator::two_mode_responses`]:
//! `⟨X Y*⟩ = Σ_c R_X[c] R_Y[c]* v_c` with `v_c` the seed variance of cell `c`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::model::{CharacteristicsGrid, MediumConfig, PumpPulse};
use crate::propagator::{Integrator, TwoModeResponses};
use crate::{Complex64, Error, Result};

/// Default cap on the number of response-matrix elements (about 1 GiB).
pub const DEFAULT_MAX_ELEMENTS: usize = 1 << 26;

/// Equal-`z` second moments at the fiber output, diagonal in `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfiles {
    pub grid: CharacteristicsGrid,
    /// `⟨|b_{-1}(τ)|²⟩` per τ cell.
    pub stokes: Vec<f64>,
    /// `⟨|b_{+1}(τ)|²⟩` per τ cell.
    pub anti_stokes: Vec<f64>,
    /// `⟨b_{-1}(τ) b_{+1}(τ)⟩` per τ cell.
    pub cross: Vec<Complex64>,
    /// `⟨|Q(z, T)|²⟩` per z cell.
    pub excitation: Vec<f64>,
    /// Pump intensity `b_0²` per τ cell.
    pub pump: Vec<f64>,
}

impl MomentProfiles {
    /// Vacuum intensity of a seeded line, `1/dτ`.
    pub fn vacuum_level(&self) -> f64 {
        1.0 / self.grid.dtau()
    }

    /// Vacuum excitation density, `1/dz`.
    pub fn vacuum_excitation(&self) -> f64 {
        1.0 / self.grid.dz()
    }
}

/// Full equal-`z` covariance functions at the fiber output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRecord {
    pub profiles: MomentProfiles,
    /// `stokes[j·ntau + k] = ⟨b_{-1}(τ_j) b_{-1}(τ_k)*⟩`.
    pub stokes: Vec<Complex64>,
    /// `anti_stokes[j·ntau + k] = ⟨b_{+1}(τ_j) b_{+1}(τ_k)*⟩`.
    pub anti_stokes: Vec<Complex64>,
    /// `cross[j·ntau + k] = ⟨b_{-1}(τ_j) b_{+1}(τ_k)⟩`.
    pub cross: Vec<Complex64>,
}

fn responses(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    integrator: &Integrator,
) -> Result<TwoModeResponses> {
    if config.langevin && config.damping > 0.0 {
        return Err(Error::Unsupported(
            "moment propagation does not include Langevin forcing".into(),
        ));
    }
    if !config.is_two_mode() {
        return Err(Error::Unsupported(
            "moment propagation is limited to the two-mode channel; use Monte Carlo for the full comb".into(),
        ));
    }
    integrator.two_mode_responses(config, pump, grid, DEFAULT_MAX_ELEMENTS)
}

fn profiles_from(
    r: &TwoModeResponses,
    config: &MediumConfig,
    pump: &PumpPulse,
    integrator: &Integrator,
) -> Result<MomentProfiles> {
    let grid = r.grid;
    let var: Vec<f64> = (0..r.ncol).map(|c| r.seed_variance(c)).collect();
    let mut stokes = vec![0.0; grid.ntau];
    let mut anti_stokes = vec![0.0; grid.ntau];
    let mut cross = vec![Complex64::new(0.0, 0.0); grid.ntau];
    for j in 0..grid.ntau {
        let (s, a) = (r.s_row(j), r.a_row(j));
        for c in 0..r.ncol {
            stokes[j] += s[c].norm_sqr() * var[c];
            anti_stokes[j] += a[c].norm_sqr() * var[c];
            // b_{-1} = s*, so ⟨b_{-1} b_{+1}⟩ = Σ s* a v.
            cross[j] += s[c].conj() * a[c] * var[c];
        }
    }
    let excitation = (0..grid.nz)
        .map(|i| r.q_row(i).iter().zip(&var).map(|(q, v)| q.norm_sqr() * v).sum())
        .collect();
    let pump_profile = pump
        .cell_amplitudes(&grid, config.pump_photons)
        .into_iter()
        .map(|p| p * p)
        .collect();
    let dt = grid.dtau();
    let mean_s = stokes.iter().sum::<f64>() * dt;
    let mean_a = anti_stokes.iter().sum::<f64>() * dt;
    integrator.check_depletion(config, pump, [(-1, mean_s), (1, mean_a)])?;
    Ok(MomentProfiles {
        grid,
        stokes,
        anti_stokes,
        cross,
        excitation,
        pump: pump_profile,
    })
}

/// Mean intensities, cross moment and excitation density under vacuum
/// seeding.
pub fn propagate_profiles(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    integrator: &Integrator,
) -> Result<MomentProfiles> {
    let r = responses(config, pump, grid, integrator)?;
    profiles_from(&r, config, pump, integrator)
}

/// Full covariance functions under vacuum seeding.
pub fn propagate_covariance(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    integrator: &Integrator,
) -> Result<CovarianceRecord> {
    let r = responses(config, pump, grid, integrator)?;
    let profiles = profiles_from(&r, config, pump, integrator)?;
    let nt = grid.ntau;
    let var: Vec<f64> = (0..r.ncol).map(|c| r.seed_variance(c)).collect();
    let mut stokes = vec![Complex64::new(0.0, 0.0); nt * nt];
    let mut anti_stokes = vec![Complex64::new(0.0, 0.0); nt * nt];
    let mut cross = vec![Complex64::new(0.0, 0.0); nt * nt];
    for j in 0..nt {
        let (sj, aj) = (r.s_row(j), r.a_row(j));
        for k in 0..nt {
            let (sk, ak) = (r.s_row(k), r.a_row(k));
            let mut ss = Complex64::new(0.0, 0.0);
            let mut aa = Complex64::new(0.0, 0.0);
            let mut sa = Complex64::new(0.0, 0.0);
            for c in 0..r.ncol {
                ss += sj[c].conj() * sk[c] * var[c];
                aa += aj[c] * ak[c].conj() * var[c];
                sa += sj[c].conj() * ak[c] * var[c];
            }
            stokes[j * nt + k] = ss;
            anti_stokes[j * nt + k] = aa;
            cross[j * nt + k] = sa;
        }
    }
    Ok(CovarianceRecord {
        profiles,
        stokes,
        anti_stokes,
        cross,
    })
}

/// Relative floor on the generated intensity below which `C` is undefined.
pub const INTENSITY_FLOOR: f64 = 1e-6;

/// Stokes / anti-Stokes correlation coefficient
/// `|⟨b_{-1} b_{+1}⟩| / √(I_{-1} I_{+1})` per τ cell.
///
/// `None` where either line has generated (above-vacuum) intensity below
/// [`INTENSITY_FLOOR`] times the vacuum level.
pub fn correlation_coefficient(profiles: &MomentProfiles) -> Vec<Option<f64>> {
    let vac = profiles.vacuum_level();
    let floor = INTENSITY_FLOOR * vac;
    profiles
        .stokes
        .iter()
        .zip(&profiles.anti_stokes)
        .zip(&profiles.cross)
        .map(|((s, a), x)| {
            if s - vac < floor || a - vac < floor {
                None
            } else {
                Some(x.norm() / sqrt(s * a))
            }
        })
        .collect()
}

/// Mean intensity of a line: `-1`, `+1`, or `0` for the pump.
pub fn mean_intensity(profiles: &MomentProfiles, order: i32) -> Result<&[f64]> {
    match order {
        -1 => Ok(&profiles.stokes),
        1 => Ok(&profiles.anti_stokes),
        0 => Ok(&profiles.pump),
        n => Err(Error::MissingLine(n)),
    }
}

/// Mean photon bookkeeping `⟨ΔN_S⟩ - ⟨ΔN_AS⟩ - ⟨ΔN_mol⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManleyRoweReport {
    pub stokes_photons: f64,
    pub anti_stokes_photons: f64,
    pub excitations: f64,
    pub residual: f64,
}

impl ManleyRoweReport {
    /// Residual relative to the total generated quanta.
    pub fn relative(&self) -> f64 {
        let total = self.stokes_photons.abs() + self.anti_stokes_photons.abs() + self.excitations.abs();
        if total == 0.0 {
            0.0
        } else {
            self.residual.abs() / total
        }
    }
}

/// Evaluates the mean bookkeeping from moment profiles; the generated
/// quanta are counted above the vacuum input.
pub fn manley_rowe_report(profiles: &MomentProfiles) -> ManleyRoweReport {
    let g = &profiles.grid;
    let dt = g.dtau();
    let dz = g.dz();
    let vac_t = profiles.vacuum_level();
    let vac_z = profiles.vacuum_excitation();
    let s: f64 = profiles.stokes.iter().map(|i| i - vac_t).sum::<f64>() * dt;
    let a: f64 = profiles.anti_stokes.iter().map(|i| i - vac_t).sum::<f64>() * dt;
    let m: f64 = profiles.excitation.iter().map(|e| e - vac_z).sum::<f64>() * dz;
    ManleyRoweReport {
        stokes_photons: s,
        anti_stokes_photons: a,
        excitations: m,
        residual: s - a - m,
    }
}

/// Normalized time at which a profile's cumulative energy first reaches
/// `fraction` of its total (cell-center resolution). The vacuum level is
/// subtracted first.
pub fn energy_crossing(profile: &[f64], vacuum: f64, fraction: f64) -> Option<f64> {
    let excess: Vec<f64> = profile.iter().map(|i| (i - vacuum).max(0.0)).collect();
    let total: f64 = excess.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let n = profile.len() as f64;
    let mut cum = 0.0;
    for (j, e) in excess.iter().enumerate() {
        let next = cum + e;
        if next >= fraction * total {
            // Linear interpolation inside the cell.
            let f = if *e > 0.0 { (fraction * total - cum) / e } else { 0.0 };
            return Some((j as f64 + f) / n);
        }
        cum = next;
    }
    Some(1.0)
}

/// Index range of the cells holding the central `fraction` of a profile's
/// (above-vacuum) energy.
pub fn central_cells(profile: &[f64], vacuum: f64, fraction: f64) -> core::ops::Range<usize> {
    let excess: Vec<f64> = profile.iter().map(|i| (i - vacuum).max(0.0)).collect();
    let total: f64 = excess.iter().sum();
    let lo = 0.5 * (1.0 - fraction) * total;
    let hi = total - lo;
    let mut cum = 0.0;
    let mut start = None;
    let mut end = 0;
    for (j, e) in excess.iter().enumerate() {
        let next = cum + e;
        if start.is_none() && next > lo {
            start = Some(j);
        }
        if cum < hi {
            end = j + 1;
        }
        cum = next;
    }
    start.unwrap_or(0)..end
}
