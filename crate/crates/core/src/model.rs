//! Domain types: comb lines, medium configuration, pump pulse, grid and
//! field records.
//!
//! Everything the integrators see is dimensionless. The medium spans
//! `z ∈ [0, 1]`, the pulse window spans `τ ∈ [0, 1]`, and the stored fields are
//! photon-flux envelopes: a sideband amplitude `b_n(z, τ)` with `|b_n|²`
//! photons per unit normalized time and a molecular coherence `Q(z, τ)` with
//! `|Q|²` excitations per unit normalized length. In these units the vacuum
//! correlators are unit delta functions, so a piecewise-constant seed has
//! variance `1/dτ` (fields) or `1/dz` (coherence) per cell.
//!
//! The equations integrated, with `μ_n` the coupling of transition `n`
//! (between lines `n` and `n-1`) and `Δβ_n = β_n - β_{n-1}`, are
//!
//! ```text
//! ∂z b_n = i μ_{n+1} b_{n+1} e^{iΔβ_{n+1} z} Q* + i μ_n* b_{n-1} e^{-iΔβ_n z} Q
//! ∂τ Q   = i Σ_n μ_n b_n b_{n-1}* e^{iΔβ_n z} - Γ Q + F
//! ```
//!
//! The pump `b_0` is classical, real and undepleted.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math::{self, gauss_legendre, sqrt};
use crate::{Complex64, Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default rotational Raman shift of hydrogen relative to a 1064 nm pump
/// (18 THz / 281.8 THz).
pub const DEFAULT_RAMAN_SHIFT: f64 = 0.063_88;

/// Pump photons in a 0.6 mJ pulse at 1064 nm.
pub const DEFAULT_PUMP_PHOTONS: f64 = 3.2e15;

/// One line of the comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombLine {
    /// Order: negative for Stokes, positive for anti-Stokes, 0 for the pump.
    pub order: i32,
    /// Angular frequency relative to the pump, `ω_n / ω_0`.
    pub omega: f64,
    /// Propagation constant times the medium length, `β_n L`.
    pub beta: f64,
}

/// Coupling of the Raman transition between lines `upper` and `upper - 1`.
///
/// `gain` is the amplitude gain exponent the transition would give on its own
/// with the nominal pump: the dimensionless coupling is
/// `μ = gain / (2 √N_p) · e^{i phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub upper: i32,
    pub gain: f64,
    pub phase: f64,
}

/// Dimensionless Raman medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumConfig {
    /// Lines in increasing order, contiguous, including the pump.
    pub lines: Vec<CombLine>,
    /// One coupling per adjacent pair of lines, ordered by `upper`.
    pub couplings: Vec<Coupling>,
    /// Nominal number of pump photons per pulse.
    pub pump_photons: f64,
    /// Collisional damping rate times the pulse window, `Γ T`.
    pub damping: f64,
    /// Add the Langevin forcing that balances the damping.
    pub langevin: bool,
    /// Scale factors back to physical units, when the configuration was
    /// derived from a [`PhysicalMedium`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<PhysicalScales>,
}

impl MediumConfig {
    /// Comb with `stokes` Stokes and `anti_stokes` anti-Stokes orders.
    ///
    /// All transitions get the same gain exponent up to the photon-energy
    /// factor `√(ω_n ω_{n-1}) / √(ω_0 ω_{-1})` (higher-frequency transitions
    /// couple more strongly). The propagation constants follow a parabolic
    /// profile `β_n L = -(mismatch / 2) n²`, so that
    /// `(2β_0 - β_{-1} - β_1) L = mismatch`.
    pub fn comb(stokes: u32, anti_stokes: u32, gain: f64, mismatch: f64, raman_shift: f64) -> Result<Self> {
        let lo = -(stokes as i32);
        let hi = anti_stokes as i32;
        let lines: Vec<CombLine> = (lo..=hi)
            .map(|n| CombLine {
                order: n,
                omega: 1.0 + n as f64 * raman_shift,
                beta: -0.5 * mismatch * (n * n) as f64,
            })
            .collect();
        let reference = sqrt((1.0 - raman_shift).max(0.0));
        let couplings = ((lo + 1)..=hi)
            .map(|n| {
                let w_hi = 1.0 + n as f64 * raman_shift;
                let w_lo = 1.0 + (n - 1) as f64 * raman_shift;
                Coupling {
                    upper: n,
                    gain: gain * sqrt((w_hi * w_lo).max(0.0)) / reference,
                    phase: 0.0,
                }
            })
            .collect();
        let config = MediumConfig {
            lines,
            couplings,
            pump_photons: DEFAULT_PUMP_PHOTONS,
            damping: 0.0,
            langevin: false,
            scales: None,
        };
        config.validate()?;
        Ok(config)
    }

    /// First Stokes and first anti-Stokes around the pump.
    pub fn two_mode(gain: f64, mismatch: f64) -> Result<Self> {
        Self::comb(1, 1, gain, mismatch, DEFAULT_RAMAN_SHIFT)
    }

    /// Two-mode medium with the anti-Stokes transition switched off.
    pub fn stokes_only(gain: f64) -> Result<Self> {
        let mut c = Self::comb(1, 1, gain, 0.0, DEFAULT_RAMAN_SHIFT)?;
        c.couplings[1].gain = 0.0;
        c.couplings[0].gain = gain;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lines.is_empty() {
            return Err(Error::config("medium.lines", "no comb lines"));
        }
        for w in self.lines.windows(2) {
            if w[1].order != w[0].order + 1 {
                return Err(Error::config(
                    "medium.lines",
                    "orders must be contiguous and increasing",
                ));
            }
            if !(w[1].omega > w[0].omega) {
                return Err(Error::config("medium.lines", "frequencies must increase with order"));
            }
        }
        if self.line_index(0).is_none() {
            return Err(Error::config("medium.lines", "the pump line (order 0) is missing"));
        }
        if let Some(l) = self.lines.iter().find(|l| !(l.omega > 0.0) || !l.beta.is_finite()) {
            return Err(Error::config(
                "medium.lines",
                format!("line {} has invalid frequency or propagation constant", l.order),
            ));
        }
        let lo = self.lines[0].order;
        let hi = self.lines[self.lines.len() - 1].order;
        if self.couplings.len() != (hi - lo) as usize {
            return Err(Error::config(
                "medium.couplings",
                "need exactly one coupling per adjacent line pair",
            ));
        }
        for (k, c) in self.couplings.iter().enumerate() {
            if c.upper != lo + 1 + k as i32 {
                return Err(Error::config(
                    "medium.couplings",
                    "couplings must be ordered by upper line",
                ));
            }
            if !(c.gain >= 0.0) || !c.gain.is_finite() || !c.phase.is_finite() {
                return Err(Error::config(
                    "medium.gain_exponent",
                    "gain exponents must be finite and nonnegative",
                ));
            }
        }
        if !(self.pump_photons > 0.0) || !self.pump_photons.is_finite() {
            return Err(Error::config("medium.pump_photons", "must be positive"));
        }
        if !(self.damping >= 0.0) || !self.damping.is_finite() {
            return Err(Error::config("medium.damping", "must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn line_index(&self, order: i32) -> Option<usize> {
        let lo = self.lines.first()?.order;
        let k = order - lo;
        (k >= 0 && (k as usize) < self.lines.len()).then_some(k as usize)
    }

    pub fn line(&self, order: i32) -> Option<&CombLine> {
        self.line_index(order).map(|k| &self.lines[k])
    }

    /// Sideband orders (everything except the pump).
    pub fn sideband_orders(&self) -> Vec<i32> {
        self.lines.iter().map(|l| l.order).filter(|&n| n != 0).collect()
    }

    pub fn lowest_order(&self) -> i32 {
        self.lines[0].order
    }

    pub fn highest_order(&self) -> i32 {
        self.lines[self.lines.len() - 1].order
    }

    /// Dimensionless coupling `μ_n` of transition `n` (lines `n`, `n-1`).
    pub fn coupling(&self, upper: i32) -> Option<Complex64> {
        let k = upper - self.lowest_order() - 1;
        if k < 0 {
            return None;
        }
        self.couplings
            .get(k as usize)
            .map(|c| math::cis(c.phase) * (c.gain / (2.0 * sqrt(self.pump_photons))))
    }

    /// `Δβ_n L = (β_n - β_{n-1}) L`.
    pub fn delta_beta(&self, upper: i32) -> Option<f64> {
        Some(self.line(upper)?.beta - self.line(upper - 1)?.beta)
    }

    /// The lumped mismatch `(2β_0 - β_{-1} - β_1) L`, if both first-order
    /// lines exist.
    pub fn mismatch(&self) -> Option<f64> {
        Some(2.0 * self.line(0)?.beta - self.line(-1)?.beta - self.line(1)?.beta)
    }

    pub fn is_two_mode(&self) -> bool {
        self.lowest_order() == -1 && self.highest_order() == 1
    }
}

/// Scale factors recorded by [`normalize_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    pub length_m: f64,
    pub duration_s: f64,
    pub area_m2: f64,
    pub density_m3: f64,
    /// Pump angular frequency, rad/s.
    pub omega_pump: f64,
    /// Photon flux (photons/s) corresponding to `|b|² = 1`.
    pub flux_per_unit: f64,
    /// Excitations per metre corresponding to `|Q|² = 1`.
    pub excitations_per_unit: f64,
    /// `α_{1,n}` recovered from the dimensionless couplings.
    pub alpha1: Vec<Complex64>,
    /// `α_{2,n}` recovered from the dimensionless couplings.
    pub alpha2: Vec<Complex64>,
}

/// Raman medium in physical units.
///
/// `alpha1[k]` couples lines `lo + k + 1` and `lo + k` with
/// `lo = -stokes`. Propagation constants are given per line in 1/m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalMedium {
    pub length_m: f64,
    pub area_m2: f64,
    pub density_m3: f64,
    pub pump_wavelength_m: f64,
    /// Raman shift, rad/s.
    pub raman_shift: f64,
    pub stokes: u32,
    pub anti_stokes: u32,
    pub alpha1: Vec<Complex64>,
    /// Per-line propagation constants (1/m), lowest order first.
    pub beta: Vec<f64>,
    /// Collisional damping, 1/s.
    pub damping_per_s: f64,
    pub langevin: bool,
    pub pulse_duration_s: f64,
    pub pulse_energy_j: f64,
}

impl PhysicalMedium {
    pub fn omega_pump(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.pump_wavelength_m
    }

    pub fn omega(&self, order: i32) -> f64 {
        self.omega_pump() + order as f64 * self.raman_shift
    }

    fn lowest(&self) -> i32 {
        -(self.stokes as i32)
    }

    /// `α_{2,n} = (2πħNω_n/c) α_{1,n}*` for the transition with upper line `n`.
    pub fn alpha2(&self, upper: i32) -> Option<Complex64> {
        let k = upper - self.lowest() - 1;
        let a1 = *self.alpha1.get(usize::try_from(k).ok()?)?;
        Some(a1.conj() * (2.0 * PI * HBAR * self.density_m3 * self.omega(upper) / SPEED_OF_LIGHT))
    }

    /// Conversion factor from `α_{1,n}` to the dimensionless coupling.
    fn coupling_factor(&self, upper: i32) -> f64 {
        let w = sqrt(self.omega(upper) * self.omega(upper - 1));
        2.0 * PI * HBAR / SPEED_OF_LIGHT * sqrt(self.density_m3 / self.area_m2) * w * sqrt(self.length_m)
    }

    pub fn pump_photons(&self) -> f64 {
        self.pulse_energy_j / (HBAR * self.omega_pump())
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("medium.length", self.length_m),
            ("medium.area", self.area_m2),
            ("medium.density", self.density_m3),
            ("medium.pump_wavelength", self.pump_wavelength_m),
            ("medium.raman_shift", self.raman_shift),
            ("pump.duration", self.pulse_duration_s),
            ("pump.energy", self.pulse_energy_j),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(key, "must be positive"));
            }
        }
        let n_lines = (self.stokes + self.anti_stokes + 1) as usize;
        if self.alpha1.len() != n_lines - 1 {
            return Err(Error::config(
                "medium.alpha1",
                "need one coefficient per adjacent line pair",
            ));
        }
        if self.alpha1.iter().any(|a| a.norm() == 0.0 || !a.norm().is_finite()) {
            return Err(Error::config(
                "medium.alpha1",
                "coefficients must be nonzero and finite",
            ));
        }
        if self.beta.len() != n_lines {
            return Err(Error::config("medium.beta", "need one propagation constant per line"));
        }
        if self.omega(self.lowest()) <= 0.0 {
            return Err(Error::config(
                "medium.raman_shift",
                "lowest Stokes line has nonpositive frequency",
            ));
        }
        if !(self.damping_per_s >= 0.0) {
            return Err(Error::config("medium.damping", "must be nonnegative"));
        }
        Ok(())
    }
}

/// A medium description in either unit system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RawMedium {
    Dimensionless(MediumConfig),
    Physical(PhysicalMedium),
}

/// Converts a medium to the dimensionless form used by the integrators.
///
/// Dimensionless input is validated and returned unchanged. Physical input is
/// mapped onto photon-flux units, and the gain exponent of each transition is
/// `2 |α_1| (2πħ/c) √(N/A) √(ω_n ω_{n-1}) √(L N_p)`.
pub fn normalize_config(raw: &RawMedium) -> Result<MediumConfig> {
    match raw {
        RawMedium::Dimensionless(c) => {
            c.validate()?;
            Ok(c.clone())
        }
        RawMedium::Physical(p) => {
            p.validate()?;
            let n_p = p.pump_photons();
            let w0 = p.omega_pump();
            let lo = p.lowest();
            let lines = (0..p.beta.len())
                .map(|k| {
                    let n = lo + k as i32;
                    CombLine {
                        order: n,
                        omega: p.omega(n) / w0,
                        beta: p.beta[k] * p.length_m,
                    }
                })
                .collect();
            let couplings: Vec<Coupling> = p
                .alpha1
                .iter()
                .enumerate()
                .map(|(k, a1)| {
                    let n = lo + 1 + k as i32;
                    let mu = *a1 * p.coupling_factor(n);
                    Coupling {
                        upper: n,
                        gain: 2.0 * mu.norm() * sqrt(n_p),
                        phase: mu.arg(),
                    }
                })
                .collect();
            let alpha1: Vec<Complex64> = couplings
                .iter()
                .map(|c| math::cis(c.phase) * (c.gain / (2.0 * sqrt(n_p)) / p.coupling_factor(c.upper)))
                .collect();
            let alpha2 = couplings
                .iter()
                .zip(&alpha1)
                .map(|(c, a1)| a1.conj() * (2.0 * PI * HBAR * p.density_m3 * p.omega(c.upper) / SPEED_OF_LIGHT))
                .collect();
            let config = MediumConfig {
                lines,
                couplings,
                pump_photons: n_p,
                damping: p.damping_per_s * p.pulse_duration_s,
                langevin: p.langevin,
                scales: Some(PhysicalScales {
                    length_m: p.length_m,
                    duration_s: p.pulse_duration_s,
                    area_m2: p.area_m2,
                    density_m3: p.density_m3,
                    omega_pump: w0,
                    flux_per_unit: 1.0 / p.pulse_duration_s,
                    excitations_per_unit: 1.0 / p.length_m,
                    alpha1,
                    alpha2,
                }),
            };
            config.validate()?;
            Ok(config)
        }
    }
}

/// Temporal shape of the pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpShape {
    /// `exp(-((τ - center)/width)^(2·order))`, unit peak.
    SuperGaussian { order: u32, center: f64, width: f64 },
    /// Piecewise-constant samples spanning `[0, 1]`.
    Samples { values: Vec<f64> },
}

impl Default for PumpShape {
    fn default() -> Self {
        PumpShape::SuperGaussian {
            order: 4,
            center: 0.5,
            width: 0.25,
        }
    }
}

/// Classical, undepleted pump pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    pub shape: PumpShape,
    /// Pulse energy relative to the nominal pump of the medium.
    pub energy_scale: f64,
}

impl Default for PumpPulse {
    fn default() -> Self {
        PumpPulse {
            shape: PumpShape::default(),
            energy_scale: 1.0,
        }
    }
}

const PANELS: usize = 64;
const PANEL_NODES: usize = 16;

impl PumpPulse {
    pub fn new(shape: PumpShape) -> Result<Self> {
        let p = PumpPulse {
            shape,
            energy_scale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            PumpShape::SuperGaussian { order, center, width } => {
                if *order == 0 || *order > 32 {
                    return Err(Error::config("pump.order", "must be between 1 and 32"));
                }
                if !(*width > 0.0) || !width.is_finite() || !center.is_finite() {
                    return Err(Error::config("pump.width", "must be positive and finite"));
                }
            }
            PumpShape::Samples { values } => {
                if values.is_empty() {
                    return Err(Error::config("pump.samples", "empty envelope"));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::config("pump.samples", "envelope must be finite and nonnegative"));
                }
                if values.iter().all(|v| *v == 0.0) {
                    return Err(Error::config("pump.samples", "envelope is identically zero"));
                }
            }
        }
        if !(self.energy_scale >= 0.0) || !self.energy_scale.is_finite() {
            return Err(Error::config("pump.energy_scale", "must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Unit-peak envelope `ε(τ)`.
    pub fn envelope(&self, tau: f64) -> f64 {
        match &self.shape {
            PumpShape::SuperGaussian { order, center, width } => {
                let x = (tau - center) / width;
                math::exp(-math::powi(x * x, *order as i32))
            }
            PumpShape::Samples { values } => {
                if !(0.0..=1.0).contains(&tau) {
                    return 0.0;
                }
                let k = ((tau * values.len() as f64) as usize).min(values.len() - 1);
                values[k]
            }
        }
    }

    /// Average of `ε` over `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        match &self.shape {
            PumpShape::SuperGaussian { .. } => {
                let (x, w) = gauss_legendre(PANEL_NODES);
                let h = 0.5 * (b - a);
                let m = 0.5 * (a + b);
                x.iter().zip(&w).map(|(x, w)| w * self.envelope(m + h * x)).sum::<f64>() * 0.5
            }
            PumpShape::Samples { values } => {
                let n = values.len() as f64;
                let mut acc = 0.0;
                let first = libm::floor(a * n).max(0.0) as usize;
                let last = (libm::ceil(b * n) as usize).min(values.len());
                for (k, v) in values.iter().enumerate().take(last).skip(first) {
                    let lo = (k as f64 / n).max(a);
                    let hi = ((k + 1) as f64 / n).min(b);
                    if hi > lo {
                        acc += v * (hi - lo);
                    }
                }
                acc / (b - a)
            }
        }
    }

    /// `W = ∫_0^1 ε² dτ`.
    pub fn energy_norm(&self) -> f64 {
        self.partial_energy_norm(1.0)
    }

    /// `w(τ) = ∫_0^τ ε² dτ'`.
    pub fn partial_energy_norm(&self, tau: f64) -> f64 {
        match &self.shape {
            PumpShape::SuperGaussian { .. } => {
                let (x, w) = gauss_legendre(PANEL_NODES);
                let h = tau / PANELS as f64;
                let mut acc = 0.0;
                for p in 0..PANELS {
                    let m = (p as f64 + 0.5) * h;
                    for (x, w) in x.iter().zip(&w) {
                        let e = self.envelope(m + 0.5 * h * x);
                        acc += w * e * e;
                    }
                }
                acc * 0.5 * h
            }
            PumpShape::Samples { values } => {
                let n = values.len() as f64;
                let mut acc = 0.0;
                for (k, v) in values.iter().enumerate() {
                    let lo = k as f64 / n;
                    let hi = ((k + 1) as f64 / n).min(tau);
                    if hi <= lo {
                        break;
                    }
                    acc += v * v * (hi - lo);
                }
                acc
            }
        }
    }

    /// Cell-averaged pump amplitude `b_0` (photon-flux units) on the τ cells of
    /// `grid`, for a medium whose nominal pump holds `pump_photons`.
    pub fn cell_amplitudes(&self, grid: &CharacteristicsGrid, pump_photons: f64) -> Vec<f64> {
        let peak = sqrt(self.energy_scale * pump_photons / self.energy_norm());
        let dt = grid.dtau();
        (0..grid.ntau)
            .map(|j| peak * self.cell_average(j as f64 * dt, (j + 1) as f64 * dt))
            .collect()
    }

    /// Peak pump amplitude in photon-flux units.
    pub fn peak_amplitude(&self, pump_photons: f64) -> f64 {
        sqrt(self.energy_scale * pump_photons / self.energy_norm())
    }
}

/// Discretization of the `(z, τ)` plane into `nz × ntau` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicsGrid {
    pub nz: usize,
    pub ntau: usize,
    pub length: f64,
    pub duration: f64,
}

impl CharacteristicsGrid {
    /// Unit square with the given resolution.
    pub fn unit(nz: usize, ntau: usize) -> Result<Self> {
        build_grid(1.0, 1.0, nz, ntau)
    }

    pub fn dz(&self) -> f64 {
        self.length / self.nz as f64
    }

    pub fn dtau(&self) -> f64 {
        self.duration / self.ntau as f64
    }

    /// Cell-center position of z cell `i`, as a fraction of the length.
    pub fn z_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.nz as f64
    }

    /// Cell-center time of τ cell `j`, as a fraction of the window.
    pub fn tau_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.ntau as f64
    }

    /// The same domain with both resolutions multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        CharacteristicsGrid {
            nz: self.nz * factor,
            ntau: self.ntau * factor,
            ..*self
        }
    }

    pub(crate) fn require_unit(&self) -> Result<()> {
        if self.length != 1.0 || self.duration != 1.0 {
            return Err(Error::config(
                "grid",
                "integration grids must span the normalized medium (length = duration = 1)",
            ));
        }
        Ok(())
    }
}

/// Builds a grid with `nz` steps over `length` and `ntau` steps over `duration`.
pub fn build_grid(length: f64, duration: f64, nz: usize, ntau: usize) -> Result<CharacteristicsGrid> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::config("grid.length", "must be positive"));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::config("grid.duration", "must be positive"));
    }
    if nz < 2 {
        return Err(Error::config("grid.nz", "need at least 2 steps"));
    }
    if ntau < 2 {
        return Err(Error::config("grid.ntau", "need at least 2 steps"));
    }
    Ok(CharacteristicsGrid {
        nz,
        ntau,
        length,
        duration,
    })
}

/// Output of one integration: sideband envelopes at `z = L` and the
/// molecular coherence at the end of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub grid: CharacteristicsGrid,
    /// Orders of the stored sidebands.
    pub orders: Vec<i32>,
    /// `fields[k][j]`: line `orders[k]`, τ cell `j`, at the fiber output.
    pub fields: Vec<Vec<Complex64>>,
    /// `coherence[i]`: z cell `i`, at `τ = T`.
    pub coherence: Vec<Complex64>,
    /// Random seed the initial conditions came from, if any.
    pub seed: Option<u64>,
}

impl FieldRecord {
    pub fn line(&self, order: i32) -> Result<&[Complex64]> {
        self.orders
            .iter()
            .position(|&n| n == order)
            .map(|k| self.fields[k].as_slice())
            .ok_or(Error::MissingLine(order))
    }

    /// Output photon number of a line, `Σ |b|² dτ`.
    pub fn photons(&self, order: i32) -> Result<f64> {
        let dt = self.grid.dtau();
        Ok(self.line(order)?.iter().map(|b| b.norm_sqr()).sum::<f64>() * dt)
    }

    /// Molecular excitations left at the end of the window, `Σ |Q|² dz`.
    pub fn excitations(&self) -> f64 {
        self.coherence.iter().map(|q| q.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.fields.len() != self.orders.len()
            || self.fields.iter().any(|f| f.len() != self.grid.ntau)
            || self.coherence.len() != self.grid.nz
        {
            return Err(Error::Shape(format!(
                "field record does not match the {}x{} grid",
                self.grid.nz, self.grid.ntau
            )));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.fields.iter().flatten().all(finite) || !self.coherence.iter().all(finite) {
            return Err(Error::NonFinite("field record"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_steps() {
        let g = build_grid(1.0, 1.0, 100, 100).unwrap();
        assert!((g.dz() - 0.01).abs() < 1e-15);
        assert!((g.dtau() - 0.01).abs() < 1e-15);
        assert!(build_grid(1.0, 1.0, 1, 100).unwrap_err().is_config());
        assert!(build_grid(0.0, 1.0, 10, 10).is_err());
    }

    #[test]
    fn comb_mismatch_and_couplings() {
        let c = MediumConfig::comb(2, 2, 10.0, 30.0, DEFAULT_RAMAN_SHIFT).unwrap();
        assert!((c.mismatch().unwrap() - 30.0).abs() < 1e-12);
        assert_eq!(c.couplings.len(), 4);
        // The first Stokes transition carries the nominal gain.
        assert!((c.couplings[1].gain - 10.0).abs() < 1e-12);
        let mu = c.coupling(0).unwrap();
        assert!((2.0 * mu.norm() * sqrt(c.pump_photons) - 10.0).abs() < 1e-9);
        assert!(c.coupling(-2).is_none());
        assert!(c.coupling(3).is_none());
    }

    #[test]
    fn super_gaussian_norm() {
        let p = PumpPulse::default();
        // Reference value from an independent adaptive quadrature.
        assert!((p.energy_norm() - 0.431_790_931_710_329_7).abs() < 1e-13);
        assert!((p.envelope(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_pump_averages() {
        let p = PumpPulse::new(PumpShape::Samples {
            values: alloc::vec![0.0, 1.0, 2.0, 0.0],
        })
        .unwrap();
        assert!((p.cell_average(0.25, 0.75) - 1.5).abs() < 1e-15);
        assert!((p.cell_average(0.375, 0.625) - 1.5).abs() < 1e-15);
        assert!((p.energy_norm() - 1.25).abs() < 1e-15);
    }
}
