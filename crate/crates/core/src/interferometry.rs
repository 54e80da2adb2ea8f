//! Virtual two-arm interferometer.
//!
//! The outputs of the two fibers are overlapped on a 1-D detector with a
//! small angle between the beams. For a line with envelopes `u₁(τ)`, `u₂(τ)`
//! the time-integrated trace is
//!
//! ```text
//! I(x) = G(x) [W₁ + W₂ + 2η|J| cos(k x + arg J + θ)] + noise
//! W_i = Σ|u_i|² dτ,   J = Σ u₁ u₂* dτ
//! ```
//!
//! with `x` measured from the detector center, `G` the Gaussian beam profile,
//! `η` a mode-overlap factor and `θ` the interferometer piston. The fit
//! recovers `V = 2η|J|/(W₁+W₂)` and `φ = arg J + θ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::ShotEnsemble;
use crate::math::{atan2, cos, exp, sin, sqrt, wrap_phase};
use crate::rng::{normal, substream, Purpose, StreamId};
use crate::{Complex64, Error, Result};

/// Stream tag of the per-shot piston draw.
const PISTON_TAG: i32 = 127;

/// Detector and interferometer parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub n_pixels: usize,
    /// Fringe spatial frequency, rad/pixel.
    pub fringe_wavenumber: f64,
    /// Gaussian beam radius (standard deviation), pixels.
    pub beam_width: f64,
    /// Standard deviation of the per-shot piston phase, rad (applied to the
    /// pump; line `n` sees it scaled by `ω_n/ω_0`).
    pub piston_jitter: f64,
    /// Additive detector noise, counts.
    pub additive_noise: f64,
    /// Mode-overlap visibility factor `η ∈ (0, 1]`.
    pub visibility_degradation: f64,
    /// Fit the fringe wavenumber instead of using the known value.
    pub fit_wavenumber: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let beam_width = 32.0;
        DetectorConfig {
            n_pixels: 256,
            // Six fringe periods across ±2σ of the beam.
            fringe_wavenumber: 2.0 * PI * 6.0 / (4.0 * beam_width),
            beam_width,
            piston_jitter: 0.0,
            additive_noise: 0.0,
            visibility_degradation: 1.0,
            fit_wavenumber: false,
        }
    }
}

/// Half width at half maximum of the measured pump phase histogram.
pub const PUMP_PHASE_HWHM: f64 = 0.78;
/// Mean visibility of the measured pump fringes.
pub const PUMP_VISIBILITY: f64 = 0.85;

impl DetectorConfig {
    /// Settings that emulate the measured pump fringes: the mode-overlap
    /// factor equals the mean pump visibility, and the piston jitter is
    /// chosen so that the shot-to-shot difference of pump phases has the
    /// measured half width.
    pub fn pump_calibrated() -> Self {
        let hwhm_per_sigma = sqrt(2.0 * libm::log(2.0));
        DetectorConfig {
            visibility_degradation: PUMP_VISIBILITY,
            piston_jitter: PUMP_PHASE_HWHM / (hwhm_per_sigma * sqrt(2.0)),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.fringe_wavenumber;
        if !(k > 0.0 && k < PI) {
            return Err(Error::config("detector.fringe_wavenumber", "must lie in (0, π)"));
        }
        if 2.0 * PI / k < 8.0 {
            return Err(Error::config(
                "detector.fringe_wavenumber",
                "need at least 8 pixels per fringe",
            ));
        }
        if !(self.beam_width > 0.0) || !self.beam_width.is_finite() {
            return Err(Error::config("detector.beam_width", "must be positive"));
        }
        if 4.0 * self.beam_width * k / (2.0 * PI) < 4.0 {
            return Err(Error::config(
                "detector.beam_width",
                "need at least 4 fringes across the beam",
            ));
        }
        if (self.n_pixels as f64) < 4.0 * self.beam_width {
            return Err(Error::config("detector.n_pixels", "detector must cover ±2 beam widths"));
        }
        if !(self.visibility_degradation > 0.0 && self.visibility_degradation <= 1.0) {
            return Err(Error::config("detector.visibility_degradation", "must lie in (0, 1]"));
        }
        if !(self.piston_jitter >= 0.0) || !(self.additive_noise >= 0.0) {
            return Err(Error::config("detector", "noise levels must be nonnegative"));
        }
        Ok(())
    }

    /// Pixel coordinate relative to the detector center.
    pub fn position(&self, pixel: usize) -> f64 {
        pixel as f64 - 0.5 * (self.n_pixels as f64 - 1.0)
    }

    /// Beam profile `G(x)`, unit peak.
    pub fn beam_profile(&self, pixel: usize) -> f64 {
        let x = self.position(pixel);
        exp(-x * x / (2.0 * self.beam_width * self.beam_width))
    }
}

/// One synthetic detector trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interferogram {
    pub intensity: Vec<f64>,
    pub line: i32,
    pub shot: usize,
    pub fiber_pair: (u8, u8),
}

/// Result of fitting one interferogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub visibility: f64,
    /// Fringe phase in `(-π, π]`; meaningless when `success` is false.
    pub phase: f64,
    /// RMS fit residual relative to the trace maximum.
    pub residual: f64,
    pub success: bool,
    /// Wavenumber used in the fit.
    pub wavenumber: f64,
}

/// `W₁`, `W₂` and `J` of two envelopes.
pub fn overlap(amp1: &[Complex64], amp2: &[Complex64], dtau: f64) -> Result<(f64, f64, Complex64)> {
    if amp1.len() != amp2.len() {
        return Err(Error::Shape("interfering envelopes have different lengths".into()));
    }
    let w1 = amp1.iter().map(|a| a.norm_sqr()).sum::<f64>() * dtau;
    let w2 = amp2.iter().map(|a| a.norm_sqr()).sum::<f64>() * dtau;
    let j = amp1.iter().zip(amp2).map(|(a, b)| a * b.conj()).sum::<Complex64>() * dtau;
    Ok((w1, w2, j))
}

/// Synthesizes a trace with an explicit piston phase; `rng` supplies the
/// additive noise only.
pub fn synthesize_with_piston<R: Rng + ?Sized>(
    amp1: &[Complex64],
    amp2: &[Complex64],
    dtau: f64,
    det: &DetectorConfig,
    piston: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (w1, w2, j) = overlap(amp1, amp2, dtau)?;
    let fringe = 2.0 * det.visibility_degradation * j.norm();
    let phase = j.arg() + piston;
    Ok((0..det.n_pixels)
        .map(|p| {
            let x = det.position(p);
            let clean = det.beam_profile(p) * (w1 + w2 + fringe * cos(det.fringe_wavenumber * x + phase));
            let noisy = if det.additive_noise > 0.0 {
                clean + det.additive_noise * normal(rng)
            } else {
                clean
            };
            noisy.max(0.0)
        })
        .collect())
}

/// Synthesizes a trace, drawing the piston from `N(0, piston_jitter²)`.
pub fn synthesize_fringe<R: Rng + ?Sized>(
    amp1: &[Complex64],
    amp2: &[Complex64],
    dtau: f64,
    det: &DetectorConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let piston = if det.piston_jitter > 0.0 {
        det.piston_jitter * normal(rng)
    } else {
        0.0
    };
    synthesize_with_piston(amp1, amp2, dtau, det, piston, rng)
}

struct LinearFit {
    dc: f64,
    c: f64,
    d: f64,
    sse: f64,
    cov_cd: [[f64; 2]; 2],
}

/// Least squares of `I ≈ G (a + c cos kx + d sin kx)`, which is the same as
/// fitting the profile-normalized trace `I/G` with weights `G²`.
fn fit_linear(trace: &[f64], det: &DetectorConfig, k: f64) -> Option<LinearFit> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (p, &y) in trace.iter().enumerate() {
        let g = det.beam_profile(p);
        let x = det.position(p);
        let row = [g, g * cos(k * x), g * sin(k * x)];
        for r in 0..3 {
            atb[r] += row[r] * y;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let inv = invert3(&ata)?;
    let coef: [f64; 3] = core::array::from_fn(|r| (0..3).map(|c| inv[r][c] * atb[c]).sum());
    let sse = trace
        .iter()
        .enumerate()
        .map(|(p, &y)| {
            let g = det.beam_profile(p);
            let x = det.position(p);
            let r = y - g * (coef[0] + coef[1] * cos(k * x) + coef[2] * sin(k * x));
            r * r
        })
        .sum();
    Some(LinearFit {
        dc: coef[0],
        c: coef[1],
        d: coef[2],
        sse,
        cov_cd: [[inv[1][1], inv[1][2]], [inv[2][1], inv[2][2]]],
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            inv[r][c] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
        }
    }
    Some(inv)
}

/// Fits a trace to the beam profile times a sinusoid.
///
/// The fit fails (`success = false`) when the DC term is not positive or
/// the fringe amplitude is not significant: `b/a` below `1e-9` or below three
/// standard errors of the fitted amplitude.
pub fn extract_visibility_phase(trace: &[f64], det: &DetectorConfig) -> Result<FringeFit> {
    if trace.len() != det.n_pixels {
        return Err(Error::Shape("trace length differs from the detector".into()));
    }
    if trace.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("interferogram"));
    }
    let k0 = det.fringe_wavenumber;
    let k = if det.fit_wavenumber {
        golden_section(
            |k| fit_linear(trace, det, k).map_or(f64::INFINITY, |f| f.sse),
            0.9 * k0,
            1.1 * k0,
        )
    } else {
        k0
    };
    let failed = FringeFit {
        visibility: 0.0,
        phase: 0.0,
        residual: f64::NAN,
        success: false,
        wavenumber: k,
    };
    let Some(fit) = fit_linear(trace, det, k) else {
        return Ok(failed);
    };
    let n = trace.len() as f64;
    let peak = trace.iter().cloned().fold(0.0, f64::max);
    let residual = if peak > 0.0 { sqrt(fit.sse / n) / peak } else { 0.0 };
    let b = sqrt(fit.c * fit.c + fit.d * fit.d);
    let sigma2 = fit.sse / (n - 3.0);
    let se_b = if b > 0.0 {
        let (c, d) = (fit.c / b, fit.d / b);
        let v = c * c * fit.cov_cd[0][0] + 2.0 * c * d * fit.cov_cd[0][1] + d * d * fit.cov_cd[1][1];
        sqrt((sigma2 * v).max(0.0))
    } else {
        f64::INFINITY
    };
    if !(fit.dc > 0.0) || b / fit.dc < 1e-9 || b < 3.0 * se_b {
        return Ok(FringeFit { residual, ..failed });
    }
    Ok(FringeFit {
        visibility: (b / fit.dc).clamp(0.0, 1.0),
        phase: wrap_phase(atan2(-fit.d, fit.c)),
        residual,
        success: true,
        wavenumber: k,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    0.5 * (a + b)
}

/// One row of the fit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub shot: usize,
    pub line: i32,
    pub fiber_pair: (u8, u8),
    pub fit: FringeFit,
}

/// Per-shot piston of the pump line.
pub fn shot_piston(det: &DetectorConfig, master_seed: u64, shot: usize) -> f64 {
    if det.piston_jitter == 0.0 {
        return 0.0;
    }
    let mut rng = substream(master_seed, StreamId::new(shot, 0, Purpose::Detector, PISTON_TAG));
    det.piston_jitter * normal(&mut rng)
}

/// Fits the pump and the requested lines of one shot of a two-fiber
/// ensemble.
pub fn fit_shot(ensemble: &ShotEnsemble, det: &DetectorConfig, lines: &[i32], shot: usize) -> Result<Vec<FitRow>> {
    if ensemble.fibers() != 2 {
        return Err(Error::config("ensemble.fibers", "the interferometer needs two fibers"));
    }
    let seed = ensemble.spec.master_seed;
    let theta = shot_piston(det, seed, shot);
    let dtau = ensemble.grid.dtau();
    let mut rows = Vec::with_capacity(lines.len() + 1);
    let pump = ensemble.pump_amplitude(shot);
    let mut all = Vec::with_capacity(lines.len() + 1);
    all.push(0);
    all.extend(lines.iter().copied().filter(|&n| n != 0));
    for &line in &all {
        let omega = ensemble.config.line(line).ok_or(Error::MissingLine(line))?.omega;
        let mut rng = substream(seed, StreamId::new(shot, 0, Purpose::Detector, line));
        let trace = if line == 0 {
            synthesize_with_piston(&pump, &pump, dtau, det, theta * omega, &mut rng)?
        } else {
            synthesize_with_piston(
                ensemble.amplitude(shot, 0, line)?,
                ensemble.amplitude(shot, 1, line)?,
                dtau,
                det,
                theta * omega,
                &mut rng,
            )?
        };
        rows.push(FitRow {
            shot,
            line,
            fiber_pair: (0, 1),
            fit: extract_visibility_phase(&trace, det)?,
        });
    }
    Ok(rows)
}

/// Fits every shot of a two-fiber ensemble sequentially.
pub fn run_virtual_experiment(ensemble: &ShotEnsemble, det: &DetectorConfig, lines: &[i32]) -> Result<Vec<FitRow>> {
    det.validate()?;
    let mut rows = Vec::new();
    for shot in 0..ensemble.shots() {
        rows.extend(fit_shot(ensemble, det, lines, shot)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructed_trace_round_trip() {
        let det = DetectorConfig::default();
        let trace: Vec<f64> = (0..det.n_pixels)
            .map(|p| det.beam_profile(p) * (1.0 + 0.5 * cos(det.fringe_wavenumber * det.position(p) + 1.0)))
            .collect();
        let fit = extract_visibility_phase(&trace, &det).unwrap();
        assert!(fit.success);
        assert!((fit.visibility - 0.5).abs() < 1e-6);
        assert!((fit.phase - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dc_trace_fails() {
        let det = DetectorConfig::default();
        let trace: Vec<f64> = (0..det.n_pixels).map(|p| 3.0 * det.beam_profile(p)).collect();
        assert!(!extract_visibility_phase(&trace, &det).unwrap().success);
    }

    #[test]
    fn fitted_wavenumber_recovers_offset() {
        let det = DetectorConfig {
            fit_wavenumber: true,
            ..DetectorConfig::default()
        };
        let k = det.fringe_wavenumber * 1.03;
        let trace: Vec<f64> = (0..det.n_pixels)
            .map(|p| det.beam_profile(p) * (1.0 + 0.7 * cos(k * det.position(p) - 2.0)))
            .collect();
        let fit = extract_visibility_phase(&trace, &det).unwrap();
        assert!((fit.wavenumber - k).abs() < 1e-6);
        assert!((fit.visibility - 0.7).abs() < 1e-6);
        assert!((fit.phase + 2.0).abs() < 1e-5);
    }

    #[test]
    fn invert3_identity() {
        let m = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let inv = invert3(&m).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| m[r][k] * inv[k][c]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
