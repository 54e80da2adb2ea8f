//! Shot-ensemble statistics.
//!
//! Phases are wrapped to `(-π, π]` throughout. For a line `n` the fiber
//! difference `Δφ_n = φ_{n,1} - φ_{n,2}` is formed first, then the
//! successive-shot difference `D_n^{(i)} = Δφ_n^{(i+1)} - Δφ_n^{(i)}`, which
//! removes any offset that is constant across shots. The phase-correlation
//! statistic is `Φ_nm = m·D_n - n·D_m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::interferometry::FitRow;
use crate::math::{cis, exp, ln, sqrt, wrap_phase};
use crate::rng::{normal, substream, Purpose, StreamId};
use crate::{Complex64, Error, Result};

/// Default number of phase histogram bins; odd so that one bin is centered
/// on zero.
pub const PHASE_BINS: usize = 37;
/// Default number of visibility histogram bins over `[0, 1]`.
pub const VISIBILITY_BINS: usize = 20;
/// Significance level of the uniformity test.
pub const UNIFORMITY_LEVEL: f64 = 0.05;

/// Minimum sample sizes.
pub const MIN_UNIFORMITY_SAMPLES: usize = 100;
pub const MIN_VISIBILITY_FITS: usize = 100;
pub const MIN_ENERGY_SHOTS: usize = 1000;

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Histogram over `[lo, hi]`; values outside are clamped into the end
    /// bins, non-finite values are skipped.
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::config("histogram", "need at least one bin and hi > lo"));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0; bins];
        for v in values.iter().filter(|v| v.is_finite()) {
            let k = ((v - lo) / width) as isize;
            counts[k.clamp(0, bins as isize - 1) as usize] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Center of the fullest bin (the first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        0.5 * (self.edges[best] + self.edges[best + 1])
    }
}

/// Summary of a circular sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularStats {
    pub samples: usize,
    /// Resultant length `|⟨e^{iX}⟩|`.
    pub resultant: f64,
    /// Circular mean `arg ⟨e^{iX}⟩`.
    pub mean: f64,
    /// Width of the wrapped Gaussian with the same resultant,
    /// `√(-2 ln R)`; infinite when `R = 0`.
    pub gaussian_width: f64,
    pub histogram: Histogram,
}

/// Mean unit phasor of a sample.
pub fn mean_phasor(values: &[f64]) -> Complex64 {
    values.iter().map(|&x| cis(x)).sum::<Complex64>() / values.len() as f64
}

/// Resultant length, circular mean and 37-bin histogram.
pub fn circular_stats(values: &[f64]) -> Result<CircularStats> {
    circular_stats_with_bins(values, PHASE_BINS)
}

pub fn circular_stats_with_bins(values: &[f64], bins: usize) -> Result<CircularStats> {
    if values.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phase sample"));
    }
    let z = mean_phasor(values);
    let resultant = z.norm().min(1.0);
    let wrapped: Vec<f64> = values.iter().map(|&x| wrap_phase(x)).collect();
    Ok(CircularStats {
        samples: values.len(),
        resultant,
        mean: if resultant > 0.0 { wrap_phase(z.arg()) } else { 0.0 },
        gaussian_width: if resultant > 0.0 {
            sqrt((-2.0 * ln(resultant)).max(0.0))
        } else {
            f64::INFINITY
        },
        histogram: Histogram::new(&wrapped, -PI, PI, bins)?,
    })
}

/// Outcome of the Rayleigh test for uniformity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityTest {
    pub samples: usize,
    pub resultant: f64,
    /// `R·√N`.
    pub statistic: f64,
    /// Approximate p-value of `Z = N R²` under uniformity.
    pub p_value: f64,
    /// True when uniformity is rejected at [`UNIFORMITY_LEVEL`].
    pub rejected: bool,
}

/// Rayleigh test. The p-value uses the large-sample expansion
/// `p ≈ e^{-Z} [1 + (2Z - Z²)/(4N) - (24Z - 132Z² + 76Z³ - 9Z⁴)/(288N²)]`.
pub fn uniformity_test(values: &[f64]) -> Result<UniformityTest> {
    if values.len() < MIN_UNIFORMITY_SAMPLES {
        return Err(Error::InsufficientData {
            need: MIN_UNIFORMITY_SAMPLES,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let r = mean_phasor(values).norm();
    let z = n * r * r;
    let p = exp(-z)
        * (1.0 + (2.0 * z - z * z) / (4.0 * n)
            - (24.0 * z - 132.0 * z * z + 76.0 * z * z * z - 9.0 * z * z * z * z) / (288.0 * n * n));
    let p = p.clamp(0.0, 1.0);
    Ok(UniformityTest {
        samples: values.len(),
        resultant: r,
        statistic: r * sqrt(n),
        p_value: p,
        rejected: p < UNIFORMITY_LEVEL,
    })
}

/// Fiber-difference phases per line and shot; `None` marks a failed fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub lines: Vec<i32>,
    pub shots: usize,
    /// `differences[k][i] = Δφ_{lines[k]}^{(i)}`.
    pub differences: Vec<Vec<Option<f64>>>,
}

impl PhaseRecord {
    /// Record from per-fiber phases `phases[k][i] = [φ_{n,1}, φ_{n,2}]`.
    pub fn from_fiber_phases(lines: &[i32], phases: &[Vec<Option<[f64; 2]>>]) -> Result<Self> {
        let differences = phases
            .iter()
            .map(|line| line.iter().map(|p| p.map(|[a, b]| wrap_phase(a - b))).collect())
            .collect();
        Self::from_differences(lines, differences)
    }

    /// Record from phases that are already fiber differences, such as
    /// fringe phases.
    pub fn from_differences(lines: &[i32], differences: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if lines.len() != differences.len() {
            return Err(Error::Shape("one phase sequence per line is required".into()));
        }
        let shots = differences.first().map_or(0, |d| d.len());
        if differences.iter().any(|d| d.len() != shots) {
            return Err(Error::Shape("phase sequences differ in length".into()));
        }
        Ok(PhaseRecord {
            lines: lines.to_vec(),
            shots,
            differences: differences
                .into_iter()
                .map(|d| d.into_iter().map(|p| p.map(wrap_phase)).collect())
                .collect(),
        })
    }

    /// Record of fringe phases from a fit table; failed fits become `None`.
    pub fn from_fits(rows: &[FitRow], lines: &[i32], shots: usize) -> Result<Self> {
        let mut differences = vec![vec![None; shots]; lines.len()];
        for row in rows {
            let Some(k) = lines.iter().position(|&n| n == row.line) else {
                continue;
            };
            if row.shot >= shots {
                return Err(Error::Shape(alloc::format!(
                    "fit row for shot {} beyond {shots}",
                    row.shot
                )));
            }
            if row.fit.success {
                differences[k][row.shot] = Some(row.fit.phase);
            }
        }
        Self::from_differences(lines, differences)
    }

    pub fn line(&self, order: i32) -> Result<&[Option<f64>]> {
        let k = self
            .lines
            .iter()
            .position(|&n| n == order)
            .ok_or(Error::MissingLine(order))?;
        Ok(&self.differences[k])
    }

    /// Phases measured against a reference line (usually the pump, order 0).
    ///
    /// An interferometer piston `θ` adds `ω_n θ = θ + n·(ω_1 - ω_0)·θ` to
    /// line `n`; subtracting the pump phase removes the first term, and the
    /// remainder obeys the `n`-proportional phase law. The reference line is
    /// dropped from the result.
    pub fn relative_to(&self, reference: i32) -> Result<Self> {
        let r = self.line(reference)?.to_vec();
        let mut lines = Vec::new();
        let mut differences = Vec::new();
        for (k, &n) in self.lines.iter().enumerate() {
            if n == reference {
                continue;
            }
            lines.push(n);
            differences.push(
                self.differences[k]
                    .iter()
                    .zip(&r)
                    .map(|(p, q)| Some(p.as_ref()? - q.as_ref()?))
                    .collect(),
            );
        }
        Self::from_differences(&lines, differences)
    }

    /// `D_n^{(i)}`, `shots - 1` entries.
    pub fn successive(&self, order: i32) -> Result<Vec<Option<f64>>> {
        let d = self.line(order)?;
        Ok(d.windows(2)
            .map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(wrap_phase(b - a)),
                _ => None,
            })
            .collect())
    }
}

/// `Φ_nm = m·D_n - n·D_m` for every shot pair where both lines were
/// measured, wrapped.
pub fn phi_nm(record: &PhaseRecord, n: i32, m: i32) -> Result<Vec<f64>> {
    if record.shots < 2 {
        return Err(Error::InsufficientData {
            need: 2,
            got: record.shots,
        });
    }
    let dn = record.successive(n)?;
    let dm = record.successive(m)?;
    Ok(dn
        .iter()
        .zip(&dm)
        .filter_map(|(a, b)| Some(wrap_phase(m as f64 * (*a)? - n as f64 * (*b)?)))
        .collect())
}

/// Resultant length of the per-shot phase sum `φ_a + φ_b`.
pub fn phase_sum_resultant(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape("phase sequences differ in length".into()));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    Ok(mean_phasor(&sum).norm())
}

/// Fringe visibility summary of one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityStats {
    pub line: i32,
    pub fits: usize,
    pub failed: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub histogram: Histogram,
}

/// Mean, spread and histogram of successful visibility fits of a line.
pub fn visibility_stats(rows: &[FitRow], line: i32) -> Result<VisibilityStats> {
    let all: Vec<&FitRow> = rows.iter().filter(|r| r.line == line).collect();
    let v: Vec<f64> = all.iter().filter(|r| r.fit.success).map(|r| r.fit.visibility).collect();
    if v.len() < MIN_VISIBILITY_FITS {
        return Err(Error::InsufficientData {
            need: MIN_VISIBILITY_FITS,
            got: v.len(),
        });
    }
    let (mean, std_dev) = mean_std(&v);
    Ok(VisibilityStats {
        line,
        fits: v.len(),
        failed: all.len() - v.len(),
        mean,
        std_dev,
        histogram: Histogram::new(&v, 0.0, 1.0, VISIBILITY_BINS)?,
    })
}

/// Per-shot energy statistics of one line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub shots: usize,
    pub mean: f64,
    /// `⟨W²⟩/⟨W⟩²`; 2 for an exponential distribution, 1 for a fixed energy.
    pub normalized_second_moment: f64,
    /// Kolmogorov–Smirnov distance to the exponential with the sample mean.
    pub ks_distance: f64,
    /// Pearson correlation with the partner line's energies, when given.
    pub partner_correlation: Option<f64>,
}

/// Energy statistics of `energies`, optionally correlated against a partner
/// line sampled on the same shots.
pub fn energy_stats(energies: &[f64], partner: Option<&[f64]>) -> Result<EnergyStats> {
    if energies.len() < MIN_ENERGY_SHOTS {
        return Err(Error::InsufficientData {
            need: MIN_ENERGY_SHOTS,
            got: energies.len(),
        });
    }
    if energies.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Domain("energies must be finite and nonnegative".into()));
    }
    let n = energies.len() as f64;
    let mean = energies.iter().sum::<f64>() / n;
    let second = energies.iter().map(|w| w * w).sum::<f64>() / n;
    let partner_correlation = match partner {
        Some(p) if p.len() != energies.len() => return Err(Error::Shape("partner energies differ in length".into())),
        Some(p) => Some(pearson(energies, p)?),
        None => None,
    };
    Ok(EnergyStats {
        shots: energies.len(),
        mean,
        normalized_second_moment: second / (mean * mean),
        ks_distance: ks_exponential(energies, mean),
        partner_correlation,
    })
}

/// Two-sided KS distance between the sample and `1 - e^{-x/mean}`.
pub fn ks_exponential(values: &[f64], mean: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - exp(-x / mean);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InsufficientData {
            need: 2,
            got: a.len().min(b.len()),
        });
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::Domain("correlation of a constant sequence".into()));
    }
    let n = a.len() as f64;
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0);
    Ok(cov / (sa * sb))
}

/// Sample mean and (unbiased) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, sqrt(var))
}

/// Generator of per-fiber line phases that follow `φ_n = n·φ_QF + δ_n`.
///
/// Each fiber draws its own uniform `φ_QF` per shot. `δ_n` may differ
/// between fibers but is fixed across shots. Per-line jitter is Gaussian
/// with variance `σ²/2` per fiber, so the fiber difference carries `σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPhaseModel {
    pub lines: Vec<i32>,
    /// `offsets[k] = [δ_{n,1}, δ_{n,2}]` for `lines[k]`.
    pub offsets: Vec<[f64; 2]>,
    /// `σ`, rad.
    pub jitter: f64,
}

impl SyntheticPhaseModel {
    pub fn new(lines: &[i32], offsets: Vec<[f64; 2]>, jitter: f64) -> Result<Self> {
        if lines.len() != offsets.len() {
            return Err(Error::Shape("one offset pair per line is required".into()));
        }
        if !(jitter >= 0.0) || !jitter.is_finite() {
            return Err(Error::config("synthetic.jitter", "must be finite and nonnegative"));
        }
        Ok(SyntheticPhaseModel {
            lines: lines.to_vec(),
            offsets,
            jitter,
        })
    }

    /// Per-fiber phases of one shot, `[φ_{n,1}, φ_{n,2}]` per line.
    pub fn shot_phases(&self, master_seed: u64, shot: usize) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.lines.len()];
        for fiber in 0..2 {
            let mut rng = substream(master_seed, StreamId::new(shot, fiber, Purpose::Synthetic, 0));
            let qf: f64 = rng.random_range(-PI..PI);
            for (k, &n) in self.lines.iter().enumerate() {
                let jitter = if self.jitter > 0.0 {
                    let mut r = substream(master_seed, StreamId::new(shot, fiber, Purpose::Synthetic, n));
                    self.jitter * sqrt(0.5) * normal(&mut r)
                } else {
                    0.0
                };
                out[k][fiber] = wrap_phase(n as f64 * qf + self.offsets[k][fiber] + jitter);
            }
        }
        out
    }

    /// Phase record of `shots` synthetic shots.
    pub fn generate(&self, master_seed: u64, shots: usize) -> Result<PhaseRecord> {
        let mut phases = vec![Vec::with_capacity(shots); self.lines.len()];
        for shot in 0..shots {
            for (k, p) in self.shot_phases(master_seed, shot).into_iter().enumerate() {
                phases[k].push(Some(p));
            }
        }
        PhaseRecord::from_fiber_phases(&self.lines, &phases)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_has_unit_resultant() {
        let s = circular_stats(&[0.3; 50]).unwrap();
        assert!((s.resultant - 1.0).abs() < 1e-12);
        assert!((s.mean - 0.3).abs() < 1e-12);
        assert_eq!(s.histogram.total(), 50);
    }

    #[test]
    fn antipodal_masses_cancel() {
        let v = [PI / 2.0, -PI / 2.0, PI / 2.0, -PI / 2.0];
        assert!(circular_stats(&v).unwrap().resultant < 1e-15);
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(matches!(circular_stats(&[]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn middle_phase_bin_is_centered_on_zero() {
        let h = Histogram::new(&[0.0], -PI, PI, PHASE_BINS).unwrap();
        assert!(h.centers()[PHASE_BINS / 2].abs() < 1e-12);
        assert_eq!(h.counts[PHASE_BINS / 2], 1);
        assert_eq!(h.mode(), h.centers()[PHASE_BINS / 2]);
    }

    #[test]
    fn constant_phases_reject_uniformity() {
        assert!(uniformity_test(&[1.0; 200]).unwrap().rejected);
        assert!(uniformity_test(&[1.0; 10]).is_err());
    }

    #[test]
    fn exact_phase_law_gives_zero_phi() {
        let m = SyntheticPhaseModel::new(&[1, -1, 2], vec![[0.4, -1.0], [2.0, 0.1], [-0.7, 0.3]], 0.0).unwrap();
        let rec = m.generate(9, 50).unwrap();
        for (a, b) in [(1, -1), (2, 1), (2, -1)] {
            let phi = phi_nm(&rec, a, b).unwrap();
            assert_eq!(phi.len(), 49);
            assert!(phi.iter().all(|p| p.abs() < 1e-9));
        }
    }

    #[test]
    fn ks_of_a_constant_is_large() {
        assert!(ks_exponential(&[1.0; 100], 1.0) > 0.3);
    }
}
