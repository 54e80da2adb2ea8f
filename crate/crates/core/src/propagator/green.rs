//! Analytic transient Stokes amplifier (anti-Stokes decoupled).
//!
//! With `g = μ_0 · max b_0`, `κ = |g|²`, unit-peak pump shape `ε` and
//! `w(τ) = ∫_0^τ ε²`, the Stokes channel `s = b_{-1}*` at the fiber output is
//!
//! ```text
//! s(1, τ) = s(0, τ)
//!         + ε(τ) ∫_0^τ dτ' ε(τ') κ R1(κ (w(τ) - w(τ'))) s(0, τ')
//!         - i g* ε(τ) ∫_0^1 dz' e^{-iΔβ_0 z'} R0(κ (1 - z') w(τ)) Q(z', 0)
//! ```
//!
//! with `R0`, `R1` from [`crate::bessel`].

use alloc::vec;
use alloc::vec::Vec;

use crate::bessel::{r0, r1};
use crate::math::{cis, gauss_legendre, sqrt};
use crate::model::{CharacteristicsGrid, MediumConfig, PumpPulse};
use crate::{Complex64, Error, Result};

use super::InitialConditions;

const EDGE_NODES: usize = 16;

/// Reference solution of the Stokes-only problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenKernelOracle {
    coupling: Complex64,
    mismatch: f64,
    pump: PumpPulse,
}

impl GreenKernelOracle {
    /// Oracle for the first Stokes transition of `config`; the anti-Stokes
    /// coupling is ignored.
    pub fn new(config: &MediumConfig, pump: &PumpPulse) -> Result<Self> {
        let mu = config.coupling(0).ok_or(Error::MissingLine(-1))?;
        let mismatch = config.delta_beta(0).ok_or(Error::MissingLine(-1))?;
        Ok(GreenKernelOracle {
            coupling: mu * pump.peak_amplitude(config.pump_photons),
            mismatch,
            pump: pump.clone(),
        })
    }

    /// Oracle with amplitude gain exponent `gain` and no mismatch.
    pub fn from_gain(gain: f64, pump: &PumpPulse) -> Self {
        GreenKernelOracle {
            coupling: Complex64::new(gain / (2.0 * sqrt(pump.energy_norm())), 0.0),
            mismatch: 0.0,
            pump: pump.clone(),
        }
    }

    /// `g`, the coupling at the pump peak.
    pub fn coupling(&self) -> Complex64 {
        self.coupling
    }

    /// Field-to-field kernel (the part beyond the identity) at the fiber
    /// output. Vanishes at zero gain, where the output equals the seed.
    pub fn kernel(&self, tau: f64, tau_p: f64) -> Result<Complex64> {
        if !(tau >= tau_p && tau_p >= 0.0) {
            return Err(Error::Domain(alloc::format!(
                "kernel needs tau >= tau' >= 0, got ({tau}, {tau_p})"
            )));
        }
        let kappa = self.coupling.norm_sqr();
        let y = kappa * (self.pump.partial_energy_norm(tau) - self.pump.partial_energy_norm(tau_p));
        let e = self.pump.envelope(tau) * self.pump.envelope(tau_p);
        Ok(Complex64::new(kappa * e * r1(y.max(0.0))?, 0.0))
    }

    /// Kernel from the initial coherence at `z'` to the output field at `τ`.
    pub fn coherence_kernel(&self, tau: f64, z_p: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&z_p) || !(tau >= 0.0) {
            return Err(Error::Domain(alloc::format!(
                "coherence kernel needs 0 <= z' <= 1 and tau >= 0, got ({tau}, {z_p})"
            )));
        }
        let kappa = self.coupling.norm_sqr();
        let y = kappa * (1.0 - z_p) * self.pump.partial_energy_norm(tau);
        let i = Complex64::new(0.0, 1.0);
        Ok(-i * self.coupling.conj() * self.pump.envelope(tau) * cis(-self.mismatch * z_p) * r0(y)?)
    }

    /// Cell-averaged responses of the output to piecewise-constant seeds,
    /// evaluated with `nodes`-point Gauss–Legendre rules per cell.
    pub fn responses(&self, grid: &CharacteristicsGrid, nodes: usize) -> Result<OracleResponses> {
        let nt = grid.ntau;
        let nz = grid.nz;
        let dt = grid.dtau();
        let dz = grid.dz();
        let kappa = self.coupling.norm_sqr();
        let (x, wq) = gauss_legendre(nodes);
        let (xe, we) = gauss_legendre(EDGE_NODES);
        let eps2_integral = |a: f64, b: f64| -> f64 {
            let h = 0.5 * (b - a);
            let m = 0.5 * (a + b);
            xe.iter()
                .zip(&we)
                .map(|(x, w)| {
                    let e = self.pump.envelope(m + h * x);
                    w * e * e
                })
                .sum::<f64>()
                * h
        };
        let mut w_edge = vec![0.0; nt + 1];
        for j in 0..nt {
            w_edge[j + 1] = w_edge[j] + eps2_integral(j as f64 * dt, (j + 1) as f64 * dt);
        }
        let w_at = |j: usize, t: f64| w_edge[j] + eps2_integral(j as f64 * dt, t);
        // Node positions, envelopes and cumulative energies per τ cell.
        let mut tn = vec![0.0; nt * nodes];
        let mut en = vec![0.0; nt * nodes];
        let mut wn = vec![0.0; nt * nodes];
        for j in 0..nt {
            for a in 0..nodes {
                let t = (j as f64 + 0.5 + 0.5 * x[a]) * dt;
                tn[j * nodes + a] = t;
                en[j * nodes + a] = self.pump.envelope(t);
                wn[j * nodes + a] = w_at(j, t);
            }
        }
        let mut field = vec![0.0; nt * nt];
        for j in 0..nt {
            let t0 = j as f64 * dt;
            for a in 0..nodes {
                let ia = j * nodes + a;
                let outer = 0.5 * wq[a] * kappa * en[ia];
                if outer == 0.0 {
                    continue;
                }
                for k in 0..j {
                    let mut acc = 0.0;
                    for b in 0..nodes {
                        let ib = k * nodes + b;
                        acc += 0.5 * wq[b] * dt * en[ib] * r1(kappa * (wn[ia] - wn[ib]).max(0.0))?;
                    }
                    field[j * nt + k] += outer * acc;
                }
                // Same cell: τ' from the cell edge up to τ.
                let len = tn[ia] - t0;
                let mut acc = 0.0;
                for b in 0..nodes {
                    let tp = t0 + 0.5 * len * (1.0 + x[b]);
                    let y = kappa * (wn[ia] - w_at(j, tp)).max(0.0);
                    acc += 0.5 * wq[b] * len * self.pump.envelope(tp) * r1(y)?;
                }
                field[j * nt + j] += outer * acc;
            }
            field[j * nt + j] += 1.0;
        }
        let i = Complex64::new(0.0, 1.0);
        let mut coherence = vec![Complex64::new(0.0, 0.0); nt * nz];
        let zn: Vec<f64> = (0..nz * nodes)
            .map(|k| ((k / nodes) as f64 + 0.5 + 0.5 * x[k % nodes]) * dz)
            .collect();
        let phases: Vec<Complex64> = zn.iter().map(|z| cis(-self.mismatch * z)).collect();
        for j in 0..nt {
            for a in 0..nodes {
                let ia = j * nodes + a;
                if en[ia] == 0.0 {
                    continue;
                }
                let outer = -i * self.coupling.conj() * (0.5 * wq[a] * en[ia]);
                for m in 0..nz {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..nodes {
                        let ib = m * nodes + b;
                        acc += phases[ib] * (0.5 * wq[b] * dz * r0(kappa * (1.0 - zn[ib]) * wn[ia])?);
                    }
                    coherence[j * nz + m] += outer * acc;
                }
            }
        }
        Ok(OracleResponses {
            grid: *grid,
            field,
            coherence,
        })
    }

    /// Mean output Stokes intensity per τ cell under vacuum seeding.
    pub fn mean_intensity(&self, grid: &CharacteristicsGrid, nodes: usize) -> Result<Vec<f64>> {
        Ok(self.responses(grid, nodes)?.mean_intensity())
    }
}

/// Quadrature responses of the Stokes-only solution; see
/// [`GreenKernelOracle::responses`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResponses {
    pub grid: CharacteristicsGrid,
    /// `field[j·ntau + k]`: response of `s` in τ cell `j` to `s(0)` in cell `k`.
    pub field: Vec<f64>,
    /// `coherence[j·nz + m]`: response of `s` in τ cell `j` to `Q(0)` in z cell `m`.
    pub coherence: Vec<Complex64>,
}

impl OracleResponses {
    pub fn mean_intensity(&self) -> Vec<f64> {
        let nt = self.grid.ntau;
        let nz = self.grid.nz;
        let vt = 1.0 / self.grid.dtau();
        let vz = 1.0 / self.grid.dz();
        (0..nt)
            .map(|j| {
                let f: f64 = self.field[j * nt..(j + 1) * nt].iter().map(|r| r * r).sum();
                let c: f64 = self.coherence[j * nz..(j + 1) * nz].iter().map(|r| r.norm_sqr()).sum();
                f * vt + c * vz
            })
            .collect()
    }

    /// Output Stokes envelope `b_{-1}` for a given set of seeds.
    pub fn stokes_output(&self, init: &InitialConditions) -> Result<Vec<Complex64>> {
        let nt = self.grid.ntau;
        let nz = self.grid.nz;
        let seed = init.line(-1).ok_or(Error::MissingLine(-1))?;
        if seed.len() != nt || init.coherence.len() != nz {
            return Err(Error::Shape("seeds do not match the oracle grid".into()));
        }
        Ok((0..nt)
            .map(|j| {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..nt {
                    s += seed[k].conj() * self.field[j * nt + k];
                }
                for m in 0..nz {
                    s += init.coherence[m] * self.coherence[j * nz + m];
                }
                s.conj()
            })
            .collect())
    }
}
