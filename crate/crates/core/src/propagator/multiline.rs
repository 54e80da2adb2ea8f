//! Full comb: every sideband couples to its neighbours through the common
//! coherence, and the coherence is driven by every adjacent pair of lines.
//! The pump stays classical and undepleted; all other products are kept, so
//! the system is bilinear rather than linear once second-order lines exist.

use alloc::vec;
use alloc::vec::Vec;

use super::{is_finite, InitialConditions, Integrator, LangevinNoise, Scheme};
use crate::math::cis;
use crate::model::{CharacteristicsGrid, FieldRecord, MediumConfig, PumpPulse};
use crate::{Complex64, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const MAX_ITERATIONS: usize = 200;

struct Setup {
    nz: usize,
    ntau: usize,
    dz: f64,
    dt: f64,
    damping: f64,
    lines: usize,
    pump_index: usize,
    pump: Vec<f64>,
    /// Coupling of transition `t` (lines `t+1` and `t`).
    mu: Vec<Complex64>,
    /// `phase[i·(lines-1) + t] = e^{iΔβ_t z_i}`.
    phase: Vec<Complex64>,
}

impl Setup {
    fn new(config: &MediumConfig, pump: &PumpPulse, grid: &CharacteristicsGrid) -> Result<Self> {
        let lines = config.lines.len();
        let lo = config.lowest_order();
        let transitions: Vec<i32> = (1..lines as i32).map(|t| lo + t).collect();
        let mu = transitions
            .iter()
            .map(|&n| config.coupling(n).ok_or(Error::MissingLine(n)))
            .collect::<Result<Vec<_>>>()?;
        let db = transitions
            .iter()
            .map(|&n| config.delta_beta(n).ok_or(Error::MissingLine(n)))
            .collect::<Result<Vec<_>>>()?;
        let mut phase = Vec::with_capacity(grid.nz * transitions.len());
        for i in 0..grid.nz {
            let z = grid.z_center(i);
            phase.extend(db.iter().map(|d| cis(d * z)));
        }
        Ok(Setup {
            nz: grid.nz,
            ntau: grid.ntau,
            dz: grid.dz(),
            dt: grid.dtau(),
            damping: config.damping,
            lines,
            pump_index: config.line_index(0).ok_or(Error::MissingLine(0))?,
            pump: pump.cell_amplitudes(grid, config.pump_photons),
            mu,
            phase,
        })
    }

    /// `∂z b` into `out` (pump entry left at zero) and returns `∂τ Q` without
    /// damping and forcing.
    #[inline]
    fn rates(&self, i: usize, b: &[Complex64], q: Complex64, out: &mut [Complex64]) -> Complex64 {
        let ph = &self.phase[i * (self.lines - 1)..(i + 1) * (self.lines - 1)];
        let mut h = ZERO;
        for v in out.iter_mut() {
            *v = ZERO;
        }
        for t in 0..self.lines - 1 {
            let m = self.mu[t] * ph[t];
            // Transition t: lines t+1 (upper) and t (lower).
            out[t] += I * m * b[t + 1] * q.conj();
            out[t + 1] += I * m.conj() * b[t] * q;
            h += I * m * b[t + 1] * b[t].conj();
        }
        out[self.pump_index] = ZERO;
        h
    }
}

struct Workspace {
    rate: Vec<Complex64>,
    mid: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl Workspace {
    fn new(lines: usize) -> Self {
        Workspace {
            rate: vec![ZERO; lines],
            mid: vec![ZERO; lines],
            next: vec![ZERO; lines],
        }
    }
}

fn implicit_cell(
    setup: &Setup,
    ws: &mut Workspace,
    i: usize,
    b: &mut [Complex64],
    q: &mut Complex64,
    f: Complex64,
) -> Result<()> {
    let (dz, dt, g) = (setup.dz, setup.dt, setup.damping);
    ws.mid.copy_from_slice(b);
    let mut qbar = *q;
    for _ in 0..MAX_ITERATIONS {
        let h = setup.rates(i, &ws.mid, qbar, &mut ws.rate);
        let mut change = 0.0;
        let mut scale = 0.0;
        for k in 0..setup.lines {
            ws.next[k] = b[k] + ws.rate[k] * (0.5 * dz);
            // The pump is fixed and would swamp the convergence scale.
            if k != setup.pump_index {
                change += (ws.next[k] - ws.mid[k]).norm_sqr();
                scale += ws.next[k].norm_sqr();
            }
        }
        let qnext = (*q + (h + f) * (0.5 * dt)) / (1.0 + 0.5 * g * dt);
        change += (qnext - qbar).norm_sqr();
        scale += qnext.norm_sqr();
        ws.mid.copy_from_slice(&ws.next);
        qbar = qnext;
        if change <= 1e-30 * scale || scale == 0.0 {
            for k in 0..setup.lines {
                if k != setup.pump_index {
                    b[k] = ws.mid[k] * 2.0 - b[k];
                }
            }
            *q = qbar * 2.0 - *q;
            return Ok(());
        }
        if !change.is_finite() {
            return Err(Error::NonFinite("multiline cell iteration"));
        }
    }
    Err(Error::NoConvergence("implicit multiline cell iteration"))
}

fn predictor_corrector_cell(
    setup: &Setup,
    ws: &mut Workspace,
    i: usize,
    b: &mut [Complex64],
    q: &mut Complex64,
    f: Complex64,
) {
    let (dz, dt, g) = (setup.dz, setup.dt, setup.damping);
    let q0 = *q;
    let h0 = setup.rates(i, b, q0, &mut ws.rate);
    let q1 = q0 + (h0 - q0 * g + f) * dt;
    for k in 0..setup.lines {
        ws.mid[k] = b[k] + ws.rate[k] * (0.5 * dz);
    }
    let qbar = (q0 + q1) * 0.5;
    let h = setup.rates(i, &ws.mid, qbar, &mut ws.rate);
    for k in 0..setup.lines {
        b[k] += ws.rate[k] * dz;
    }
    *q = q0 + (h - qbar * g + f) * dt;
}

struct Output {
    fields: Vec<Vec<Complex64>>,
    coherence: Vec<Complex64>,
}

fn sweep(
    setup: &Setup,
    implicit: bool,
    factor: usize,
    init: &InitialConditions,
    noise: Option<&LangevinNoise>,
) -> Result<Output> {
    let nz_c = init.coherence.len();
    let nt_c = init.fields.first().map_or(setup.ntau / factor, |f| f.len());
    let sidebands: Vec<usize> = (0..setup.lines).filter(|&k| k != setup.pump_index).collect();
    let mut q: Vec<Complex64> = (0..setup.nz).map(|i| init.coherence[i / factor]).collect();
    let mut out = vec![vec![ZERO; nt_c]; sidebands.len()];
    let mut b = vec![ZERO; setup.lines];
    let mut ws = Workspace::new(setup.lines);
    let w = 1.0 / factor as f64;
    for j in 0..setup.ntau {
        let jc = j / factor;
        for (s, &k) in sidebands.iter().enumerate() {
            b[k] = init.fields[s][jc];
        }
        b[setup.pump_index] = Complex64::new(setup.pump[j], 0.0);
        for (i, qi) in q.iter_mut().enumerate() {
            let f = noise.map_or(ZERO, |n| n.values[jc * nz_c + i / factor]);
            if implicit {
                implicit_cell(setup, &mut ws, i, &mut b, qi, f)?;
            } else {
                predictor_corrector_cell(setup, &mut ws, i, &mut b, qi, f);
            }
        }
        for (s, &k) in sidebands.iter().enumerate() {
            if !is_finite(b[k]) {
                return Err(Error::NonFinite("multiline sweep"));
            }
            out[s][jc] += b[k] * w;
        }
    }
    let mut coherence = vec![ZERO; nz_c];
    for (i, qi) in q.iter().enumerate() {
        coherence[i / factor] += *qi * w;
    }
    Ok(Output { fields: out, coherence })
}

impl Integrator {
    /// Integrates one realization of the full comb described by `config`.
    pub fn multiline(
        &self,
        config: &MediumConfig,
        pump: &PumpPulse,
        grid: &CharacteristicsGrid,
        init: &InitialConditions,
        noise: Option<&LangevinNoise>,
    ) -> Result<FieldRecord> {
        config.validate()?;
        grid.require_unit()?;
        init.check(config, grid)?;
        if let Some(n) = noise {
            n.check(grid)?;
        }
        self.check_step(config, pump, grid)?;
        let out = match self.scheme {
            Scheme::PredictorCorrector => sweep(&Setup::new(config, pump, grid)?, false, 1, init, noise)?,
            Scheme::Implicit => sweep(&Setup::new(config, pump, grid)?, true, 1, init, noise)?,
            Scheme::Richardson => {
                let coarse = sweep(&Setup::new(config, pump, grid)?, true, 1, init, noise)?;
                let fine = sweep(&Setup::new(config, pump, &grid.refined(2))?, true, 2, init, noise)?;
                let extrapolate = |f: &[Complex64], c: &[Complex64]| -> Vec<Complex64> {
                    f.iter().zip(c).map(|(f, c)| (*f * 4.0 - *c) / 3.0).collect()
                };
                Output {
                    fields: fine
                        .fields
                        .iter()
                        .zip(&coarse.fields)
                        .map(|(f, c)| extrapolate(f, c))
                        .collect(),
                    coherence: extrapolate(&fine.coherence, &coarse.coherence),
                }
            }
        };
        let record = FieldRecord {
            grid: *grid,
            orders: config.sideband_orders(),
            fields: out.fields,
            coherence: out.coherence,
            seed: None,
        };
        record.validate()?;
        let photons = record
            .orders
            .iter()
            .map(|&n| Ok((n, record.photons(n)?)))
            .collect::<Result<Vec<_>>>()?;
        self.check_depletion(config, pump, photons)?;
        Ok(record)
    }
}

/// Integrates one realization of the full comb with the default scheme.
pub fn integrate_multiline(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    init: &InitialConditions,
) -> Result<FieldRecord> {
    Integrator::default().multiline(config, pump, grid, init, None)
}
