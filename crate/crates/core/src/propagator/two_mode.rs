//! First Stokes / first anti-Stokes channel.
//!
//! With the classical pump `P`, the channel variables `s = b_{-1}*`,
//! `a = b_{+1}` and `q = Q` obey a linear system:
//!
//! ```text
//! ∂z s = k_s q,   ∂z a = k_a q,   ∂τ q = l_s s + l_a a - Γ q + F
//! k_s = -i μ_0* P e^{-iΔβ_0 z}    k_a = i μ_1* P e^{-iΔβ_1 z}
//! l_s =  i μ_0  P e^{ iΔβ_0 z}    l_a = i μ_1  P e^{ iΔβ_1 z}
//! ```

use alloc::vec;
use alloc::vec::Vec;

use super::{is_finite, InitialConditions, Integrator, LangevinNoise, Scheme};
use crate::math::cis;
use crate::model::{CharacteristicsGrid, FieldRecord, MediumConfig, PumpPulse};
use crate::{Complex64, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients of one cell.
#[derive(Clone, Copy)]
struct Cell {
    ks: Complex64,
    ka: Complex64,
    ls: Complex64,
    la: Complex64,
    dz: f64,
    dt: f64,
    damping: f64,
    inv_den: f64,
}

impl Cell {
    /// Trapezoidal update, solved in closed form for the cell-average
    /// coherence.
    #[inline(always)]
    fn implicit(&self, s: &mut Complex64, a: &mut Complex64, q: &mut Complex64, f: Complex64) {
        let qbar = (*q * 2.0 + (self.ls * *s + self.la * *a + f) * self.dt) * self.inv_den;
        *s += self.ks * qbar * self.dz;
        *a += self.ka * qbar * self.dz;
        *q = qbar * 2.0 - *q;
    }

    /// Two-stage explicit update.
    #[inline(always)]
    fn predictor_corrector(&self, s: &mut Complex64, a: &mut Complex64, q: &mut Complex64, f: Complex64) {
        let (s0, a0, q0) = (*s, *a, *q);
        let src0 = self.ls * s0 + self.la * a0;
        let s1 = s0 + self.ks * q0 * self.dz;
        let a1 = a0 + self.ka * q0 * self.dz;
        let q1 = q0 + (src0 - q0 * self.damping + f) * self.dt;
        let qbar = (q0 + q1) * 0.5;
        let sbar = (s0 + s1) * 0.5;
        let abar = (a0 + a1) * 0.5;
        *s = s0 + self.ks * qbar * self.dz;
        *a = a0 + self.ka * qbar * self.dz;
        *q = q0 + (self.ls * sbar + self.la * abar - qbar * self.damping + f) * self.dt;
    }

    #[inline(always)]
    fn step<const IMPLICIT: bool>(&self, s: &mut Complex64, a: &mut Complex64, q: &mut Complex64, f: Complex64) {
        if IMPLICIT {
            self.implicit(s, a, q, f)
        } else {
            self.predictor_corrector(s, a, q, f)
        }
    }
}

/// Per-grid coefficient tables.
struct Setup {
    nz: usize,
    ntau: usize,
    dz: f64,
    dt: f64,
    damping: f64,
    pump: Vec<f64>,
    ks: Vec<Complex64>,
    ka: Vec<Complex64>,
    ls: Vec<Complex64>,
    la: Vec<Complex64>,
    anti_stokes_coupled: bool,
}

impl Setup {
    fn new(config: &MediumConfig, pump: &PumpPulse, grid: &CharacteristicsGrid) -> Result<Self> {
        let i = Complex64::new(0.0, 1.0);
        let mu0 = config.coupling(0).ok_or(Error::MissingLine(-1))?;
        let mu1 = config.coupling(1).ok_or(Error::MissingLine(1))?;
        let db0 = config.delta_beta(0).ok_or(Error::MissingLine(-1))?;
        let db1 = config.delta_beta(1).ok_or(Error::MissingLine(1))?;
        let mut ks = Vec::with_capacity(grid.nz);
        let mut ka = Vec::with_capacity(grid.nz);
        let mut ls = Vec::with_capacity(grid.nz);
        let mut la = Vec::with_capacity(grid.nz);
        for k in 0..grid.nz {
            let z = grid.z_center(k);
            ks.push(-i * mu0.conj() * cis(-db0 * z));
            ka.push(i * mu1.conj() * cis(-db1 * z));
            ls.push(i * mu0 * cis(db0 * z));
            la.push(i * mu1 * cis(db1 * z));
        }
        Ok(Setup {
            nz: grid.nz,
            ntau: grid.ntau,
            dz: grid.dz(),
            dt: grid.dtau(),
            damping: config.damping,
            pump: pump.cell_amplitudes(grid, config.pump_photons),
            ks,
            ka,
            ls,
            la,
            anti_stokes_coupled: mu1.norm() > 0.0,
        })
    }

    #[inline(always)]
    fn cell(&self, i: usize, p: f64) -> Cell {
        let ks = self.ks[i] * p;
        let ka = self.ka[i] * p;
        let ls = self.ls[i] * p;
        let la = self.la[i] * p;
        let den = 2.0 + self.damping * self.dt - 0.5 * self.dt * self.dz * (ls * ks + la * ka).re;
        Cell {
            ks,
            ka,
            ls,
            la,
            dz: self.dz,
            dt: self.dt,
            damping: self.damping,
            inv_den: 1.0 / den,
        }
    }
}

/// Output of one sweep, on the coarse grid.
struct Realization {
    stokes: Vec<Complex64>,
    anti_stokes: Vec<Complex64>,
    coherence: Vec<Complex64>,
}

/// Sweeps a single realization on a grid `factor` times finer than the
/// seeds, averaging outputs back onto the seed cells.
fn sweep_realization<const IMPLICIT: bool>(
    setup: &Setup,
    factor: usize,
    init: &InitialConditions,
    noise: Option<&LangevinNoise>,
) -> Result<Realization> {
    let seed_s = init.line(-1).ok_or(Error::MissingLine(-1))?;
    let seed_a = init.line(1).ok_or(Error::MissingLine(1))?;
    let nz_c = init.coherence.len();
    let nt_c = seed_s.len();
    let mut q: Vec<Complex64> = (0..setup.nz).map(|i| init.coherence[i / factor]).collect();
    let mut out_s = vec![ZERO; nt_c];
    let mut out_a = vec![ZERO; nt_c];
    let w = 1.0 / factor as f64;
    for j in 0..setup.ntau {
        let jc = j / factor;
        let mut s = seed_s[jc].conj();
        let mut a = seed_a[jc];
        let p = setup.pump[j];
        for (i, qi) in q.iter_mut().enumerate() {
            let f = noise.map_or(ZERO, |n| n.values[jc * nz_c + i / factor]);
            setup.cell(i, p).step::<IMPLICIT>(&mut s, &mut a, qi, f);
        }
        if !is_finite(s) || !is_finite(a) {
            return Err(Error::NonFinite("two-mode sweep"));
        }
        out_s[jc] += s.conj() * w;
        out_a[jc] += a * w;
    }
    let mut coherence = vec![ZERO; nz_c];
    for (i, qi) in q.iter().enumerate() {
        coherence[i / factor] += *qi * w;
    }
    Ok(Realization {
        stokes: out_s,
        anti_stokes: out_a,
        coherence,
    })
}

fn richardson(fine: &[Complex64], coarse: &[Complex64]) -> Vec<Complex64> {
    fine.iter().zip(coarse).map(|(f, c)| (*f * 4.0 - *c) / 3.0).collect()
}

impl Integrator {
    /// Integrates one realization of the two-mode channel.
    pub fn two_mode(
        &self,
        config: &MediumConfig,
        pump: &PumpPulse,
        grid: &CharacteristicsGrid,
        init: &InitialConditions,
        noise: Option<&LangevinNoise>,
    ) -> Result<FieldRecord> {
        config.validate()?;
        if !config.is_two_mode() {
            return Err(Error::config(
                "medium.lines",
                "the two-mode integrator needs exactly the lines -1, 0, 1",
            ));
        }
        grid.require_unit()?;
        init.check(config, grid)?;
        if let Some(n) = noise {
            n.check(grid)?;
        }
        self.check_step(config, pump, grid)?;
        let r = match self.scheme {
            Scheme::PredictorCorrector => sweep_realization::<false>(&Setup::new(config, pump, grid)?, 1, init, noise)?,
            Scheme::Implicit => sweep_realization::<true>(&Setup::new(config, pump, grid)?, 1, init, noise)?,
            Scheme::Richardson => {
                let coarse = sweep_realization::<true>(&Setup::new(config, pump, grid)?, 1, init, noise)?;
                let fine_grid = grid.refined(2);
                let fine = sweep_realization::<true>(&Setup::new(config, pump, &fine_grid)?, 2, init, noise)?;
                Realization {
                    stokes: richardson(&fine.stokes, &coarse.stokes),
                    anti_stokes: richardson(&fine.anti_stokes, &coarse.anti_stokes),
                    coherence: richardson(&fine.coherence, &coarse.coherence),
                }
            }
        };
        let record = FieldRecord {
            grid: *grid,
            orders: vec![-1, 1],
            fields: vec![r.stokes, r.anti_stokes],
            coherence: r.coherence,
            seed: None,
        };
        record.validate()?;
        self.check_depletion(config, pump, [(-1, record.photons(-1)?), (1, record.photons(1)?)])?;
        Ok(record)
    }

    /// Linear response of the two-mode outputs to unit seeds in every cell.
    ///
    /// Column `c` of each response matrix is the output produced by a unit
    /// seed in one cell: columns `0..ntau` seed the Stokes field (as its
    /// conjugate channel `s = b_{-1}*`), `ntau..2·ntau` the anti-Stokes field
    /// and `2·ntau..2·ntau+nz` the coherence. Langevin forcing is not
    /// represented.
    pub fn two_mode_responses(
        &self,
        config: &MediumConfig,
        pump: &PumpPulse,
        grid: &CharacteristicsGrid,
        max_elements: usize,
    ) -> Result<TwoModeResponses> {
        config.validate()?;
        if !config.is_two_mode() {
            return Err(Error::Unsupported(
                "response matrices are only available for the two-mode channel".into(),
            ));
        }
        grid.require_unit()?;
        self.check_step(config, pump, grid)?;
        let ncol = 2 * grid.ntau + grid.nz;
        let elements = ncol * (2 * grid.ntau + grid.nz);
        if elements > max_elements {
            return Err(Error::Memory(alloc::format!(
                "{elements} response elements exceed the limit of {max_elements}"
            )));
        }
        let (s, a, q) = match self.scheme {
            Scheme::PredictorCorrector => {
                sweep_columns::<false>(&Setup::new(config, pump, grid)?, 1, grid.ntau, grid.nz)
            }
            Scheme::Implicit => sweep_columns::<true>(&Setup::new(config, pump, grid)?, 1, grid.ntau, grid.nz),
            Scheme::Richardson => {
                let (cs, ca, cq) = sweep_columns::<true>(&Setup::new(config, pump, grid)?, 1, grid.ntau, grid.nz);
                let (fs, fa, fq) =
                    sweep_columns::<true>(&Setup::new(config, pump, &grid.refined(2))?, 2, grid.ntau, grid.nz);
                (richardson(&fs, &cs), richardson(&fa, &ca), richardson(&fq, &cq))
            }
        };
        let responses = TwoModeResponses {
            grid: *grid,
            ncol,
            s,
            a,
            q,
        };
        if !responses
            .s
            .iter()
            .chain(&responses.a)
            .chain(&responses.q)
            .all(|c| is_finite(*c))
        {
            return Err(Error::NonFinite("two-mode responses"));
        }
        Ok(responses)
    }
}

/// Response matrices of the two-mode channel; see
/// [`Integrator::two_mode_responses`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeResponses {
    pub grid: CharacteristicsGrid,
    pub ncol: usize,
    /// `s[j·ncol + c]`: channel `s = b_{-1}*` at the output, τ cell `j`.
    pub s: Vec<Complex64>,
    /// `a[j·ncol + c]`: `b_{+1}` at the output, τ cell `j`.
    pub a: Vec<Complex64>,
    /// `q[i·ncol + c]`: coherence at `τ = T`, z cell `i`.
    pub q: Vec<Complex64>,
}

impl TwoModeResponses {
    /// Variance of a vacuum seed in column `c`.
    pub fn seed_variance(&self, c: usize) -> f64 {
        if c < 2 * self.grid.ntau {
            1.0 / self.grid.dtau()
        } else {
            1.0 / self.grid.dz()
        }
    }

    pub fn s_row(&self, j: usize) -> &[Complex64] {
        &self.s[j * self.ncol..(j + 1) * self.ncol]
    }

    pub fn a_row(&self, j: usize) -> &[Complex64] {
        &self.a[j * self.ncol..(j + 1) * self.ncol]
    }

    pub fn q_row(&self, i: usize) -> &[Complex64] {
        &self.q[i * self.ncol..(i + 1) * self.ncol]
    }
}

/// Sweeps all unit-seed columns at once. Column `c` only becomes nonzero
/// once the sweep reaches its seed cell, so each cell visits just the active
/// columns.
fn sweep_columns<const IMPLICIT: bool>(
    setup: &Setup,
    factor: usize,
    nt: usize,
    nzs: usize,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let ncol = 2 * nt + nzs;
    let q_off = 2 * nt;
    let mut q = vec![ZERO; setup.nz * ncol];
    for i in 0..setup.nz {
        q[i * ncol + q_off + i / factor] = ONE;
    }
    let mut out_s = vec![ZERO; nt * ncol];
    let mut out_a = vec![ZERO; nt * ncol];
    let mut s = vec![ZERO; ncol];
    let mut a = vec![ZERO; ncol];
    let w = 1.0 / factor as f64;
    let with_as = setup.anti_stokes_coupled;
    for j in 0..setup.ntau {
        let jc = j / factor;
        s.fill(ZERO);
        a.fill(ZERO);
        s[jc] = ONE;
        a[nt + jc] = ONE;
        let p = setup.pump[j];
        for i in 0..setup.nz {
            let cell = setup.cell(i, p);
            let ic = i / factor;
            let row = &mut q[i * ncol..(i + 1) * ncol];
            let mut run = |lo: usize, hi: usize| {
                for ((sc, ac), qc) in s[lo..hi].iter_mut().zip(&mut a[lo..hi]).zip(&mut row[lo..hi]) {
                    cell.step::<IMPLICIT>(sc, ac, qc, ZERO);
                }
            };
            run(0, jc + 1);
            if with_as {
                run(nt, nt + jc + 1);
            }
            run(q_off, q_off + ic + 1);
        }
        let dst_s = &mut out_s[jc * ncol..(jc + 1) * ncol];
        let dst_a = &mut out_a[jc * ncol..(jc + 1) * ncol];
        for c in 0..ncol {
            dst_s[c] += s[c] * w;
            dst_a[c] += a[c] * w;
        }
    }
    if !with_as {
        // The anti-Stokes seeds pass through unchanged and never reach the
        // other channels.
        for j in 0..nt {
            out_a[j * ncol + nt + j] = ONE;
        }
    }
    let mut out_q = vec![ZERO; nzs * ncol];
    for i in 0..setup.nz {
        let ic = i / factor;
        for c in 0..ncol {
            out_q[ic * ncol + c] += q[i * ncol + c] * w;
        }
    }
    (out_s, out_a, out_q)
}

/// Integrates one realization with the default predictor-corrector scheme.
pub fn integrate_two_mode(
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    init: &InitialConditions,
) -> Result<FieldRecord> {
    Integrator::default().two_mode(config, pump, grid, init, None)
}
