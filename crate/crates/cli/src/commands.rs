//! Subcommand implementations. Each writes its data files and a manifest to
//! an output directory and returns its JSON summary.

use std::path::Path;
use std::time::Instant;

use raman_comb_core::ensemble::ShotEnsemble;
use raman_comb_core::interferometry::FitRow;
use raman_comb_core::math::wrap_phase;
use raman_comb_core::moments::{
    central_cells, correlation_coefficient, energy_crossing, manley_rowe_report, propagate_profiles, ManleyRoweReport,
    MomentProfiles,
};
use raman_comb_core::statistics::{
    circular_stats_with_bins, energy_stats, pearson, phase_sum_resultant, phi_nm, uniformity_test, visibility_stats,
    CircularStats, EnergyStats, Histogram, PhaseRecord, UniformityTest, VisibilityStats,
};
use raman_comb_core::Error as CoreError;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{encode_ensemble, num, read_ensemble, OutputDir, Table};
use crate::manifest::RunManifest;
use crate::parallel;
use crate::plot::{histogram_chart, line_chart, Series};

pub const ENSEMBLE_FILE: &str = "ensemble.rce";

/// Measured phase-difference resultant for S1/AS1, shown next to simulated
/// values for reference only.
pub const EXPERIMENTAL_PHI_RESULTANT: f64 = 0.64;

/// File-name label of a comb line.
pub fn line_label(order: i32) -> String {
    match order {
        0 => "pump".to_string(),
        n if n < 0 => format!("s{}", -n),
        n => format!("as{n}"),
    }
}

/// `Ok(None)` for statistics that need more shots than the run has.
fn optional<T>(r: raman_comb_core::Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CoreError::InsufficientData { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn histogram_table(h: &Histogram) -> Table {
    let mut t = Table::new(&["center", "count"]);
    for (c, n) in h.centers().iter().zip(&h.counts) {
        t.push(vec![num(*c), n.to_string()]);
    }
    t
}

fn write_histogram(out: &mut OutputDir, stem: &str, title: &str, x_label: &str, h: &Histogram) -> Result<()> {
    out.write_csv(&format!("{stem}.csv"), &histogram_table(h))?;
    let svg = histogram_chart(title, x_label, &h.centers(), &h.counts);
    out.write(&format!("{stem}.svg"), svg.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub shots: usize,
    pub fibers: usize,
    pub orders: Vec<i32>,
    pub master_seed: u64,
    pub mean_energy: Vec<LineEnergy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineEnergy {
    pub line: i32,
    pub mean: f64,
}

fn simulate_into(config: &RunConfig, out: &mut OutputDir, threads: Option<usize>) -> Result<ShotEnsemble> {
    let r = config.resolve()?;
    let pool = parallel::pool(threads)?;
    let ens = parallel::run_ensemble(&pool, &r.medium, &r.pump, &r.grid, &r.spec)?;
    out.write(ENSEMBLE_FILE, &encode_ensemble(config, &ens))?;
    out.write("config.toml", config.to_toml().as_bytes())?;
    let mut t = Table::new(&["shot", "fiber", "line", "energy", "phase"]);
    for shot in 0..ens.shots() {
        for fiber in 0..ens.fibers() {
            for &line in &ens.orders {
                t.push(vec![
                    shot.to_string(),
                    fiber.to_string(),
                    line.to_string(),
                    num(ens.energy(shot, fiber, line)?),
                    num(ens.line_phase(shot, fiber, line)?),
                ]);
            }
        }
    }
    out.write_csv("energies.csv", &t)?;
    Ok(ens)
}

fn simulate_summary(ens: &ShotEnsemble) -> Result<SimulateSummary> {
    let mut mean_energy = Vec::new();
    for &line in &ens.orders {
        let w = ens.energies(0, line)?;
        mean_energy.push(LineEnergy {
            line,
            mean: w.iter().sum::<f64>() / w.len() as f64,
        });
    }
    Ok(SimulateSummary {
        shots: ens.shots(),
        fibers: ens.fibers(),
        orders: ens.orders.clone(),
        master_seed: ens.spec.master_seed,
        mean_energy,
    })
}

pub fn simulate(config_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<SimulateSummary> {
    let start = Instant::now();
    let config = RunConfig::load(config_path)?;
    config.resolve()?;
    let mut out = OutputDir::create(out_dir)?;
    let ens = simulate_into(&config, &mut out, threads)?;
    let summary = simulate_summary(&ens)?;
    out.write_json("summary.json", &summary)?;
    RunManifest::new("simulate", Some(config.hash()), Some(config.seed))
        .finish(&mut out, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

// ----------------------------------------------------------------- moments

#[derive(Debug, Clone, Serialize)]
pub struct MomentsSummary {
    pub vacuum_level: f64,
    pub manley_rowe: ManleyRoweReport,
    pub manley_rowe_relative: f64,
    /// Times at which 10% of the generated energy has left the fiber.
    pub stokes_crossing: Option<f64>,
    pub anti_stokes_crossing: Option<f64>,
    /// Smallest correlation coefficient over the cells holding the central
    /// 80% of the Stokes energy; `None` when nothing is generated.
    pub central_min_correlation: Option<f64>,
    pub central_cells: [usize; 2],
}

pub fn moments_profiles(config: &RunConfig) -> Result<MomentProfiles> {
    let r = config.resolve()?;
    Ok(propagate_profiles(&r.medium, &r.pump, &r.grid, &config.integrator())?)
}

pub fn moments_summary(p: &MomentProfiles) -> MomentsSummary {
    let vac = p.vacuum_level();
    let c = correlation_coefficient(p);
    let central = central_cells(&p.stokes, vac, 0.8);
    let central_min_correlation = if central.is_empty() {
        None
    } else {
        c[central.clone()]
            .iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .try_fold(f64::INFINITY, |m, v| if v.is_nan() { None } else { Some(m.min(v)) })
    };
    let mr = manley_rowe_report(p);
    MomentsSummary {
        vacuum_level: vac,
        manley_rowe: mr,
        manley_rowe_relative: mr.relative(),
        stokes_crossing: energy_crossing(&p.stokes, vac, 0.1),
        anti_stokes_crossing: energy_crossing(&p.anti_stokes, vac, 0.1),
        central_min_correlation,
        central_cells: [central.start, central.end],
    }
}

fn write_profiles(out: &mut OutputDir, p: &MomentProfiles) -> Result<Vec<f64>> {
    let tau: Vec<f64> = (0..p.grid.ntau).map(|j| p.grid.tau_center(j)).collect();
    out.write_csv("intensity_pump.csv", &Table::curve("tau", "value", &tau, &p.pump))?;
    out.write_csv("intensity_s1.csv", &Table::curve("tau", "value", &tau, &p.stokes))?;
    out.write_csv("intensity_as1.csv", &Table::curve("tau", "value", &tau, &p.anti_stokes))?;
    let c: Vec<f64> = correlation_coefficient(p)
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect();
    out.write_csv("correlation.csv", &Table::curve("tau", "value", &tau, &c))?;
    Ok(tau)
}

pub fn moments(config_path: &Path, out_dir: &Path) -> Result<MomentsSummary> {
    let start = Instant::now();
    let config = RunConfig::load(config_path)?;
    let p = moments_profiles(&config)?;
    let mut out = OutputDir::create(out_dir)?;
    write_profiles(&mut out, &p)?;
    let summary = moments_summary(&p);
    out.write_json("summary.json", &summary)?;
    RunManifest::new("moments", Some(config.hash()), None).finish(&mut out, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

pub fn reproduce_fig3b(config_path: &Path, out_dir: &Path) -> Result<MomentsSummary> {
    let start = Instant::now();
    let config = RunConfig::load(config_path)?;
    let p = moments_profiles(&config)?;
    let mut out = OutputDir::create(out_dir)?;
    let tau = write_profiles(&mut out, &p)?;
    let vac = p.vacuum_level();
    // Shapes only: each intensity above vacuum, scaled to unit peak.
    let scaled = |v: &[f64], floor: f64| -> Vec<f64> {
        let e: Vec<f64> = v.iter().map(|x| x - floor).collect();
        let peak = e.iter().copied().fold(0.0, f64::max);
        e.iter().map(|x| if peak > 0.0 { x / peak } else { 0.0 }).collect()
    };
    let ip = scaled(&p.pump, 0.0);
    let is = scaled(&p.stokes, vac);
    let ia = scaled(&p.anti_stokes, vac);
    let c: Vec<f64> = correlation_coefficient(&p)
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect();
    let svg = line_chart(
        "Mean intensities and S/AS correlation",
        "normalized time",
        "normalized intensity, C",
        &[
            Series {
                label: "pump",
                x: &tau,
                y: &ip,
            },
            Series {
                label: "Stokes",
                x: &tau,
                y: &is,
            },
            Series {
                label: "anti-Stokes",
                x: &tau,
                y: &ia,
            },
            Series {
                label: "C",
                x: &tau,
                y: &c,
            },
        ],
        Some((0.0, 1.05)),
    );
    out.write("fig3b.svg", svg.as_bytes())?;
    let summary = moments_summary(&p);
    out.write_json("summary.json", &summary)?;
    RunManifest::new("reproduce-fig3b", Some(config.hash()), None).finish(&mut out, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

// ----------------------------------------------------------------- analyze

#[derive(Debug, Clone, Serialize)]
pub struct PhaseSummary {
    pub samples: usize,
    pub resultant: f64,
    pub mean: f64,
    pub gaussian_width: f64,
    pub mode: f64,
    pub uniformity: Option<UniformityTest>,
}

impl PhaseSummary {
    fn new(s: &CircularStats, values: &[f64]) -> Result<Self> {
        Ok(PhaseSummary {
            samples: s.samples,
            resultant: s.resultant,
            mean: s.mean,
            gaussian_width: s.gaussian_width,
            mode: s.histogram.mode(),
            uniformity: optional(uniformity_test(values))?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineSummary {
    pub line: i32,
    pub visibility: Option<VisibilitySummary>,
    pub fringe_phase: Option<PhaseSummary>,
    pub energy: Option<EnergyStats>,
    /// Shot-to-shot fringe phase change; its half width is the quantity
    /// quoted for the pump.
    pub successive_phase: Option<PhaseSummary>,
    pub successive_phase_hwhm: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VisibilitySummary {
    pub fits: usize,
    pub failed: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl From<&VisibilityStats> for VisibilitySummary {
    fn from(v: &VisibilityStats) -> Self {
        VisibilitySummary {
            fits: v.fits,
            failed: v.failed,
            mean: v.mean,
            std_dev: v.std_dev,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub n: i32,
    pub m: i32,
    pub phase: Option<PhaseSummary>,
    /// Measured value for the same pair, when there is one.
    pub experimental_resultant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SqueezingSummary {
    pub energy_correlation: Option<f64>,
    pub phase_sum_resultant: f64,
    pub stokes_phase: PhaseSummary,
    pub anti_stokes_phase: PhaseSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub shots: usize,
    pub master_seed: u64,
    pub pump_reference: bool,
    pub lines: Vec<LineSummary>,
    pub pairs: Vec<PairSummary>,
    pub squeezing: Option<SqueezingSummary>,
}

fn fits_table(rows: &[FitRow]) -> Table {
    let mut t = Table::new(&[
        "shot",
        "line",
        "fiber_pair",
        "visibility",
        "phase",
        "residual",
        "success",
    ]);
    for r in rows {
        t.push(vec![
            r.shot.to_string(),
            r.line.to_string(),
            format!("{}-{}", r.fiber_pair.0, r.fiber_pair.1),
            num(r.fit.visibility),
            num(r.fit.phase),
            num(r.fit.residual),
            r.fit.success.to_string(),
        ]);
    }
    t
}

fn analyze_into(
    config: &RunConfig,
    ens: &ShotEnsemble,
    out: &mut OutputDir,
    threads: Option<usize>,
) -> Result<AnalysisSummary> {
    if ens.fibers() != 2 {
        return Err(CliError::config(
            "ensemble.fibers",
            "the interferometer analysis needs 2 fibers",
        ));
    }
    let pool = parallel::pool(threads)?;
    let lines = config.fitted_lines();
    let rows = parallel::fit_ensemble(&pool, ens, &config.detector, &lines)?;
    out.write_csv("fits.csv", &fits_table(&rows))?;
    let bins = config.analysis.phase_bins;
    let shots = ens.shots();

    let mut all_lines = vec![0];
    all_lines.extend(&lines);
    let record = PhaseRecord::from_fits(&rows, &all_lines, shots)?;
    let record = if config.analysis.pump_reference {
        record.relative_to(0)?
    } else {
        record
    };

    let mut line_summaries = Vec::new();
    for &line in &all_lines {
        let label = line_label(line);
        let visibility = optional(visibility_stats(&rows, line))?;
        if let Some(v) = &visibility {
            write_histogram(
                out,
                &format!("hist_visibility_{label}"),
                &format!("Visibility, {label}"),
                "visibility",
                &v.histogram,
            )?;
        }
        let phases: Vec<f64> = rows
            .iter()
            .filter(|r| r.line == line && r.fit.success)
            .map(|r| r.fit.phase)
            .collect();
        let fringe_phase = if phases.is_empty() {
            None
        } else {
            let s = circular_stats_with_bins(&phases, bins)?;
            write_histogram(
                out,
                &format!("hist_phase_{label}"),
                &format!("Fringe phase, {label}"),
                "phase (rad)",
                &s.histogram,
            )?;
            Some(PhaseSummary::new(&s, &phases)?)
        };
        let successive: Vec<f64> = {
            let mut per_shot: Vec<Option<f64>> = vec![None; shots];
            for r in rows.iter().filter(|r| r.line == line && r.fit.success) {
                per_shot[r.shot] = Some(r.fit.phase);
            }
            per_shot
                .windows(2)
                .filter_map(|w| Some(wrap_phase(w[1]? - w[0]?)))
                .collect()
        };
        let (successive_phase, successive_phase_hwhm) = if successive.is_empty() {
            (None, None)
        } else {
            let s = circular_stats_with_bins(&successive, bins)?;
            let hwhm = s.gaussian_width * (2.0 * 2f64.ln()).sqrt();
            (Some(PhaseSummary::new(&s, &successive)?), Some(hwhm))
        };
        let energy = if line == 0 {
            None
        } else {
            optional(energy_stats(&ens.energies(0, line)?, None))?
        };
        line_summaries.push(LineSummary {
            line,
            visibility: visibility.as_ref().map(VisibilitySummary::from),
            fringe_phase,
            energy,
            successive_phase,
            successive_phase_hwhm,
        });
    }

    let mut pairs = Vec::new();
    for [n, m] in &config.analysis.pairs {
        let phi = phi_nm(&record, *n, *m)?;
        let phase = if phi.is_empty() {
            None
        } else {
            let s = circular_stats_with_bins(&phi, bins)?;
            let stem = format!("hist_phi_{}_{}", line_label(*n), line_label(*m));
            write_histogram(out, &stem, &format!("Phi({n},{m})"), "phase (rad)", &s.histogram)?;
            Some(PhaseSummary::new(&s, &phi)?)
        };
        let experimental_resultant = ((*n, *m) == (1, -1) || (*n, *m) == (-1, 1)).then_some(EXPERIMENTAL_PHI_RESULTANT);
        pairs.push(PairSummary {
            n: *n,
            m: *m,
            phase,
            experimental_resultant,
        });
    }

    let squeezing = if ens.orders.contains(&-1) && ens.orders.contains(&1) {
        let ps: Vec<f64> = (0..shots).map(|s| ens.line_phase(s, 0, -1)).collect::<Result<_, _>>()?;
        let pa: Vec<f64> = (0..shots).map(|s| ens.line_phase(s, 0, 1)).collect::<Result<_, _>>()?;
        let ws = ens.energies(0, -1)?;
        let wa = ens.energies(0, 1)?;
        let energy_correlation = if shots >= 3 { pearson(&ws, &wa).ok() } else { None };
        let ss = circular_stats_with_bins(&ps, bins)?;
        let sa = circular_stats_with_bins(&pa, bins)?;
        Some(SqueezingSummary {
            energy_correlation,
            phase_sum_resultant: phase_sum_resultant(&ps, &pa)?,
            stokes_phase: PhaseSummary::new(&ss, &ps)?,
            anti_stokes_phase: PhaseSummary::new(&sa, &pa)?,
        })
    } else {
        None
    };

    let summary = AnalysisSummary {
        shots,
        master_seed: ens.spec.master_seed,
        pump_reference: config.analysis.pump_reference,
        lines: line_summaries,
        pairs,
        squeezing,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}

/// Analyzes a stored ensemble. Detector and analysis settings come from
/// `config_path` when given, otherwise from the configuration embedded in
/// the file.
pub fn analyze(
    ensemble_path: &Path,
    config_path: Option<&Path>,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<AnalysisSummary> {
    let start = Instant::now();
    let (embedded, ens) = read_ensemble(ensemble_path)?;
    let config = match config_path {
        Some(p) => {
            let mut c = embedded.clone();
            let over = RunConfig::load(p)?;
            c.detector = over.detector;
            c.analysis = over.analysis;
            c.resolve()?;
            c
        }
        None => embedded,
    };
    let mut out = OutputDir::create(out_dir)?;
    let summary = analyze_into(&config, &ens, &mut out, threads)?;
    RunManifest::new("analyze", Some(config.hash()), Some(ens.spec.master_seed))
        .finish(&mut out, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

/// Simulation followed by the interferometer analysis, in one directory.
pub fn reproduce_fig2(config_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<AnalysisSummary> {
    let start = Instant::now();
    let config = RunConfig::load(config_path)?;
    config.resolve()?;
    let mut out = OutputDir::create(out_dir)?;
    let ens = simulate_into(&config, &mut out, threads)?;
    let summary = analyze_into(&config, &ens, &mut out, threads)?;
    RunManifest::new("reproduce-fig2", Some(config.hash()), Some(config.seed))
        .finish(&mut out, start.elapsed().as_secs_f64())?;
    Ok(summary)
}
