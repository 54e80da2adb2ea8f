//! Multi-threaded ensemble and fit runners.
//!
//! Every shot draws from its own RNG substream and results are gathered in
//! shot order, so the output does not depend on the number of threads.

use raman_comb_core::ensemble::{run_shot, EnsembleSpec, ShotEnsemble};
use raman_comb_core::interferometry::{fit_shot, DetectorConfig, FitRow};
use raman_comb_core::model::{CharacteristicsGrid, MediumConfig, PumpPulse};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{CliError, Result};

/// Thread pool capped at `threads` workers (all cores when `None`).
pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    if threads == Some(0) {
        return Err(CliError::config("--threads", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))
}

pub fn run_ensemble(
    pool: &ThreadPool,
    config: &MediumConfig,
    pump: &PumpPulse,
    grid: &CharacteristicsGrid,
    spec: &EnsembleSpec,
) -> Result<ShotEnsemble> {
    spec.validate()?;
    let fibers = spec.fibers;
    let records = pool.install(|| {
        (0..spec.shots * fibers)
            .into_par_iter()
            .map(|k| run_shot(config, pump, grid, spec, k / fibers, k % fibers))
            .collect::<Vec<_>>()
    });
    // The first failure in shot order, whatever finished first.
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ShotEnsemble::assemble(config, pump, grid, spec, &records)?)
}

pub fn fit_ensemble(
    pool: &ThreadPool,
    ensemble: &ShotEnsemble,
    det: &DetectorConfig,
    lines: &[i32],
) -> Result<Vec<FitRow>> {
    det.validate()?;
    let per_shot = pool.install(|| {
        (0..ensemble.shots())
            .into_par_iter()
            .map(|s| fit_shot(ensemble, det, lines, s))
            .collect::<Vec<_>>()
    });
    let mut rows = Vec::new();
    for r in per_shot {
        rows.extend(r?);
    }
    Ok(rows)
}
