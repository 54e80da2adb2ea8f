use proptest::prelude::*;
use raman_comb_core::model::{CharacteristicsGrid, MediumConfig, PumpPulse, DEFAULT_RAMAN_SHIFT};
use raman_comb_core::moments::{
    central_cells, correlation_coefficient, energy_crossing, manley_rowe_report, mean_intensity, propagate_covariance,
    propagate_profiles,
};
use raman_comb_core::propagator::{Integrator, Scheme};
use raman_comb_core::{Complex64, Error};

fn implicit() -> Integrator {
    Integrator::with_scheme(Scheme::Implicit)
}

/// Cholesky of a Hermitian matrix shifted by `shift` on the diagonal;
/// fails if it is not positive definite.
fn cholesky_ok(m: &[Complex64], n: usize, shift: f64) -> bool {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = m[j * n + j].re + shift;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn correlation_coefficient_never_exceeds_one(gain in 0.5f64..12.0, mismatch in -60.0f64..60.0) {
        let config = MediumConfig::two_mode(gain, mismatch).unwrap();
        let grid = CharacteristicsGrid::unit(64, 48).unwrap();
        let p = propagate_profiles(&config, &PumpPulse::default(), &grid, &implicit()).unwrap();
        for c in correlation_coefficient(&p).into_iter().flatten() {
            prop_assert!(c <= 1.0 + 1e-12, "{}", c);
        }
    }

    #[test]
    fn covariances_are_hermitian_and_positive(gain in 0.5f64..5.5, mismatch in -40.0f64..40.0) {
        let config = MediumConfig::two_mode(gain, mismatch).unwrap();
        let grid = CharacteristicsGrid::unit(32, 24).unwrap();
        let cov = propagate_covariance(&config, &PumpPulse::default(), &grid, &implicit()).unwrap();
        let n = grid.ntau;
        for m in [&cov.stokes, &cov.anti_stokes] {
            let trace: f64 = (0..n).map(|j| m[j * n + j].re).sum();
            for j in 0..n {
                for k in 0..n {
                    prop_assert!((m[j * n + k] - m[k * n + j].conj()).norm() <= 1e-12 * trace);
                }
            }
            prop_assert!(cholesky_ok(m, n, 1e-10 * trace));
        }
        for j in 0..n {
            let s = cov.profiles.stokes[j];
            prop_assert!((cov.stokes[j * n + j].re - s).abs() <= 1e-12 * s);
            prop_assert!((cov.cross[j * n + j] - cov.profiles.cross[j]).norm() <= 1e-12 * s);
        }
    }
}

#[test]
fn mean_bookkeeping_is_exact_for_the_implicit_scheme() {
    let config = MediumConfig::two_mode(8.0, 30.0).unwrap();
    let grid = CharacteristicsGrid::unit(64, 64).unwrap();
    let p = propagate_profiles(&config, &PumpPulse::default(), &grid, &implicit()).unwrap();
    let report = manley_rowe_report(&p);
    assert!(report.stokes_photons > 0.0 && report.anti_stokes_photons > 0.0);
    assert!(report.relative() < 1e-10, "{report:?}");
}

#[test]
fn decoupled_anti_stokes_stays_at_vacuum() {
    let config = MediumConfig::stokes_only(6.0).unwrap();
    let grid = CharacteristicsGrid::unit(48, 48).unwrap();
    let p = propagate_profiles(&config, &PumpPulse::default(), &grid, &implicit()).unwrap();
    let vac = p.vacuum_level();
    assert!(p.anti_stokes.iter().all(|a| (a - vac).abs() <= 1e-12 * vac));
    assert!(p.cross.iter().all(|c| c.norm() == 0.0));
    assert!(correlation_coefficient(&p).iter().all(Option::is_none));
    assert_eq!(mean_intensity(&p, 1).unwrap(), &p.anti_stokes[..]);
    assert!(matches!(mean_intensity(&p, 2), Err(Error::MissingLine(2))));
}

#[test]
fn phase_mismatched_pair_is_strongly_correlated() {
    let config = MediumConfig::two_mode(12.0, 30.0).unwrap();
    let grid = CharacteristicsGrid::unit(96, 96).unwrap();
    let p = propagate_profiles(&config, &PumpPulse::default(), &grid, &implicit()).unwrap();
    let vac = p.vacuum_level();
    let c = correlation_coefficient(&p);
    for j in central_cells(&p.stokes, vac, 0.8) {
        assert!(c[j].unwrap() > 0.99, "cell {j}: {:?}", c[j]);
    }
    let ts = energy_crossing(&p.stokes, vac, 0.1).unwrap();
    let ta = energy_crossing(&p.anti_stokes, vac, 0.1).unwrap();
    assert!((ts - ta).abs() < 0.1);
}

#[test]
fn unsupported_configurations_are_reported() {
    let grid = CharacteristicsGrid::unit(16, 16).unwrap();
    let pump = PumpPulse::default();
    let comb = MediumConfig::comb(2, 1, 2.0, 10.0, DEFAULT_RAMAN_SHIFT).unwrap();
    assert!(matches!(
        propagate_profiles(&comb, &pump, &grid, &implicit()),
        Err(Error::Unsupported(_))
    ));
    let mut damped = MediumConfig::two_mode(2.0, 10.0).unwrap();
    damped.damping = 1.0;
    damped.langevin = true;
    assert!(matches!(
        propagate_profiles(&damped, &pump, &grid, &implicit()),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn crossing_and_central_cells_follow_the_cumulative_energy() {
    let profile = [0.0, 1.0, 1.0, 1.0, 1.0, 0.0];
    assert!((energy_crossing(&profile, 0.0, 0.5).unwrap() - 3.0 / 6.0).abs() < 1e-12);
    assert!((energy_crossing(&profile, 0.0, 0.125).unwrap() - 1.5 / 6.0).abs() < 1e-12);
    assert_eq!(central_cells(&profile, 0.0, 0.5), 2..4);
    assert_eq!(energy_crossing(&[2.0; 4], 2.0, 0.1), None);
}
