use raman_comb_core::ensemble::{
    mean_and_error, phase_excursion, run_ensemble, run_shot, sample_vacuum, shot_pump_scale, EnsembleSpec,
};
use raman_comb_core::model::{CharacteristicsGrid, MediumConfig, PumpPulse, DEFAULT_RAMAN_SHIFT};
use raman_comb_core::moments::propagate_profiles;
use raman_comb_core::propagator::{Integrator, Scheme};
use raman_comb_core::rng::{substream, Purpose, StreamId};
use raman_comb_core::{Complex64, Error};

#[test]
fn vacuum_seeds_have_the_vacuum_covariance() {
    let config = MediumConfig::comb(2, 2, 1.0, 0.0, DEFAULT_RAMAN_SHIFT).unwrap();
    let grid = CharacteristicsGrid::unit(20, 50).unwrap();
    let draws = 400;
    let (mut s, mut a, mut q) = (0.0, 0.0, 0.0);
    let mut pair = Complex64::new(0.0, 0.0);
    let mut square = Complex64::new(0.0, 0.0);
    for d in 0..draws {
        let mut rng = substream(4, StreamId::new(d, 0, Purpose::Vacuum, 0));
        let init = sample_vacuum(&config, &grid, &mut rng);
        for order in [-2, 2] {
            assert!(init.line(order).unwrap().iter().all(|b| *b == Complex64::new(0.0, 0.0)));
        }
        let (bs, ba) = (init.line(-1).unwrap(), init.line(1).unwrap());
        s += bs.iter().map(|b| b.norm_sqr()).sum::<f64>();
        a += ba.iter().map(|b| b.norm_sqr()).sum::<f64>();
        q += init.coherence.iter().map(|b| b.norm_sqr()).sum::<f64>();
        pair += bs.iter().zip(ba).map(|(x, y)| x * y).sum::<Complex64>();
        square += bs.iter().map(|x| x * x).sum::<Complex64>();
    }
    let nt = (draws * grid.ntau) as f64;
    let nz = (draws * grid.nz) as f64;
    // Relative standard error of an exponential mean is 1/√n.
    assert!((s / nt * grid.dtau() - 1.0).abs() < 5.0 / nt.sqrt());
    assert!((a / nt * grid.dtau() - 1.0).abs() < 5.0 / nt.sqrt());
    assert!((q / nz * grid.dz() - 1.0).abs() < 5.0 / nz.sqrt());
    // Circular and mutually independent.
    assert!((pair / nt * grid.dtau()).norm() < 5.0 / nt.sqrt());
    assert!((square / nt * grid.dtau()).norm() < 5.0 / nt.sqrt());
}

#[test]
fn shots_are_reproducible_in_isolation() {
    let config = MediumConfig::two_mode(5.0, 30.0).unwrap();
    let grid = CharacteristicsGrid::unit(24, 24).unwrap();
    let pump = PumpPulse::default();
    let spec = EnsembleSpec::new(6, 2, 42);
    let ens = run_ensemble(&config, &pump, &grid, &spec).unwrap();
    for (shot, fiber) in [(4, 1), (0, 0), (5, 0)] {
        let rec = run_shot(&config, &pump, &grid, &spec, shot, fiber).unwrap();
        assert_eq!(rec.seed, Some(42));
        for order in [-1, 1] {
            assert_eq!(rec.line(order).unwrap(), ens.amplitude(shot, fiber, order).unwrap());
        }
    }
    assert_eq!(ens, run_ensemble(&config, &pump, &grid, &spec).unwrap());
    let other = run_ensemble(&config, &pump, &grid, &EnsembleSpec::new(6, 2, 43)).unwrap();
    assert_ne!(ens.data, other.data);
    // Fibers are independent draws.
    assert_ne!(ens.amplitude(2, 0, -1).unwrap(), ens.amplitude(2, 1, -1).unwrap());
}

#[test]
fn shot_errors_name_the_shot() {
    let config = MediumConfig::two_mode(20.0, 30.0).unwrap();
    let grid = CharacteristicsGrid::unit(16, 16).unwrap();
    let err = run_ensemble(&config, &PumpPulse::default(), &grid, &EnsembleSpec::new(3, 1, 0)).unwrap_err();
    match &err {
        Error::Shot { shot, fiber, source } => {
            assert_eq!((*shot, *fiber), (0, 0));
            assert!(matches!(**source, Error::StepSize { .. }));
        }
        other => panic!("unexpected {other}"),
    }
    assert!(err.is_numeric());
    assert!(EnsembleSpec::new(0, 1, 0).validate().unwrap_err().is_config());
    assert!(EnsembleSpec::new(3, 3, 0).validate().unwrap_err().is_config());
}

#[test]
fn pump_jitter_draws_have_the_requested_spread() {
    let spec = EnsembleSpec {
        pump_jitter: 0.05,
        ..EnsembleSpec::new(4000, 1, 8)
    };
    let scales: Vec<f64> = (0..spec.shots).map(|s| shot_pump_scale(&spec, s)).collect();
    let (mean, err) = mean_and_error(&scales);
    let sd = err * (scales.len() as f64).sqrt();
    assert!((mean - 1.0).abs() < 5.0 * 0.05 / 4000f64.sqrt());
    assert!((sd / 0.05 - 1.0).abs() < 0.06);
    assert_eq!(shot_pump_scale(&EnsembleSpec::new(1, 1, 8), 0), 1.0);
}

#[test]
fn monte_carlo_means_agree_with_the_moment_propagation() {
    let config = MediumConfig::two_mode(6.0, 30.0).unwrap();
    let grid = CharacteristicsGrid::unit(32, 32).unwrap();
    let pump = PumpPulse::default();
    let spec = EnsembleSpec {
        integrator: Integrator::with_scheme(Scheme::Implicit),
        ..EnsembleSpec::new(3000, 1, 77)
    };
    let ens = run_ensemble(&config, &pump, &grid, &spec).unwrap();
    let profiles = propagate_profiles(&config, &pump, &grid, &spec.integrator).unwrap();
    let dt = grid.dtau();
    for (order, profile) in [(-1, &profiles.stokes), (1, &profiles.anti_stokes)] {
        let energies = ens.energies(0, order).unwrap();
        let (mean, err) = mean_and_error(&energies);
        let want: f64 = profile.iter().sum::<f64>() * dt;
        assert!(
            (mean - want).abs() < 5.0 * err,
            "order {order}: {mean} ± {err} vs {want}"
        );
    }
    // Pulse-integrated ⟨b_{-1} b_{+1}⟩ per cell, summed.
    let cross: Vec<Complex64> = (0..spec.shots)
        .map(|s| {
            let bs = ens.amplitude(s, 0, -1).unwrap();
            let ba = ens.amplitude(s, 0, 1).unwrap();
            bs.iter().zip(ba).map(|(x, y)| x * y).sum::<Complex64>() * dt
        })
        .collect();
    let want: Complex64 = profiles.cross.iter().sum::<Complex64>() * dt;
    for part in [|c: &Complex64| c.re, |c: &Complex64| c.im] {
        let v: Vec<f64> = cross.iter().map(part).collect();
        let (mean, err) = mean_and_error(&v);
        assert!(
            (mean - part(&want)).abs() < 5.0 * err,
            "{mean} ± {err} vs {}",
            part(&want)
        );
    }
}

#[test]
fn phase_excursion_of_a_flat_phase_is_zero() {
    let amp: Vec<Complex64> = (0..40)
        .map(|j| Complex64::from_polar((j as f64 * 0.2).sin().abs() + 0.1, 0.7))
        .collect();
    assert!(phase_excursion(&amp, 0.8) < 1e-12);
    let chirped: Vec<Complex64> = (0..40).map(|j| Complex64::from_polar(1.0, 0.02 * j as f64)).collect();
    let e = phase_excursion(&chirped, 0.8);
    assert!(e > 0.2 && e < 0.5, "{e}");
}
