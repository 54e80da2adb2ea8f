use std::f64::consts::PI;

use raman_comb_core::model::{
    build_grid, normalize_config, CharacteristicsGrid, MediumConfig, PhysicalMedium, PumpPulse, PumpShape, RawMedium,
    DEFAULT_RAMAN_SHIFT,
};
use raman_comb_core::Complex64;

const HBAR: f64 = 1.054_571_817e-34;
const C: f64 = 299_792_458.0;

fn medium() -> PhysicalMedium {
    PhysicalMedium {
        length_m: 1.0,
        area_m2: 1.0e-9,
        density_m3: 2.7e25,
        pump_wavelength_m: 532e-9,
        raman_shift: 2.0 * PI * 125e12,
        stokes: 1,
        anti_stokes: 1,
        alpha1: vec![Complex64::new(1.0e-41, 3.0e-42), Complex64::new(9.0e-42, -2.0e-42)],
        beta: vec![0.0, 0.0, 0.0],
        damping_per_s: 0.0,
        langevin: false,
        pulse_duration_s: 1e-12,
        pulse_energy_j: 1e-8,
    }
}

/// Gain exponent of the transition between lines `n - 1` and `n`, straight
/// from SI quantities.
fn gain_oracle(p: &PhysicalMedium, upper: i32) -> f64 {
    let w0 = 2.0 * PI * C / p.pump_wavelength_m;
    let w = |n: i32| w0 + n as f64 * p.raman_shift;
    let n_p = p.pulse_energy_j / (HBAR * w0);
    let a1 = p.alpha1[(upper + p.stokes as i32 - 1) as usize].norm();
    2.0 * a1
        * (2.0 * PI * HBAR / C)
        * (p.density_m3 / p.area_m2).sqrt()
        * (w(upper) * w(upper - 1)).sqrt()
        * (p.length_m * n_p).sqrt()
}

#[test]
fn physical_gain_matches_the_si_formula() {
    let p = medium();
    let config = normalize_config(&RawMedium::Physical(p.clone())).unwrap();
    for c in &config.couplings {
        let want = gain_oracle(&p, c.upper);
        assert!((c.gain / want - 1.0).abs() < 1e-12, "{} vs {want}", c.gain);
        let a1 = p.alpha1[c.upper as usize];
        assert!((c.phase - a1.arg()).abs() < 1e-12);
    }
    assert!(config.is_two_mode());
    assert!((config.pump_photons - p.pump_photons()).abs() < 1e-6 * p.pump_photons());
}

#[test]
fn recorded_scales_round_trip_the_couplings() {
    let p = medium();
    let config = normalize_config(&RawMedium::Physical(p.clone())).unwrap();
    let scales = config.scales.as_ref().unwrap();
    for (k, upper) in [0, 1].into_iter().enumerate() {
        assert!((scales.alpha1[k] - p.alpha1[k]).norm() < 1e-12 * p.alpha1[k].norm());
        let a2 = p.alpha2(upper).unwrap();
        assert!((scales.alpha2[k] - a2).norm() < 1e-12 * a2.norm());
        let w = 2.0 * PI * C / p.pump_wavelength_m + upper as f64 * p.raman_shift;
        let want = p.alpha1[k].conj() * (2.0 * PI * HBAR * p.density_m3 * w / C);
        assert!((a2 - want).norm() < 1e-12 * want.norm());
    }
    assert_eq!(p.alpha2(2), None);
}

#[test]
fn gain_depends_on_density_over_area() {
    let p = medium();
    let g = |p: &PhysicalMedium| normalize_config(&RawMedium::Physical(p.clone())).unwrap().couplings[0].gain;
    let base = g(&p);
    let both = PhysicalMedium {
        area_m2: 2.0 * p.area_m2,
        density_m3: 2.0 * p.density_m3,
        ..p.clone()
    };
    assert!((g(&both) / base - 1.0).abs() < 1e-12);
    // Doubling the area while halving the density is not a symmetry.
    let opposite = PhysicalMedium {
        area_m2: 2.0 * p.area_m2,
        density_m3: 0.5 * p.density_m3,
        ..p.clone()
    };
    assert!((g(&opposite) / base - 0.5).abs() < 1e-12);
    let energy = PhysicalMedium {
        pulse_energy_j: 4.0 * p.pulse_energy_j,
        ..p
    };
    assert!((g(&energy) / base - 2.0).abs() < 1e-12);
}

#[test]
fn invalid_physical_media_are_config_errors() {
    let p = medium();
    for bad in [
        PhysicalMedium {
            length_m: 0.0,
            ..p.clone()
        },
        PhysicalMedium {
            alpha1: vec![Complex64::new(1e-41, 0.0)],
            ..p.clone()
        },
        PhysicalMedium {
            beta: vec![0.0; 2],
            ..p.clone()
        },
        PhysicalMedium {
            raman_shift: 1e18,
            ..p.clone()
        },
        PhysicalMedium {
            damping_per_s: -1.0,
            ..p.clone()
        },
    ] {
        assert!(normalize_config(&RawMedium::Physical(bad)).unwrap_err().is_config());
    }
}

#[test]
fn comb_couplings_carry_the_photon_energy_factor() {
    let config = MediumConfig::comb(2, 2, 10.0, 8.0, DEFAULT_RAMAN_SHIFT).unwrap();
    let s = DEFAULT_RAMAN_SHIFT;
    for c in &config.couplings {
        let n = c.upper as f64;
        let want = 10.0 * ((1.0 + n * s) * (1.0 + (n - 1.0) * s)).sqrt() / (1.0 - s).sqrt();
        assert!((c.gain - want).abs() < 1e-12);
    }
    assert!((config.mismatch().unwrap() - 8.0).abs() < 1e-12);
    assert!((config.delta_beta(1).unwrap() + 4.0).abs() < 1e-12);
    assert!((config.delta_beta(0).unwrap() - 4.0).abs() < 1e-12);
    let mu = config.coupling(0).unwrap();
    assert!((mu.norm() - 10.0 / (2.0 * config.pump_photons.sqrt())).abs() < 1e-18);
    assert_eq!(config.coupling(-2), None);
    assert_eq!(config.sideband_orders(), vec![-2, -1, 1, 2]);
}

#[test]
fn malformed_dimensionless_media_are_rejected() {
    let good = MediumConfig::two_mode(3.0, 0.0).unwrap();
    let mut missing_coupling = good.clone();
    missing_coupling.couplings.pop();
    let mut negative_gain = good.clone();
    negative_gain.couplings[0].gain = -1.0;
    let mut no_pump = good.clone();
    no_pump.lines.remove(1);
    for bad in [missing_coupling, negative_gain, no_pump] {
        assert!(normalize_config(&RawMedium::Dimensionless(bad))
            .unwrap_err()
            .is_config());
    }
    assert_eq!(normalize_config(&RawMedium::Dimensionless(good.clone())).unwrap(), good);
}

#[test]
fn default_pump_energy_norm() {
    let pump = PumpPulse::default();
    assert!((pump.energy_norm() - 0.431_79).abs() < 5e-6, "{}", pump.energy_norm());
    // Midpoint rule on a fine grid as an independent check.
    let n = 200_000;
    let mid: f64 = (0..n)
        .map(|k| pump.envelope((k as f64 + 0.5) / n as f64).powi(2))
        .sum::<f64>()
        / n as f64;
    assert!((pump.energy_norm() - mid).abs() < 1e-9);
    assert!((pump.partial_energy_norm(0.5) - 0.5 * pump.energy_norm()).abs() < 1e-12);
}

#[test]
fn cell_amplitudes_conserve_the_pump_energy() {
    let pump = PumpPulse::default();
    let grid = CharacteristicsGrid::unit(8, 512).unwrap();
    let amps = pump.cell_amplitudes(&grid, 1e6);
    let energy: f64 = amps.iter().map(|a| a * a).sum::<f64>() * grid.dtau();
    assert!((energy / 1e6 - 1.0).abs() < 1e-3);
    assert!(amps.iter().all(|a| *a <= pump.peak_amplitude(1e6) * (1.0 + 1e-12)));
}

#[test]
fn sampled_pump_averages_exactly() {
    let pump = PumpPulse::new(PumpShape::Samples {
        values: vec![0.0, 1.0, 3.0, 0.0],
    })
    .unwrap();
    assert!((pump.energy_norm() - 2.5).abs() < 1e-12);
    assert!((pump.cell_average(0.25, 0.75) - 2.0).abs() < 1e-12);
    assert!((pump.cell_average(0.375, 0.625) - 2.0).abs() < 1e-12);
    assert_eq!(pump.envelope(1.5), 0.0);
}

#[test]
fn invalid_pumps_and_grids_are_rejected() {
    for shape in [
        PumpShape::Samples { values: vec![] },
        PumpShape::Samples { values: vec![0.0; 3] },
        PumpShape::Samples {
            values: vec![1.0, -1.0],
        },
        PumpShape::SuperGaussian {
            order: 0,
            center: 0.5,
            width: 0.2,
        },
        PumpShape::SuperGaussian {
            order: 2,
            center: 0.5,
            width: 0.0,
        },
    ] {
        assert!(PumpPulse::new(shape).unwrap_err().is_config());
    }
    let negative = PumpPulse {
        energy_scale: -1.0,
        ..PumpPulse::default()
    };
    assert!(negative.validate().is_err());
    let off = PumpPulse {
        energy_scale: 0.0,
        ..PumpPulse::default()
    };
    assert!(off.validate().is_ok());
    assert!(CharacteristicsGrid::unit(1, 10).is_err());
    assert!(build_grid(-1.0, 1.0, 4, 4).is_err());
    let g = CharacteristicsGrid::unit(4, 8).unwrap().refined(2);
    assert_eq!((g.nz, g.ntau), (8, 16));
    assert!((g.dtau() - 1.0 / 16.0).abs() < 1e-15);
}
