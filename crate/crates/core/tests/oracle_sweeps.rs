use std::f64::consts::PI;

use deformq::spectrum::{
    box_spectrum_closed, box_state_capacity, oscillator_spectrum_closed, solve_spectrum_ode,
    undeformed_spectrum_closed, OdeConfig,
};
use deformq::statmech::{partition_function, DosSpec};
use deformq::{Cutoff, Deformation, QuadratureConfig, SystemSpec, UnitsConvention};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oscillator_ode_tracks_closed_form(s in -0.3f64..0.3, omega0 in 0.3f64..3.0, hbar in 0.5f64..2.0) {
        prop_assume!(s.abs() > 1e-6);
        let units = UnitsConvention { hbar, boltzmann: 1.0 };
        let spec = SystemSpec::harmonic(omega0);
        let e0 = 0.5 * hbar * omega0;
        let d = Deformation::linear(s);
        let r = solve_spectrum_ode(&spec, &d, e0, 40, &OdeConfig::default(), &units).unwrap();
        for l in &r.levels {
            let closed = oscillator_spectrum_closed(l.n, &d, &spec, &units).unwrap();
            prop_assert!(rel(l.energy, closed) < 1e-8, "n={} {} vs {}", l.n, l.energy, closed);
        }
    }

    #[test]
    fn box_ode_tracks_tan_squared(s in 1e-4f64..0.05, a in 0.5f64..2.0, m in 0.5f64..2.0) {
        let units = UnitsConvention::default();
        let spec = SystemSpec::QuantumBox { a, m };
        let gamma = PI / (2f64.sqrt() * a);
        // levels with tan argument below 1.4, well clear of the pole
        let n_max = ((1.4 / (gamma * s.sqrt())).floor() as u64).min(30);
        let r = solve_spectrum_ode(&spec, &Deformation::linear(s), 0.0, n_max, &OdeConfig::default(), &units).unwrap();
        for l in r.levels.iter().skip(1) {
            let closed = box_spectrum_closed(l.n, s, &spec, &units).unwrap();
            prop_assert!(rel(l.energy, closed) < 1e-8, "n={} {} vs {}", l.n, l.energy, closed);
        }
    }

    #[test]
    fn undeformed_power_law_is_analytic(nu in 0.6f64..12.0, k in 0.2f64..5.0, e0 in 0.05f64..2.0) {
        let units = UnitsConvention::default();
        let spec = SystemSpec::PowerLaw { k, nu, m: 1.0 };
        let r = solve_spectrum_ode(&spec, &Deformation::none(), e0, 30, &OdeConfig::default(), &units).unwrap();
        prop_assert_eq!(r.cutoff, Cutoff::LevelCapReached);
        for l in &r.levels {
            let exact = undeformed_spectrum_closed(l.n, &spec, e0, &units).unwrap();
            prop_assert!(rel(l.energy, exact) < 1e-8);
        }
    }

    #[test]
    fn deformation_lowers_the_partition_function(s in 0.01f64..2.0, t in 0.2f64..5.0, nu in 1.0f64..6.0) {
        let dos = DosSpec::from_system(SystemSpec::PowerLaw { k: 1.0, nu, m: 1.0 }, UnitsConvention::default());
        let cfg = QuadratureConfig::default();
        let z0 = partition_function(&dos, &Deformation::none(), t, &cfg).unwrap().value;
        let z = partition_function(&dos, &Deformation::linear(s), t, &cfg).unwrap().value;
        prop_assert!(z < z0);
        prop_assert!(z > z0 / (1.0 + s * 50.0 * t));
    }
}

#[test]
fn box_divergence_lands_on_the_pole() {
    let units = UnitsConvention::default();
    for (a, s) in [(1.0, 0.01), (2.0, 0.003), (0.7, 0.2)] {
        let spec = SystemSpec::QuantumBox { a, m: 1.0 };
        let gamma = PI / (2f64.sqrt() * a);
        let r = solve_spectrum_ode(
            &spec,
            &Deformation::linear(s),
            0.0,
            10_000,
            &OdeConfig::default(),
            &units,
        )
        .unwrap();
        let pole = PI / (2.0 * gamma * s.sqrt());
        match r.cutoff {
            Cutoff::DivergenceDetected { n_star } => {
                assert!((n_star - pole).abs() < 1e-6, "{n_star} vs {pole}")
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            r.levels.last().unwrap().n,
            box_state_capacity(s, &spec, &units).unwrap().count
        );
    }
}
