//! Cross-checks between the numerical engines and the closed forms they must
//! reproduce. Each check returns its worst observed deviation against a fixed
//! threshold; [`run_all`] drives the `selftest` command.

use std::f64::consts::PI;

use serde::Serialize;

use crate::classical::{classical_period, frequency_law};
use crate::error::Result;
use crate::model::{Cutoff, Deformation, SystemSpec, UnitsConvention};
use crate::quadrature::{derivative, DerivativeOrder, QuadratureConfig};
use crate::spectrum::{
    box_gamma, box_spectrum_closed, default_ground_energy, oscillator_spectrum_closed,
    solve_spectrum_ode, undeformed_spectrum_closed, OdeConfig,
};
use crate::statmech::{
    effective_temperature, heat_capacity, internal_energy_exact, internal_energy_first_order,
    partition_exponential, partition_from_levels, partition_function, DosSpec, EnergyLaw,
    EnergyRoute,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen (or the failing quantity).
    pub observed: f64,
    pub threshold: String,
    pub detail: String,
}

impl CheckOutcome {
    fn from_worst(id: u8, name: &'static str, worst: Result<f64>, limit: f64) -> Self {
        match worst {
            Ok(w) => Self {
                id,
                name,
                passed: w < limit,
                observed: w,
                threshold: format!("< {limit:e}"),
                detail: String::new(),
            },
            Err(e) => Self::errored(id, name, format!("< {limit:e}"), e),
        }
    }

    fn errored(id: u8, name: &'static str, threshold: String, e: crate::Error) -> Self {
        Self {
            id,
            name,
            passed: false,
            observed: f64::NAN,
            threshold,
            detail: e.to_string(),
        }
    }
}

const UNITS: UnitsConvention = UnitsConvention {
    hbar: 1.0,
    boltzmann: 1.0,
};
const UNIT_BOX: SystemSpec = SystemSpec::QuantumBox { a: 1.0, m: 1.0 };

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Points of the additive recurrence x_k = frac(x₀ + kφ⁻¹), mapped to [lo, hi).
fn weyl(k: usize, offset: f64, lo: f64, hi: f64) -> f64 {
    const INV_GOLDEN: f64 = 0.618_033_988_749_894_8;
    let x = (offset + k as f64 * INV_GOLDEN).fract();
    lo + (hi - lo) * x
}

fn flat_dos() -> DosSpec {
    DosSpec::from_system(SystemSpec::harmonic(1.0), UNITS)
}

pub fn box_closed_vs_ode() -> CheckOutcome {
    let worst = (|| {
        let gamma = box_gamma(&UNIT_BOX, &UNITS)?;
        let mut worst: f64 = 0.0;
        for s in [1e-4, 1e-3, 1e-2] {
            let n_max = (1.4 / (gamma * f64::sqrt(s))).ceil() as u64 - 1;
            let r = solve_spectrum_ode(
                &UNIT_BOX,
                &Deformation::linear(s),
                0.0,
                n_max,
                &OdeConfig::default(),
                &UNITS,
            )?;
            for l in r.levels.iter().skip(1) {
                worst = worst.max(rel(
                    l.energy,
                    box_spectrum_closed(l.n, s, &UNIT_BOX, &UNITS)?,
                ));
            }
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(1, "box tan² closed form vs ODE", worst, 1e-8)
}

pub fn oscillator_closed_vs_ode() -> CheckOutcome {
    let spec = SystemSpec::harmonic(1.0);
    let cfg = OdeConfig::default();
    let worst = (|| {
        let mut worst: f64 = 0.0;
        for s in [0.2, -0.2, 0.05, -0.05] {
            let d = Deformation::linear(s);
            let r = solve_spectrum_ode(&spec, &d, 0.5, 100, &cfg, &UNITS)?;
            for l in &r.levels {
                let closed = oscillator_spectrum_closed(l.n, &d, &spec, &UNITS)?;
                worst = worst.max((l.energy - closed).abs() / closed.abs().max(cfg.abs_tol));
            }
        }
        Ok(worst)
    })();
    let mut out =
        CheckOutcome::from_worst(2, "oscillator exponential closed form vs ODE", worst, 1e-8);
    // convergence onto the stable fixed point −1/s = 2
    match solve_spectrum_ode(&spec, &Deformation::linear(-0.5), 0.5, 60, &cfg, &UNITS) {
        Ok(r) => {
            let last = r.levels.last().expect("ground level is always present");
            let gap = (last.energy - 2.0).abs();
            out.detail = format!("|E_{} - 2| = {gap:e}", last.n);
            out.passed &= gap < 1e-10;
        }
        Err(e) => {
            out.passed = false;
            out.detail = e.to_string();
        }
    }
    out
}

pub fn undeformed_reductions() -> CheckOutcome {
    let cfg = OdeConfig::default();
    let none = Deformation::none();
    let worst = (|| {
        let mut worst: f64 = 0.0;
        let gamma = box_gamma(&UNIT_BOX, &UNITS)?;
        let r = solve_spectrum_ode(&UNIT_BOX, &none, 0.0, 50, &cfg, &UNITS)?;
        for l in r.levels.iter().skip(1) {
            worst = worst.max(rel(l.energy, (gamma * l.n as f64).powi(2)));
        }
        let osc = SystemSpec::harmonic(1.0);
        let r = solve_spectrum_ode(&osc, &none, 0.5, 100, &cfg, &UNITS)?;
        for l in &r.levels {
            worst = worst.max(rel(l.energy, 0.5 + l.n as f64));
        }
        for nu in [0.8, 1.0, 3.0, 6.0] {
            let spec = SystemSpec::PowerLaw { k: 1.0, nu, m: 1.0 };
            let e0 = default_ground_energy(&spec, &UNITS)?;
            let r = solve_spectrum_ode(&spec, &none, e0, 50, &cfg, &UNITS)?;
            for l in &r.levels {
                worst = worst.max(rel(
                    l.energy,
                    undeformed_spectrum_closed(l.n, &spec, e0, &UNITS)?,
                ));
            }
        }
        // ν = 2 with k = ½ω₀² is the oscillator, deformed or not
        let omega = 1.3;
        let quadratic = SystemSpec::PowerLaw {
            k: 0.5 * omega * omega,
            nu: 2.0,
            m: 1.0,
        };
        for s in [0.0, 0.1, -0.1] {
            let d = Deformation::linear(s);
            let a = solve_spectrum_ode(&quadratic, &d, 0.65, 40, &cfg, &UNITS)?;
            let b = solve_spectrum_ode(&SystemSpec::harmonic(omega), &d, 0.65, 40, &cfg, &UNITS)?;
            for (x, y) in a.levels.iter().zip(&b.levels) {
                worst = worst.max(rel(x.energy, y.energy));
            }
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(3, "s=0 reductions and nu=2 consistency", worst, 1e-8)
}

pub fn small_s_box_limit() -> CheckOutcome {
    let worst = (|| {
        let gamma = box_gamma(&UNIT_BOX, &UNITS)?;
        let mut worst: f64 = 0.0;
        for n in 1..=10u64 {
            let e = box_spectrum_closed(n, 1e-8, &UNIT_BOX, &UNITS)?;
            worst = worst.max(rel(e, (gamma * n as f64).powi(2)));
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(4, "small-s limit of tan² spectrum", worst, 1e-3)
}

pub fn power_law_partition_closed_form() -> CheckOutcome {
    let worst = (|| {
        let mut worst: f64 = 0.0;
        for nu in [1.0, 2.0, 3.0, 10.0] {
            let dos = DosSpec::from_system(SystemSpec::PowerLaw { k: 1.0, nu, m: 1.0 }, UNITS);
            for t in [0.5, 1.0, 5.0] {
                let z = partition_function(
                    &dos,
                    &Deformation::none(),
                    t,
                    &QuadratureConfig::default(),
                )?;
                worst = worst.max(rel(z.value, dos.undeformed_partition(t)?));
            }
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(
        5,
        "undeformed power-law Z vs Gamma closed form",
        worst,
        1e-8,
    )
}

/// Δ(s) = |U_exact − U_first-order| for the flat density at T = 1.
pub fn perturbative_gap(s: f64) -> Result<f64> {
    let dos = flat_dos();
    let exact = internal_energy_exact(
        &dos,
        &Deformation::linear(s),
        1.0,
        &QuadratureConfig::default(),
    )?;
    let first = internal_energy_first_order(&dos.energy_law()?, s, 1.0)?;
    Ok((exact - first).abs())
}

pub fn perturbative_order() -> CheckOutcome {
    let name = "second-order remainder of first-order energy";
    let threshold = "in [3.2, 4.8]".to_string();
    let ratios: Result<Vec<(f64, f64)>> = [0.2, 0.1, 0.05]
        .into_iter()
        .map(|s| Ok((s, perturbative_gap(s)? / perturbative_gap(0.5 * s)?)))
        .collect();
    match ratios {
        Ok(ratios) => {
            let outside = ratios.iter().find(|(_, r)| !(3.2..=4.8).contains(r));
            CheckOutcome {
                id: 6,
                name,
                passed: outside.is_none(),
                observed: outside.map_or(ratios[0].1, |(_, r)| *r),
                threshold,
                detail: ratios
                    .iter()
                    .map(|(s, r)| format!("Δ({s})/Δ({}) = {r:.5}", 0.5 * s))
                    .collect::<Vec<_>>()
                    .join(", "),
            }
        }
        Err(e) => CheckOutcome::errored(6, name, threshold, e),
    }
}

/// T²·∂_T ln Z by numerical differentiation of the quadrature.
pub fn energy_from_log_partition(
    dos: &DosSpec,
    d: &Deformation,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let slope = derivative(
        |x| Ok(partition_function(dos, d, x, cfg)?.value.ln()),
        t,
        DerivativeOrder::First,
    )?;
    Ok(t * t * slope)
}

pub fn energy_route_identity() -> CheckOutcome {
    let cfg = QuadratureConfig::default();
    let worst = (|| {
        let dos = flat_dos();
        let mut worst: f64 = 0.0;
        for s in [0.05, 0.1] {
            let d = Deformation::linear(s);
            for t in [0.5, 1.0, 2.0] {
                let ratio_route = internal_energy_exact(&dos, &d, t, &cfg)?;
                let log_route = energy_from_log_partition(&dos, &d, t, &cfg)?;
                worst = worst.max(rel(log_route, ratio_route));
            }
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(7, "(Z0/Z - 1)/s vs T² d ln Z/dT", worst, 1e-6)
}

pub fn named_first_order_forms() -> CheckOutcome {
    let worst = (|| {
        let mut worst: f64 = 0.0;
        for (k, &(s, t)) in [(0.1, 1.0), (0.03, 2.5), (-0.02, 0.7), (0.0, 4.0)]
            .iter()
            .enumerate()
        {
            let n = (k + 1) as u64;
            let nf = n as f64;
            let ideal = EnergyLaw::IdealGas { n };
            worst = worst.max(rel(
                internal_energy_first_order(&ideal, s, t)?,
                0.5 * nf * t * (1.0 - s * t),
            ));
            let c = heat_capacity(&EnergyRoute::FirstOrder { law: &ideal, s }, t)?;
            worst = worst.max(rel(c, 0.5 * nf * (1.0 - 2.0 * s * t)));
            for nu in [1.0, 2.0, 3.0, 7.0] {
                let law = EnergyLaw::PowerLawGas { n, nu };
                let coef = 1.0 / nu + 0.5;
                worst = worst.max(rel(
                    internal_energy_first_order(&law, s, t)?,
                    coef * nf * t * (1.0 - s * t),
                ));
                let c = heat_capacity(&EnergyRoute::FirstOrder { law: &law, s }, t)?;
                worst = worst.max(rel(c, coef * nf * (1.0 - 2.0 * s * t)));
                if nu == 2.0 && c != nf * (1.0 - 2.0 * s * t) {
                    worst = f64::INFINITY;
                }
            }
            let a = 0.5 + k as f64;
            let phonon = EnergyLaw::Phonon { a };
            worst = worst.max(rel(
                internal_energy_first_order(&phonon, s, t)?,
                a * t.powi(4) * (1.0 - 4.0 * s * t),
            ));
            let c = heat_capacity(&EnergyRoute::FirstOrder { law: &phonon, s }, t)?;
            worst = worst.max(rel(c, a * (4.0 * t.powi(3) - 20.0 * s * t.powi(4))));
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(
        8,
        "named first-order energy and heat-capacity forms",
        worst,
        1e-12,
    )
}

pub fn exponential_effective_temperature() -> CheckOutcome {
    let cfg = QuadratureConfig::default();
    let worst = (|| {
        let mut worst: f64 = 0.0;
        let doses = [
            flat_dos(),
            DosSpec::from_system(
                SystemSpec::PowerLaw {
                    k: 1.0,
                    nu: 3.0,
                    m: 1.0,
                },
                UNITS,
            ),
            DosSpec::from_system(
                SystemSpec::PowerLaw {
                    k: 2.0,
                    nu: 1.0,
                    m: 0.5,
                },
                UNITS,
            ),
        ];
        for k in 0..20 {
            let t = weyl(k, 0.1, 0.2, 5.0);
            // 1/T + s ranges over (0.15/T, 3/T)
            let s = weyl(k, 0.37, -0.85, 2.0) / t;
            let t_star = effective_temperature(t, s)?;
            for dos in &doses {
                let z = partition_exponential(dos, s, t, &cfg)?;
                worst = worst.max(rel(z.value, dos.undeformed_partition(t_star)?));
            }
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(
        9,
        "exponential deformation via effective temperature",
        worst,
        1e-8,
    )
}

pub fn discrete_vs_continuum() -> CheckOutcome {
    let worst = (|| {
        let spec = SystemSpec::harmonic(1.0);
        let levels = solve_spectrum_ode(
            &spec,
            &Deformation::none(),
            0.5,
            400,
            &OdeConfig::default(),
            &UNITS,
        )?;
        debug_assert_eq!(levels.cutoff, Cutoff::LevelCapReached);
        let discrete = partition_from_levels(&levels, 10.0)?.value;
        let continuum = partition_function(
            &flat_dos(),
            &Deformation::none(),
            10.0,
            &QuadratureConfig::default(),
        )?;
        Ok(rel(discrete, continuum.value))
    })();
    CheckOutcome::from_worst(10, "level sum vs continuum Z at T = 10ħω", worst, 1e-2)
}

pub fn classical_period_oracle() -> CheckOutcome {
    let worst = (|| {
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let coupling = weyl(k, 0.2, 0.2, 5.0);
            let nu = weyl(k, 0.55, 0.5, 8.0);
            let e = weyl(k, 0.8, 0.1, 10.0);
            let m = 1.0;
            let law = frequency_law(&SystemSpec::PowerLaw { k: coupling, nu, m }, &UNITS)?;
            let omega = law.eval(e)?;
            let period = classical_period(coupling, nu, m, e)?;
            worst = worst.max(rel(omega, 2.0 * PI / period));
        }
        Ok(worst)
    })();
    CheckOutcome::from_worst(11, "alpha(k,nu) vs turning-point period", worst, 1e-6)
}

pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        box_closed_vs_ode(),
        oscillator_closed_vs_ode(),
        undeformed_reductions(),
        small_s_box_limit(),
        power_law_partition_closed_form(),
        perturbative_order(),
        energy_route_identity(),
        named_first_order_forms(),
        exponential_effective_temperature(),
        discrete_vs_continuum(),
        classical_period_oracle(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weyl_points_stay_in_range() {
        for k in 0..100 {
            let x = weyl(k, 0.3, -1.0, 2.0);
            assert!((-1.0..2.0).contains(&x));
        }
    }
}
