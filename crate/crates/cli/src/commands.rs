use clap::ValueEnum;
use deformq::spectrum::{
    box_spectrum_closed, default_ground_energy, oscillator_spectrum_closed, solve_spectrum_ode,
    undeformed_spectrum_closed,
};
use deformq::statmech::{
    exact_point, exponential_point, first_order_point, partition_first_order, DosSpec, EnergyLaw,
};
use deformq::validation::{run_all, CheckOutcome};
use deformq::{Cutoff, DeformationFamily, Error, SystemSpec, ThermoPoint};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{LawKind, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ode,
    Closed,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Exact,
    FirstOrder,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    S,
    #[value(name = "T")]
    T,
    Nu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observable {
    #[value(name = "Z")]
    Z,
    #[value(name = "U")]
    U,
    #[value(name = "C")]
    C,
    /// Energy of level `--level`
    #[value(name = "E")]
    E,
}

/// Closed-form level n, or None when the configuration has none.
fn closed_level(cfg: &RunConfig, n: u64, e0: f64) -> Option<Result<f64, Error>> {
    let d = &cfg.deformation;
    if d.s == 0.0 {
        return Some(undeformed_spectrum_closed(n, &cfg.system, e0, &cfg.units));
    }
    if d.family != DeformationFamily::Linear {
        return None;
    }
    match cfg.system {
        SystemSpec::QuantumBox { .. } => Some(box_spectrum_closed(n, d.s, &cfg.system, &cfg.units)),
        SystemSpec::Harmonic { .. } => {
            Some(oscillator_spectrum_closed(n, d, &cfg.system, &cfg.units))
        }
        SystemSpec::PowerLaw { .. } => None,
    }
}

pub fn spectrum(cfg: &RunConfig, n_max: u64, method: Method) -> Result<Table, CliError> {
    cfg.validate()?;
    let e0 = default_ground_energy(&cfg.system, &cfg.units)?;
    let mut table = Table::new(vec!["n", "E_ode", "E_closed", "rel_diff"]);
    let cutoff = match method {
        Method::Closed => {
            if closed_level(cfg, 0, e0).is_none() {
                return Err(CliError::Usage {
                    field: "method",
                    reason: format!(
                        "no closed form for the {} system with the {:?} deformation at s = {}",
                        cfg.system.name(),
                        cfg.deformation.family,
                        cfg.deformation.s
                    ),
                });
            }
            let mut cutoff = Cutoff::LevelCapReached;
            for n in 0..=n_max {
                match closed_level(cfg, n, e0).expect("checked above") {
                    Ok(e) => table.push(vec![n.into(), Cell::Empty, e.into(), Cell::Empty]),
                    Err(Error::OutOfDomain { n_star, .. }) => {
                        cutoff = Cutoff::DivergenceDetected { n_star };
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            cutoff
        }
        Method::Ode | Method::Both => {
            let r = solve_spectrum_ode(
                &cfg.system,
                &cfg.deformation,
                e0,
                n_max,
                &cfg.ode,
                &cfg.units,
            )?;
            for level in &r.levels {
                let closed = match method {
                    Method::Both => closed_level(cfg, level.n, e0).and_then(|c| c.ok()),
                    _ => None,
                };
                let diff = closed.map(|c| (level.energy - c).abs() / c.abs().max(cfg.ode.abs_tol));
                table.push(vec![
                    level.n.into(),
                    level.energy.into(),
                    closed.into(),
                    diff.into(),
                ]);
            }
            r.cutoff
        }
    };
    table.note("cutoff", cutoff);
    Ok(table)
}

pub fn dos(cfg: &RunConfig, e_min: f64, e_max: f64, count: usize) -> Result<Table, CliError> {
    cfg.validate()?;
    let grid = linspace(e_min, e_max, count, "e-count")?;
    let density = DosSpec::from_system(cfg.system, cfg.units);
    let spacing = if count > 1 { grid[1] - grid[0] } else { 0.0 };
    let mut table = Table::new(vec!["E", "rho0", "rho", "states_in_bin"]);
    for e in grid {
        let rho0 = density.rho0(e)?;
        let rho = deformq::statmech::deformed_dos(&density, &cfg.deformation, e)?;
        let states = (spacing > 0.0).then_some(rho * spacing);
        table.push(vec![e.into(), rho0.into(), rho.into(), states.into()]);
    }
    table.note("bin_width", spacing);
    Ok(table)
}

fn linspace(
    start: f64,
    stop: f64,
    count: usize,
    field: &'static str,
) -> Result<Vec<f64>, CliError> {
    if !(start.is_finite() && stop.is_finite()) {
        return Err(CliError::Usage {
            field,
            reason: "range ends must be finite".into(),
        });
    }
    match count {
        0 => Err(CliError::Usage {
            field,
            reason: "count must be >= 1".into(),
        }),
        1 => Ok(vec![start]),
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect())
        }
    }
}

/// First-order energy law for `cfg.law`, scaled to its particle number.
fn energy_law(cfg: &RunConfig) -> Result<EnergyLaw, CliError> {
    let n = cfg.law.particles;
    Ok(match cfg.law.kind {
        LawKind::IdealGas => EnergyLaw::IdealGas { n },
        LawKind::Phonon => EnergyLaw::Phonon {
            a: cfg.law.phonon_a.expect("validated"),
        },
        LawKind::System => match DosSpec::from_system(cfg.system, cfg.units).energy_law()? {
            EnergyLaw::IdealGas { .. } => EnergyLaw::IdealGas { n },
            EnergyLaw::PowerLawGas { nu, .. } => EnergyLaw::PowerLawGas { n, nu },
            other if n == 1 => other,
            _ => {
                return Err(CliError::Usage {
                    field: "particles",
                    reason: "this density of states has no named many-particle law".into(),
                })
            }
        },
    })
}

/// One thermodynamic point at thermal energy `theta` = k_B·T.
fn thermo_point(cfg: &RunConfig, route: Route, theta: f64) -> Result<ThermoPoint, CliError> {
    let d = cfg.deformation;
    match route {
        Route::Exact => {
            if cfg.law.kind != LawKind::System {
                return Err(CliError::Usage {
                    field: "law",
                    reason:
                        "the exact route integrates the system density of states; use --law system"
                            .into(),
                });
            }
            if cfg.law.particles != 1 {
                return Err(CliError::Usage {
                    field: "particles",
                    reason: "the exact route is per particle".into(),
                });
            }
            let density = DosSpec::from_system(cfg.system, cfg.units);
            Ok(match d.family {
                DeformationFamily::Linear => exact_point(&density, &d, theta, &cfg.quad)?,
                DeformationFamily::Exponential => {
                    exponential_point(&density, d.s, theta, &cfg.quad)?
                }
            })
        }
        Route::FirstOrder => {
            let law = energy_law(cfg)?;
            let z = if cfg.law.kind == LawKind::System && cfg.law.particles == 1 {
                Some(partition_first_order(
                    &DosSpec::from_system(cfg.system, cfg.units),
                    d.s,
                    theta,
                )?)
            } else {
                None
            };
            Ok(first_order_point(&law, d.s, theta, z)?)
        }
        Route::Both => unreachable!("expanded by the caller"),
    }
}

fn route_name(p: &ThermoPoint) -> String {
    serde_json::to_value(p.route)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn check_temperature(t: f64) -> Result<(), CliError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage {
            field: "T",
            reason: format!("temperatures must be > 0, got {t}"),
        })
    }
}

pub fn thermo(cfg: &RunConfig, temperatures: &[f64], route: Route) -> Result<Table, CliError> {
    cfg.validate()?;
    if temperatures.is_empty() {
        return Err(CliError::Usage {
            field: "T",
            reason: "at least one temperature is required".into(),
        });
    }
    for &t in temperatures {
        check_temperature(t)?;
    }
    let routes: &[Route] = match route {
        Route::Both => &[Route::Exact, Route::FirstOrder],
        Route::Exact => &[Route::Exact],
        Route::FirstOrder => &[Route::FirstOrder],
    };
    let kb = cfg.units.boltzmann;
    let mut table = Table::new(vec!["T", "Z", "U", "C", "route"]);
    for &t in temperatures {
        for &r in routes {
            let p = thermo_point(cfg, r, kb * t)?;
            table.push(vec![
                t.into(),
                p.z.into(),
                p.u.into(),
                (kb * p.c).into(),
                route_name(&p).into(),
            ]);
        }
    }
    Ok(table)
}

pub struct SweepArgs {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub observable: Observable,
    pub temperature: f64,
    pub route: Route,
    pub level: Option<u64>,
}

pub struct SweepOutput {
    pub table: Table,
    pub failed: usize,
}

fn sweep_row(cfg: &RunConfig, args: &SweepArgs, x: f64) -> Result<f64, CliError> {
    let mut cfg = cfg.clone();
    let mut t = args.temperature;
    match args.axis {
        Axis::S => cfg.deformation.s = x,
        Axis::T => t = x,
        Axis::Nu => {
            if let SystemSpec::PowerLaw { nu, .. } = &mut cfg.system {
                *nu = x;
            }
        }
    }
    cfg.validate()?;
    if args.observable == Observable::E {
        let level = args.level.expect("checked by sweep");
        let e0 = default_ground_energy(&cfg.system, &cfg.units)?;
        let r = solve_spectrum_ode(
            &cfg.system,
            &cfg.deformation,
            e0,
            level,
            &cfg.ode,
            &cfg.units,
        )?;
        return r
            .levels
            .iter()
            .find(|l| l.n == level)
            .map(|l| l.energy)
            .ok_or_else(|| CliError::Usage {
                field: "level",
                reason: format!("level {level} not reached: {}", json!(r.cutoff)),
            });
    }
    check_temperature(t)?;
    let kb = cfg.units.boltzmann;
    let p = thermo_point(&cfg, args.route, kb * t)?;
    match args.observable {
        Observable::Z => p.z.ok_or_else(|| CliError::Usage {
            field: "observable",
            reason: "Z is not available for this law".into(),
        }),
        Observable::U => Ok(p.u),
        Observable::C => Ok(kb * p.c),
        Observable::E => unreachable!(),
    }
}

pub fn sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<SweepOutput, CliError> {
    cfg.validate()?;
    if args.count < 2 {
        return Err(CliError::Usage {
            field: "count",
            reason: "a sweep needs count >= 2".into(),
        });
    }
    if args.route == Route::Both {
        return Err(CliError::Usage {
            field: "route",
            reason: "a sweep uses a single route".into(),
        });
    }
    if args.axis == Axis::Nu && !matches!(cfg.system, SystemSpec::PowerLaw { .. }) {
        return Err(CliError::Usage {
            field: "axis",
            reason: "the nu axis needs --system powerlaw".into(),
        });
    }
    if args.observable == Observable::E && args.level.is_none() {
        return Err(CliError::Usage {
            field: "level",
            reason: "observable E needs --level".into(),
        });
    }
    let grid = linspace(args.start, args.stop, args.count, "count")?;
    let results: Vec<Result<f64, CliError>> =
        grid.par_iter().map(|&x| sweep_row(cfg, args, x)).collect();

    let axis = match args.axis {
        Axis::S => "s",
        Axis::T => "T",
        Axis::Nu => "nu",
    };
    let observable = match args.observable {
        Observable::Z => "Z",
        Observable::U => "U",
        Observable::C => "C",
        Observable::E => "E_n",
    };
    let mut table = Table::new(vec![axis, observable, "error"]);
    let mut failed = 0;
    for (x, r) in grid.into_iter().zip(results) {
        match r {
            Ok(v) => table.push(vec![x.into(), v.into(), Cell::Empty]),
            Err(e) => {
                failed += 1;
                table.push(vec![x.into(), Cell::Empty, e.to_string().into()]);
            }
        }
    }
    if let Some(level) = args.level.filter(|_| args.observable == Observable::E) {
        table.note("level", level);
    }
    Ok(SweepOutput { table, failed })
}

pub fn selftest() -> (Table, Vec<CheckOutcome>) {
    let checks = run_all();
    let mut table = Table::new(vec![
        "id",
        "check",
        "passed",
        "observed",
        "threshold",
        "detail",
    ]);
    for c in &checks {
        table.push(vec![
            u64::from(c.id).into(),
            c.name.into(),
            if c.passed { "true" } else { "false" }.into(),
            c.observed.into(),
            c.threshold.clone().into(),
            c.detail.clone().into(),
        ]);
    }
    (table, checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use deformq::Deformation;

    fn float(c: &Cell) -> f64 {
        match c {
            Cell::Float(v) => *v,
            other => panic!("not a float: {other:?}"),
        }
    }

    #[test]
    fn linspace_hits_both_ends() {
        let g = linspace(0.0, 0.2, 5, "count").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], 0.2);
        assert!(linspace(0.0, 1.0, 0, "count").is_err());
    }

    #[test]
    fn oscillator_both_methods_agree() {
        let cfg = RunConfig {
            deformation: Deformation::linear(0.1),
            ..RunConfig::default()
        };
        let t = spectrum(&cfg, 5, Method::Both).unwrap();
        assert_eq!(t.rows.len(), 6);
        for row in &t.rows {
            assert!(float(&row[3]) < 1e-8);
        }
    }

    #[test]
    fn closed_box_stops_at_pole() {
        let cfg = RunConfig {
            system: SystemSpec::QuantumBox { a: 1.0, m: 1.0 },
            deformation: Deformation::linear(0.01),
            ..RunConfig::default()
        };
        let t = spectrum(&cfg, 20, Method::Closed).unwrap();
        assert_eq!(t.rows.len(), 8);
        let cutoff = &t.footer[0].1;
        assert_eq!(cutoff["kind"], "divergence_detected");
    }

    #[test]
    fn power_law_has_no_deformed_closed_form() {
        let cfg = RunConfig {
            system: SystemSpec::PowerLaw {
                k: 1.0,
                nu: 4.0,
                m: 1.0,
            },
            deformation: Deformation::linear(0.1),
            ..RunConfig::default()
        };
        match spectrum(&cfg, 5, Method::Closed) {
            Err(e @ CliError::Usage { .. }) => {
                assert_eq!(e.exit_code(), 2);
                assert!(e.to_string().contains("no closed form"));
            }
            other => panic!("{other:?}"),
        }
        // both keeps the ODE column and leaves the closed one blank
        let t = spectrum(&cfg, 3, Method::Both).unwrap();
        assert!(t.rows.iter().all(|r| r[2] == Cell::Empty));
    }

    #[test]
    fn thermo_examples() {
        let mut cfg = RunConfig {
            deformation: Deformation::linear(0.1),
            ..RunConfig::default()
        };
        cfg.law.kind = LawKind::IdealGas;
        let t = thermo(&cfg, &[1.0], Route::FirstOrder).unwrap();
        assert!((float(&t.rows[0][2]) - 0.45).abs() < 1e-15);
        assert!((float(&t.rows[0][3]) - 0.4).abs() < 1e-15);

        let cfg = RunConfig::default();
        let t = thermo(&cfg, &[10.0], Route::Exact).unwrap();
        assert!((float(&t.rows[0][1]) - 10.0).abs() < 1e-9);
        assert!((float(&t.rows[0][2]) - 10.0).abs() < 1e-9);
        assert!((float(&t.rows[0][3]) - 1.0).abs() < 1e-7);
        assert_eq!(t.rows[0][4], Cell::Text("exact-quadrature".into()));
    }

    #[test]
    fn boltzmann_constant_scales_temperature_and_capacity() {
        let mut cfg = RunConfig::default();
        cfg.units.boltzmann = 2.0;
        let t = thermo(&cfg, &[5.0], Route::Exact).unwrap();
        // thermal energy 10 on the flat density of states
        assert!((float(&t.rows[0][2]) - 10.0).abs() < 1e-9);
        assert!((float(&t.rows[0][3]) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn exact_route_refuses_negative_s() {
        let cfg = RunConfig {
            deformation: Deformation::linear(-0.1),
            ..RunConfig::default()
        };
        let e = thermo(&cfg, &[1.0], Route::Both).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e
            .to_string()
            .contains("exact route undefined for s<0; use first-order"));
    }

    #[test]
    fn sweep_over_nu_gives_power_law_capacity() {
        let cfg = RunConfig {
            system: SystemSpec::PowerLaw {
                k: 1.0,
                nu: 2.0,
                m: 1.0,
            },
            ..RunConfig::default()
        };
        let args = SweepArgs {
            axis: Axis::Nu,
            start: 1.0,
            stop: 4.0,
            count: 7,
            observable: Observable::C,
            temperature: 1.0,
            route: Route::FirstOrder,
            level: None,
        };
        let out = sweep(&cfg, &args).unwrap();
        assert_eq!(out.failed, 0);
        for row in &out.table.rows {
            let nu = float(&row[0]);
            assert!((float(&row[1]) - (1.0 / nu + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_collects_row_errors() {
        let cfg = RunConfig {
            deformation: Deformation::linear(-0.1),
            ..RunConfig::default()
        };
        let args = SweepArgs {
            axis: Axis::T,
            start: 0.5,
            stop: 2.0,
            count: 4,
            observable: Observable::Z,
            temperature: 1.0,
            route: Route::Exact,
            level: None,
        };
        let out = sweep(&cfg, &args).unwrap();
        assert_eq!(out.failed, 4);
        assert!(out.table.rows.iter().all(|r| r[1] == Cell::Empty));
    }
}
