//! Energy levels from the deformed semiclassical rule dE/dn = ħ·f(E)·ω_cl(E),
//! with f(E) = 1+sE (linear family) or e^{sE} (exponential family).
//!
//! The ODE is integrated in the action-like variable w = E^λ, λ = 1 − κ, where
//! ω_cl ∝ E^κ. Then dw/dn = λħ·P·f(E) stays finite at E = 0, which lets the box
//! start from its zero ground level. Closed forms for the box and the
//! oscillator serve as oracles for the integrator.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::classical::frequency_law;
use crate::error::{config, domain, Error, Result};
use crate::model::{
    validate_system, Cutoff, Deformation, DeformationFamily, Level, SpectrumMethod, SpectrumResult,
    SystemSpec, UnitsConvention,
};
use crate::ode::{Advance, Dopri5, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps_per_level: usize,
    /// Energy above which the level sequence is declared divergent.
    pub divergence_threshold: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps_per_level: 10_000,
            divergence_threshold: 1e12,
        }
    }
}

impl OdeConfig {
    pub fn validate(&self) -> Result<Self> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(config(
                "rel_tol",
                format!("must lie in (0, 1), got {}", self.rel_tol),
            ));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(config(
                "abs_tol",
                format!("must lie in (0, 1), got {}", self.abs_tol),
            ));
        }
        if self.max_steps_per_level == 0 {
            return Err(config("max_steps_per_level", "must be positive"));
        }
        if !(self.divergence_threshold > 0.0 && self.divergence_threshold.is_finite()) {
            return Err(config(
                "divergence_threshold",
                "must be finite and positive",
            ));
        }
        Ok(*self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub exists: bool,
    /// −1/s when the fixed point exists.
    pub e_f: Option<f64>,
    pub stability: Stability,
}

/// The zero of 1+sE. Since ω_cl > 0 its stability is the sign of s alone.
pub fn fixed_point(d: &Deformation) -> Result<FixedPointInfo> {
    if d.family == DeformationFamily::Exponential {
        return Err(Error::UnsupportedDeformation("exponential"));
    }
    let d = d.validate()?;
    Ok(if d.s == 0.0 {
        FixedPointInfo {
            exists: false,
            e_f: None,
            stability: Stability::None,
        }
    } else {
        FixedPointInfo {
            exists: true,
            e_f: Some(-1.0 / d.s),
            stability: if d.s < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            },
        }
    })
}

/// Box: 0. Oscillator: its `ground_energy`, else ħω₀/2. Power law: the
/// undeformed level at n = ½, [½·λħα]^{1/λ} with λ = ½ + 1/ν.
pub fn default_ground_energy(spec: &SystemSpec, units: &UnitsConvention) -> Result<f64> {
    match validate_system(*spec)? {
        SystemSpec::QuantumBox { .. } => Ok(0.0),
        SystemSpec::Harmonic {
            omega0,
            ground_energy,
        } => Ok(ground_energy.unwrap_or(0.5 * units.hbar * omega0)),
        SystemSpec::PowerLaw { .. } => {
            let law = frequency_law(spec, units)?;
            let lambda = 1.0 - law.exponent;
            Ok((0.5 * lambda * units.hbar * law.prefactor).powf(1.0 / lambda))
        }
    }
}

/// Integrates the quantization rule from E(0) = `e0` up to n = `n_max`.
pub fn solve_spectrum_ode(
    spec: &SystemSpec,
    d: &Deformation,
    e0: f64,
    n_max: u64,
    cfg: &OdeConfig,
    units: &UnitsConvention,
) -> Result<SpectrumResult> {
    let cfg = cfg.validate()?;
    let units = units.validate()?;
    let d = d.validate()?;
    let law = frequency_law(spec, &units)?;
    if !(e0.is_finite() && e0 >= 0.0) {
        return Err(Error::Precondition(format!(
            "ground energy must be >= 0, got {e0}"
        )));
    }
    d.check_energy(e0)?;
    if law.exponent < 0.0 && e0 == 0.0 {
        return Err(Error::Precondition(
            "dE/dn is singular at E = 0 for nu < 2; start from E0 > 0".into(),
        ));
    }

    let lambda = 1.0 - law.exponent;
    let inv_lambda = 1.0 / lambda;
    let rate = lambda * units.hbar * law.prefactor;
    let rhs = move |w: f64| rate * d.factor(w.max(0.0).powf(inv_lambda));
    let to_energy = |w: f64| w.max(0.0).powf(inv_lambda);

    let ode = Dopri5::new(
        rhs,
        Tolerances {
            rel: cfg.rel_tol * lambda.min(1.0),
            abs: cfg.abs_tol,
            max_steps: cfg.max_steps_per_level,
            min_step: 1e-12,
        },
    );
    let ceiling = cfg.divergence_threshold.powf(lambda);
    let fixed = match (d.family, d.s < 0.0) {
        (DeformationFamily::Linear, true) => Some(-1.0 / d.s),
        _ => None,
    };

    let mut levels = vec![Level { n: 0, energy: e0 }];
    let saturated = |e: f64| fixed.is_some_and(|e_f| (e - e_f).abs() < cfg.abs_tol);
    if saturated(e0) {
        return Ok(SpectrumResult {
            levels,
            cutoff: Cutoff::FixedPointSaturated {
                e_f: fixed.unwrap(),
            },
            method: SpectrumMethod::OdeIntegration,
        });
    }

    let mut cur = ode.start(0.0, e0.powf(lambda));
    for n in 1..=n_max {
        match ode.advance_to(&mut cur, n as f64, ceiling) {
            Advance::Reached => {}
            Advance::Crossed { t } => {
                let n_star = t + divergence_tail(
                    &d,
                    law.prefactor,
                    law.exponent,
                    units.hbar,
                    cfg.divergence_threshold,
                );
                return Ok(diverged(levels, n_star));
            }
            Advance::StepCollapsed => return Ok(diverged(levels, cur.t)),
            Advance::StepLimit => {
                return Err(Error::Evaluation(format!(
                    "step budget of {} exhausted between n={} and n={n}",
                    cfg.max_steps_per_level,
                    n - 1
                )))
            }
        }
        let energy = to_energy(cur.y);
        levels.push(Level { n, energy });
        if saturated(energy) {
            return Ok(SpectrumResult {
                levels,
                cutoff: Cutoff::FixedPointSaturated {
                    e_f: fixed.unwrap(),
                },
                method: SpectrumMethod::OdeIntegration,
            });
        }
    }
    Ok(SpectrumResult {
        levels,
        cutoff: Cutoff::LevelCapReached,
        method: SpectrumMethod::OdeIntegration,
    })
}

fn diverged(levels: Vec<Level>, n_star: f64) -> SpectrumResult {
    SpectrumResult {
        levels,
        cutoff: Cutoff::DivergenceDetected { n_star },
        method: SpectrumMethod::OdeIntegration,
    }
}

/// Quantum-number distance from E_th to the pole, ∫_{E_th}^∞ dE/(ħ(1+sE)P E^κ)
/// ≈ E_th^{−κ}/(ħsPκ); only the linear family with κ > 0 has a finite pole
/// whose tail is worth adding.
fn divergence_tail(
    d: &Deformation,
    prefactor: f64,
    exponent: f64,
    hbar: f64,
    threshold: f64,
) -> f64 {
    if d.family == DeformationFamily::Linear && d.s > 0.0 && exponent > 0.0 {
        threshold.powf(-exponent) / (hbar * d.s * prefactor * exponent)
    } else {
        0.0
    }
}

/// γ = πħ/(√(2m)·a) for the box.
pub fn box_gamma(spec: &SystemSpec, units: &UnitsConvention) -> Result<f64> {
    match validate_system(*spec)? {
        SystemSpec::QuantumBox { a, m } => Ok(PI * units.hbar / ((2.0 * m).sqrt() * a)),
        other => Err(domain(
            "system",
            format!("expected a quantum box, got {}", other.name()),
        )),
    }
}

/// E_n = tan²(γn√s)/s for the deformed box, s > 0.
pub fn box_spectrum_closed(
    n: u64,
    s: f64,
    spec: &SystemSpec,
    units: &UnitsConvention,
) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(domain("s", format!("box closed form needs s > 0, got {s}")));
    }
    let gamma = box_gamma(spec, units)?;
    let root_s = s.sqrt();
    let angle = gamma * n as f64 * root_s;
    if angle >= FRAC_PI_2 {
        return Err(Error::OutOfDomain {
            n,
            n_star: FRAC_PI_2 / (gamma * root_s),
        });
    }
    let t = angle.tan();
    Ok(t * t / s)
}

/// E_n = (E₀ + 1/s)e^{sħω₀n} − 1/s, evaluated as E₀e^x + expm1(x)/s.
pub fn oscillator_spectrum_closed(
    n: u64,
    d: &Deformation,
    spec: &SystemSpec,
    units: &UnitsConvention,
) -> Result<f64> {
    if d.family != DeformationFamily::Linear {
        return Err(Error::UnsupportedDeformation("exponential"));
    }
    if !(d.s.is_finite() && d.s != 0.0) {
        return Err(domain("s", "oscillator closed form needs s != 0"));
    }
    let omega0 = match validate_system(*spec)? {
        SystemSpec::Harmonic { omega0, .. } => omega0,
        other => {
            return Err(domain(
                "system",
                format!("expected a harmonic oscillator, got {}", other.name()),
            ))
        }
    };
    let e0 = default_ground_energy(spec, units)?;
    d.check_energy(e0)?;
    let x = d.s * units.hbar * omega0 * n as f64;
    Ok(e0 * x.exp() + x.exp_m1() / d.s)
}

/// Undeformed (s = 0) levels of any supported system:
/// E_n^λ = E₀^λ + λħP·n with ω_cl = P·E^{1−λ}.
pub fn undeformed_spectrum_closed(
    n: u64,
    spec: &SystemSpec,
    e0: f64,
    units: &UnitsConvention,
) -> Result<f64> {
    let law = frequency_law(spec, units)?;
    if !(e0.is_finite() && e0 >= 0.0) {
        return Err(domain("E0", format!("must be >= 0, got {e0}")));
    }
    let lambda = 1.0 - law.exponent;
    Ok((e0.powf(lambda) + lambda * units.hbar * law.prefactor * n as f64).powf(1.0 / lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCapacity {
    /// Number of finite levels with n ≥ 1 below the tan² pole.
    pub count: u64,
    /// γ√s = π/m for an integer m.
    pub commensurate: bool,
}

/// count = ⌈π/(2γ√s)⌉ − 1 for the deformed box.
pub fn box_state_capacity(
    s: f64,
    spec: &SystemSpec,
    units: &UnitsConvention,
) -> Result<StateCapacity> {
    if !(s.is_finite() && s > 0.0) {
        return Err(domain(
            "s",
            format!("state capacity is defined for s > 0, got {s}"),
        ));
    }
    let gamma = box_gamma(spec, units)?;
    capacity_from_angle(gamma * s.sqrt())
}

pub(crate) fn capacity_from_angle(angle_step: f64) -> Result<StateCapacity> {
    let pole = FRAC_PI_2 / angle_step;
    if !pole.is_finite() || pole > 1e15 {
        return Err(domain("s", "pole position too large to count levels"));
    }
    let near_int = |x: f64| (x - x.round()).abs() <= 1e-12 * x.max(1.0);
    let ceil = if near_int(pole) {
        pole.round()
    } else {
        pole.ceil()
    };
    Ok(StateCapacity {
        count: ceil as u64 - 1,
        commensurate: near_int(2.0 * pole),
    })
}
