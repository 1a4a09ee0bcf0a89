//! Classical oscillation frequency ω_cl(E) of the bounded orbits.
//!
//! Every supported system has a pure power law ω_cl(E) = prefactor·E^exponent:
//! the box has exponent ½, the oscillator 0 and U = k|x|^ν has ½ − 1/ν with
//! prefactor α(k,ν).

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::{positive, validate_system, SystemSpec, UnitsConvention};
use crate::quadrature::{integrate_semi_infinite, QuadratureConfig, Upper};
use crate::special::gamma_value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

impl FrequencyLaw {
    pub fn eval(&self, energy: f64) -> Result<f64> {
        eval_frequency(*self, energy)
    }
}

/// α(k,ν) = √(2π)·ν·k^{1/ν}·Γ(½+1/ν) / (2√m·Γ(1/ν)).
///
/// Evaluated with νΓ(1/ν) = Γ(1+1/ν) so that large ν stays inside the Gamma
/// domain. `units` is accepted for signature symmetry; α carries no ħ.
pub fn alpha_coefficient(k: f64, nu: f64, m: f64, _units: &UnitsConvention) -> Result<f64> {
    positive("k", k)?;
    positive("nu", nu)?;
    positive("m", m)?;
    let inv_nu = 1.0 / nu;
    let ratio = gamma_value(0.5 + inv_nu)? / gamma_value(1.0 + inv_nu)?;
    Ok((2.0 * PI).sqrt() * k.powf(inv_nu) * ratio / (2.0 * m.sqrt()))
}

pub fn frequency_law(spec: &SystemSpec, units: &UnitsConvention) -> Result<FrequencyLaw> {
    match validate_system(*spec)? {
        SystemSpec::QuantumBox { a, m } => Ok(FrequencyLaw {
            prefactor: PI / a * (2.0 / m).sqrt(),
            exponent: 0.5,
        }),
        SystemSpec::Harmonic { omega0, .. } => Ok(FrequencyLaw {
            prefactor: omega0,
            exponent: 0.0,
        }),
        SystemSpec::PowerLaw { k, nu, m } => Ok(FrequencyLaw {
            prefactor: alpha_coefficient(k, nu, m, units)?,
            exponent: 0.5 - 1.0 / nu,
        }),
    }
}

/// prefactor·E^exponent, with 0⁰ = 1. E = 0 is refused for negative exponents.
pub fn eval_frequency(law: FrequencyLaw, energy: f64) -> Result<f64> {
    if energy.is_nan() || energy < 0.0 {
        return Err(domain("E", format!("energy must be >= 0, got {energy}")));
    }
    if energy == 0.0 {
        return if law.exponent > 0.0 {
            Ok(0.0)
        } else if law.exponent == 0.0 {
            Ok(law.prefactor)
        } else {
            Err(domain(
                "E",
                "classical frequency diverges at E = 0 for a negative exponent",
            ))
        };
    }
    Ok(law.prefactor * energy.powf(law.exponent))
}

/// Classical period of U = k|x|^ν at energy E, from the turning-point integral
/// T = 4∫₀^{x_t} dx / √(2(E − k x^ν)/m).
///
/// Independent of [`alpha_coefficient`]; used to cross-check it.
pub fn classical_period(k: f64, nu: f64, m: f64, energy: f64) -> Result<f64> {
    positive("k", k)?;
    positive("nu", nu)?;
    positive("m", m)?;
    positive("E", energy)?;
    let x_turn = (energy / k).powf(1.0 / nu);
    // x = x_t cos φ removes the inverse-square-root singularity at the turning
    // point; 1 − cos^ν φ is formed with expm1/ln_1p to avoid cancellation.
    let integrand = |phi: f64| {
        let half = (0.5 * phi).sin();
        let ln_cos = (-2.0 * half * half).ln_1p();
        let gap = -(nu * ln_cos).exp_m1();
        phi.sin() / gap.sqrt()
    };
    let cfg = QuadratureConfig {
        rel_tol: 1e-12,
        max_subdivisions: 400,
        endpoint_singularity_exponent: None,
    };
    let integral = integrate_semi_infinite(integrand, 0.0, Upper::Finite(0.5 * PI), &cfg)?;
    Ok(4.0 * x_turn * (m / (2.0 * energy)).sqrt() * integral.value)
}
