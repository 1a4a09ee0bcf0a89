//! Deformed density of states, Boltzmann partition function and the internal
//! energy and heat capacity that follow from it.
//!
//! Rescaling the phase-space cell by f(E) turns the usual density of states
//! ρ⁰ into ρ = ρ⁰/f(E), with f = 1+sE or e^{sE}. All densities handled here are
//! power laws ρ⁰ = P·E^p, so Z⁰ = P·T^{p+1}·Γ(p+1) is known in closed form and
//! U⁰ = (p+1)T per particle.
//!
//! Temperatures are thermal energies (k_B = 1). Callers working with another
//! Boltzmann constant pass k_B·T and scale heat capacities by k_B.
//! Partition functions are per particle; named energy laws carry N.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classical::frequency_law;
use crate::error::{domain, Error, Result};
use crate::model::{
    positive, Cutoff, Deformation, DeformationFamily, SpectrumResult, SystemSpec, ThermoPoint,
    ThermoRoute, UnitsConvention,
};
use crate::quadrature::{
    derivative, integrate_semi_infinite, DerivativeOrder, IntegralResult, QuadratureConfig, Upper,
};
use crate::special::gamma_value;

/// Below this value of |s|·U⁰ the exact energy (Z⁰/Z − 1)/s loses too many
/// digits to cancellation and the first-order formula is used instead.
pub const SMALL_S_CROSSOVER: f64 = 1e-6;

/// Relative tail size above which a discrete level sum is reported as truncated.
pub const LEVEL_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DosOrigin {
    /// ρ⁰ = 1/(ħ·ω_cl(E)), the reciprocal of the undeformed quantization rule.
    FromSystem {
        spec: SystemSpec,
    },
    PowerLawExponent {
        prefactor: f64,
        exponent: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosSpec {
    pub origin: DosOrigin,
    #[serde(default)]
    pub units: UnitsConvention,
}

impl DosSpec {
    pub fn from_system(spec: SystemSpec, units: UnitsConvention) -> Self {
        Self {
            origin: DosOrigin::FromSystem { spec },
            units,
        }
    }

    pub fn power_law(prefactor: f64, exponent: f64) -> Self {
        Self {
            origin: DosOrigin::PowerLawExponent {
                prefactor,
                exponent,
            },
            units: UnitsConvention::default(),
        }
    }

    /// (prefactor, exponent) of ρ⁰ = prefactor·E^exponent.
    pub fn law(&self) -> Result<(f64, f64)> {
        let (prefactor, exponent) = match self.origin {
            DosOrigin::FromSystem { spec } => {
                let units = self.units.validate()?;
                let freq = frequency_law(&spec, &units)?;
                (1.0 / (units.hbar * freq.prefactor), -freq.exponent)
            }
            DosOrigin::PowerLawExponent {
                prefactor,
                exponent,
            } => {
                positive("prefactor", prefactor)?;
                if !exponent.is_finite() {
                    return Err(domain("exponent", "must be finite"));
                }
                (prefactor, exponent)
            }
        };
        if exponent <= -1.0 {
            return Err(Error::SingularityTooStrong(exponent));
        }
        Ok((prefactor, exponent))
    }

    pub fn rho0(&self, energy: f64) -> Result<f64> {
        let (prefactor, exponent) = self.law()?;
        positive("E", energy)?;
        Ok(prefactor * energy.powf(exponent))
    }

    /// Z⁰(T) = P·T^{p+1}·Γ(p+1).
    pub fn undeformed_partition(&self, t: f64) -> Result<f64> {
        let (prefactor, exponent) = self.law()?;
        positive("T", t)?;
        Ok(prefactor * t.powf(exponent + 1.0) * gamma_value(exponent + 1.0)?)
    }

    /// U⁰(T) = (p+1)·T per particle.
    pub fn undeformed_energy(&self, t: f64) -> Result<f64> {
        let (_, exponent) = self.law()?;
        positive("T", t)?;
        Ok((exponent + 1.0) * t)
    }

    /// The named energy law equivalent to this density of states for one
    /// particle: p = −½ is the free gas, otherwise a power-law gas with
    /// 1/ν = p + ½.
    pub fn energy_law(&self) -> Result<EnergyLaw> {
        let (_, exponent) = self.law()?;
        Ok(if exponent == -0.5 {
            EnergyLaw::IdealGas { n: 1 }
        } else if exponent > -0.5 {
            EnergyLaw::PowerLawGas {
                n: 1,
                nu: 1.0 / (exponent + 0.5),
            }
        } else {
            let coef = exponent + 1.0;
            EnergyLaw::Tabulated(Arc::new(move |t| coef * t))
        })
    }
}

/// Unperturbed internal energy U⁰(T) of an N-particle system.
#[derive(Clone)]
pub enum EnergyLaw {
    /// U⁰ = ½NT
    IdealGas {
        n: u64,
    },
    /// U⁰ = (1/ν + ½)NT, N particles in k|x|^ν
    PowerLawGas {
        n: u64,
        nu: f64,
    },
    /// U⁰ = AT⁴, low-temperature phonon gas
    Phonon {
        a: f64,
    },
    Tabulated(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for EnergyLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyLaw::IdealGas { n } => write!(f, "IdealGas {{ n: {n} }}"),
            EnergyLaw::PowerLawGas { n, nu } => write!(f, "PowerLawGas {{ n: {n}, nu: {nu} }}"),
            EnergyLaw::Phonon { a } => write!(f, "Phonon {{ a: {a} }}"),
            EnergyLaw::Tabulated(_) => f.write_str("Tabulated(..)"),
        }
    }
}

impl EnergyLaw {
    fn check(&self) -> Result<()> {
        match *self {
            EnergyLaw::IdealGas { n } | EnergyLaw::PowerLawGas { n, .. } if n == 0 => {
                Err(domain("N", "particle number must be positive"))
            }
            EnergyLaw::PowerLawGas { nu, .. } => positive("nu", nu).map(|_| ()),
            EnergyLaw::Phonon { a } => positive("A", a).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// (1/ν + ½)N for the linear-in-T laws.
    fn linear_coefficient(&self) -> Option<f64> {
        match *self {
            EnergyLaw::IdealGas { n } => Some(0.5 * n as f64),
            EnergyLaw::PowerLawGas { n, nu } => Some((1.0 / nu + 0.5) * n as f64),
            _ => None,
        }
    }

    pub fn unperturbed(&self, t: f64) -> Result<f64> {
        self.check()?;
        positive("T", t)?;
        match self {
            EnergyLaw::Phonon { a } => Ok(a * t.powi(4)),
            EnergyLaw::Tabulated(u0) => finite_eval(u0(t), t),
            _ => Ok(self.linear_coefficient().unwrap() * t),
        }
    }

    fn unperturbed_slope(&self, t: f64) -> Result<f64> {
        match self {
            EnergyLaw::Phonon { a } => Ok(4.0 * a * t.powi(3)),
            EnergyLaw::Tabulated(u0) => {
                derivative(|x| finite_eval(u0(x), x), t, DerivativeOrder::First)
            }
            _ => Ok(self.linear_coefficient().unwrap()),
        }
    }
}

fn finite_eval(v: f64, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("U0({t}) is not finite")))
    }
}

fn check_energy_point(d: &Deformation, energy: f64) -> Result<()> {
    positive("E", energy)?;
    if d.family == DeformationFamily::Linear && d.factor(energy) <= 0.0 {
        return Err(Error::Precondition(format!(
            "1 + s·E = {} must be > 0 (s = {}, E = {energy})",
            d.factor(energy),
            d.s
        )));
    }
    Ok(())
}

/// ρ(E) = ρ⁰(E)/f(E).
pub fn deformed_dos(dos: &DosSpec, d: &Deformation, energy: f64) -> Result<f64> {
    check_energy_point(d, energy)?;
    Ok(dos.rho0(energy)? / d.factor(energy))
}

/// Number of states in [E, E + dE] for the rescaled cell h·f(E).
pub fn microstate_count(dos: &DosSpec, d: &Deformation, energy: f64, de: f64) -> Result<f64> {
    positive("dE", de)?;
    Ok(deformed_dos(dos, d, energy)? * de)
}

/// Z(T) = ∫₀^∞ e^{−E/T} ρ⁰(E)/f(E) dE by quadrature.
pub fn partition_function(
    dos: &DosSpec,
    d: &Deformation,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    positive("T", t)?;
    let d = d.validate()?;
    let (prefactor, exponent) = dos.law()?;
    let scale = match d.family {
        DeformationFamily::Linear if d.s < 0.0 => {
            return Err(Error::UnsupportedDomain(format!(
                "exact partition function undefined for s<0 (1/(1+sE) is not integrable at E = {})",
                -1.0 / d.s
            )))
        }
        DeformationFamily::Linear => t,
        DeformationFamily::Exponential => effective_temperature(t, d.s)?,
    };
    let cfg = QuadratureConfig {
        endpoint_singularity_exponent: Some(cfg.endpoint_singularity_exponent.unwrap_or(exponent)),
        ..*cfg
    };
    // E = scale·u keeps the Boltzmann factor at unit width
    let integrand = |u: f64| {
        let e = scale * u;
        let boltzmann = match d.family {
            DeformationFamily::Linear => (-e / t).exp() / (1.0 + d.s * e),
            DeformationFamily::Exponential => (-e / t - d.s * e).exp(),
        };
        boltzmann * prefactor * e.powf(exponent)
    };
    let r =
        integrate_semi_infinite(integrand, 0.0, Upper::Infinite, &cfg).map_err(|e| match e {
            Error::ToleranceNotMet { best } => Error::ToleranceNotMet {
                best: scaled(best, scale),
            },
            other => other,
        })?;
    Ok(scaled(r, scale))
}

fn scaled(r: IntegralResult, scale: f64) -> IntegralResult {
    IntegralResult {
        value: r.value * scale,
        est_abs_error: r.est_abs_error * scale,
        subdivisions_used: r.subdivisions_used,
    }
}

fn linear_nonnegative(d: &Deformation) -> Result<Deformation> {
    let d = d.validate()?;
    if d.family != DeformationFamily::Linear {
        return Err(Error::UnsupportedDeformation("exponential"));
    }
    if d.s < 0.0 {
        return Err(Error::UnsupportedDomain(
            "exact route undefined for s<0; use first-order".into(),
        ));
    }
    Ok(d)
}

/// U = (Z⁰/Z − 1)/s, falling back to U⁰ − sT²∂U⁰/∂T when |s|·U⁰ is below
/// [`SMALL_S_CROSSOVER`].
pub fn internal_energy_exact(
    dos: &DosSpec,
    d: &Deformation,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let d = linear_nonnegative(d)?;
    let u0 = dos.undeformed_energy(t)?;
    if d.s.abs() * u0 <= SMALL_S_CROSSOVER {
        return internal_energy_first_order(&dos.energy_law()?, d.s, t);
    }
    let z0 = partition_function(dos, &Deformation::none(), t, cfg)?.value;
    let z = partition_function(dos, &d, t, cfg)?.value;
    Ok((z0 / z - 1.0) / d.s)
}

/// U = U⁰ − s·T²·∂U⁰/∂T.
pub fn internal_energy_first_order(law: &EnergyLaw, s: f64, t: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(domain("s", "must be finite"));
    }
    let u0 = law.unperturbed(t)?;
    Ok(u0 - s * t * t * law.unperturbed_slope(t)?)
}

/// First-order partition function Z⁰(1 − s·U⁰), from ⟨1/(1+sE)⟩ ≈ 1 − s⟨E⟩.
pub fn partition_first_order(dos: &DosSpec, s: f64, t: f64) -> Result<f64> {
    Ok(dos.undeformed_partition(t)? * (1.0 - s * dos.undeformed_energy(t)?))
}

#[derive(Debug, Clone)]
pub enum EnergyRoute<'a> {
    Exact {
        dos: &'a DosSpec,
        d: Deformation,
        cfg: QuadratureConfig,
    },
    FirstOrder {
        law: &'a EnergyLaw,
        s: f64,
    },
}

impl EnergyRoute<'_> {
    pub fn internal_energy(&self, t: f64) -> Result<f64> {
        match self {
            EnergyRoute::Exact { dos, d, cfg } => internal_energy_exact(dos, d, t, cfg),
            EnergyRoute::FirstOrder { law, s } => internal_energy_first_order(law, *s, t),
        }
    }
}

/// C = ∂U/∂T: closed form for the named first-order laws, numerical
/// differentiation otherwise.
pub fn heat_capacity(route: &EnergyRoute<'_>, t: f64) -> Result<f64> {
    positive("T", t)?;
    if let EnergyRoute::FirstOrder { law, s } = route {
        law.check()?;
        if let Some(coef) = law.linear_coefficient() {
            return Ok(coef * (1.0 - 2.0 * s * t));
        }
        if let EnergyLaw::Phonon { a } = law {
            return Ok(4.0 * a * t.powi(3) - 20.0 * a * s * t.powi(4));
        }
    }
    derivative(|x| route.internal_energy(x), t, DerivativeOrder::First)
}

/// T* with 1/T* = 1/T + s.
pub fn effective_temperature(t: f64, s: f64) -> Result<f64> {
    positive("T", t)?;
    let inv = 1.0 / t + s;
    if !(inv > 0.0 && inv.is_finite()) {
        return Err(domain("s", format!("1/T + s = {inv} must be > 0")));
    }
    Ok(1.0 / inv)
}

/// Z = ∫ e^{−E/T − sE} ρ⁰ dE by direct quadrature, verified against Z⁰(T*).
pub fn partition_exponential(
    dos: &DosSpec,
    s: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let t_star = effective_temperature(t, s)?;
    let direct = partition_function(dos, &Deformation::exponential(s), t, cfg)?;
    let mapped = dos.undeformed_partition(t_star)?;
    let tol = (100.0 * cfg.rel_tol).max(1e-8);
    if ((direct.value - mapped) / mapped).abs() > tol {
        return Err(Error::CrossCheck {
            what: "exponential partition function vs Z0(T*)",
            a: direct.value,
            b: mapped,
        });
    }
    Ok(direct)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSum {
    pub value: f64,
    /// Bound on the neglected Σ_{n > n_last} e^{−E_n/T}.
    pub tail_bound: f64,
}

/// Σ_n e^{−E_n/T} over a computed spectrum.
///
/// A diverged spectrum has no further finite levels. A capped one is bounded
/// by continuing the last spacing geometrically, which is valid while spacings
/// do not shrink; a shrinking or saturated spectrum has infinitely many
/// levels below its accumulation point and an unbounded tail.
pub fn partition_from_levels(levels: &SpectrumResult, t: f64) -> Result<LevelSum> {
    positive("T", t)?;
    let energies = levels.energies();
    let Some(&last) = energies.last() else {
        return Err(Error::Precondition("empty spectrum".into()));
    };
    let value: f64 = energies.iter().map(|e| (-e / t).exp()).sum();
    let tail_bound = match levels.cutoff {
        Cutoff::DivergenceDetected { .. } => 0.0,
        Cutoff::FixedPointSaturated { .. } => f64::INFINITY,
        Cutoff::LevelCapReached => {
            let k = energies.len();
            let gap = if k >= 2 { last - energies[k - 2] } else { 0.0 };
            let shrinking = k >= 3 && gap < energies[k - 2] - energies[k - 3];
            if gap <= 0.0 || shrinking {
                f64::INFINITY
            } else {
                let ratio = (-gap / t).exp();
                (-last / t).exp() * ratio / (1.0 - ratio)
            }
        }
    };
    if tail_bound > LEVEL_SUM_TOLERANCE * value {
        return Err(Error::Truncation {
            partial: value,
            tail_bound,
        });
    }
    Ok(LevelSum { value, tail_bound })
}

/// (Z, U, C) from quadrature of the deformed density of states.
pub fn exact_point(
    dos: &DosSpec,
    d: &Deformation,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<ThermoPoint> {
    let d = linear_nonnegative(d)?;
    let z = partition_function(dos, &d, t, cfg)?.value;
    let u = internal_energy_exact(dos, &d, t, cfg)?;
    let c = heat_capacity(&EnergyRoute::Exact { dos, d, cfg: *cfg }, t)?;
    Ok(ThermoPoint {
        t,
        z: Some(z),
        u,
        c,
        route: ThermoRoute::ExactQuadrature,
    })
}

/// (Z, U, C) for the exponential deformation: Z(T) = Z⁰(T*) gives
/// U(T) = U⁰(T*) and C(T) = C⁰(T*)·(T*/T)². Z is the cross-checked quadrature.
pub fn exponential_point(
    dos: &DosSpec,
    s: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<ThermoPoint> {
    let z = partition_exponential(dos, s, t, cfg)?.value;
    let t_star = effective_temperature(t, s)?;
    let (_, exponent) = dos.law()?;
    let ratio = t_star / t;
    Ok(ThermoPoint {
        t,
        z: Some(z),
        u: dos.undeformed_energy(t_star)?,
        c: (exponent + 1.0) * ratio * ratio,
        route: ThermoRoute::ClosedForm,
    })
}

/// (U, C) from the first-order correction; `z` is attached as given.
pub fn first_order_point(law: &EnergyLaw, s: f64, t: f64, z: Option<f64>) -> Result<ThermoPoint> {
    let u = internal_energy_first_order(law, s, t)?;
    let c = heat_capacity(&EnergyRoute::FirstOrder { law, s }, t)?;
    Ok(ThermoPoint {
        t,
        z,
        u,
        c,
        route: ThermoRoute::FirstOrder,
    })
}
