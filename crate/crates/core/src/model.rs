//! Shared domain types: unit convention, physical systems, deformations and
//! the result records produced by the spectrum and thermodynamics engines.
//!
//! Everything here is plain data. Energies, temperatures and the deformation
//! parameter `s` (inverse energy) are expressed in one consistent set of units;
//! ħ and k_B are carried in [`UnitsConvention`] and default to 1.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsConvention {
    pub hbar: f64,
    pub boltzmann: f64,
}

impl Default for UnitsConvention {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            boltzmann: 1.0,
        }
    }
}

impl UnitsConvention {
    pub fn validate(&self) -> Result<Self> {
        positive("hbar", self.hbar)?;
        positive("boltzmann", self.boltzmann)?;
        Ok(*self)
    }
}

/// One-dimensional system whose classical frequency and density of states
/// drive the quantization and the thermodynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Infinite square well of width `a` holding a particle of mass `m`.
    QuantumBox { a: f64, m: f64 },
    /// Harmonic oscillator with angular frequency `omega0`. The ground level
    /// defaults to ħω₀/2 when not given.
    Harmonic {
        omega0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ground_energy: Option<f64>,
    },
    /// Potential U(x) = k|x|^ν for a particle of mass `m`.
    PowerLaw { k: f64, nu: f64, m: f64 },
}

impl SystemSpec {
    pub fn harmonic(omega0: f64) -> Self {
        SystemSpec::Harmonic {
            omega0,
            ground_energy: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::QuantumBox { .. } => "box",
            SystemSpec::Harmonic { .. } => "harmonic",
            SystemSpec::PowerLaw { .. } => "powerlaw",
        }
    }
}

/// Checks every positivity invariant of `spec` and hands it back unchanged.
pub fn validate_system(spec: SystemSpec) -> Result<SystemSpec> {
    match spec {
        SystemSpec::QuantumBox { a, m } => {
            positive("a", a)?;
            positive("m", m)?;
        }
        SystemSpec::Harmonic {
            omega0,
            ground_energy,
        } => {
            positive("omega0", omega0)?;
            if let Some(e0) = ground_energy {
                if !(e0.is_finite() && e0 >= 0.0) {
                    return Err(domain("ground_energy", format!("must be >= 0, got {e0}")));
                }
            }
        }
        SystemSpec::PowerLaw { k, nu, m } => {
            positive("k", k)?;
            positive("nu", nu)?;
            positive("m", m)?;
        }
    }
    Ok(spec)
}

pub(crate) fn positive(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(domain(field, format!("must be finite and > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeformationFamily {
    /// ħ → ħ(1+sE)
    #[default]
    Linear,
    /// ħ → ħe^{sE}
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deformation {
    #[serde(default)]
    pub family: DeformationFamily,
    pub s: f64,
}

impl Default for Deformation {
    fn default() -> Self {
        Self::none()
    }
}

impl Deformation {
    pub fn linear(s: f64) -> Self {
        Self {
            family: DeformationFamily::Linear,
            s,
        }
    }

    pub fn exponential(s: f64) -> Self {
        Self {
            family: DeformationFamily::Exponential,
            s,
        }
    }

    pub fn none() -> Self {
        Self::linear(0.0)
    }

    /// Energy-dependent scale of ħ: (1+sE) or e^{sE}.
    pub fn factor(&self, energy: f64) -> f64 {
        match self.family {
            DeformationFamily::Linear => 1.0 + self.s * energy,
            DeformationFamily::Exponential => (self.s * energy).exp(),
        }
    }

    /// Rejects energies with (1+sE) < 0 under the linear family.
    pub fn check_energy(&self, energy: f64) -> Result<()> {
        if self.family == DeformationFamily::Linear && self.factor(energy) < 0.0 {
            return Err(crate::Error::Precondition(format!(
                "1 + s·E = {} < 0 at E = {energy}, s = {}",
                self.factor(energy),
                self.s
            )));
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<Self> {
        if !self.s.is_finite() {
            return Err(domain("s", "must be finite"));
        }
        Ok(*self)
    }
}

/// Why the level sequence stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    LevelCapReached,
    /// E(n) blew up; `n_star` is the fractional quantum number of the pole.
    DivergenceDetected {
        n_star: f64,
    },
    /// Levels came within tolerance of the stable fixed point E_f = −1/s.
    FixedPointSaturated {
        e_f: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    ClosedForm,
    OdeIntegration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: u64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub levels: Vec<Level>,
    pub cutoff: Cutoff,
    pub method: SpectrumMethod,
}

impl SpectrumResult {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermoRoute {
    ExactQuadrature,
    FirstOrder,
    ClosedForm,
}

/// One thermodynamic state point. `z` is absent for energy laws that carry
/// no density of states (the phonon gas).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub t: f64,
    pub z: Option<f64>,
    pub u: f64,
    pub c: f64,
    pub route: ThermoRoute,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn validate_accepts_positive_power_law() {
        let spec = SystemSpec::PowerLaw {
            k: 1.0,
            nu: 2.0,
            m: 1.0,
        };
        assert_eq!(validate_system(spec).unwrap(), spec);
    }

    #[test]
    fn validate_names_violated_field() {
        let nu_zero = SystemSpec::PowerLaw {
            k: 1.0,
            nu: 0.0,
            m: 1.0,
        };
        assert!(matches!(
            validate_system(nu_zero),
            Err(Error::Domain { field: "nu", .. })
        ));
        let neg_width = SystemSpec::QuantumBox { a: -1.0, m: 1.0 };
        assert!(matches!(
            validate_system(neg_width),
            Err(Error::Domain { field: "a", .. })
        ));
        let nan_mass = SystemSpec::QuantumBox {
            a: 1.0,
            m: f64::NAN,
        };
        assert!(matches!(
            validate_system(nan_mass),
            Err(Error::Domain { field: "m", .. })
        ));
        let neg_ground = SystemSpec::Harmonic {
            omega0: 1.0,
            ground_energy: Some(-0.1),
        };
        assert!(matches!(
            validate_system(neg_ground),
            Err(Error::Domain {
                field: "ground_energy",
                ..
            })
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let specs = [
            SystemSpec::QuantumBox { a: 2.0, m: 0.5 },
            SystemSpec::harmonic(3.0),
            SystemSpec::PowerLaw {
                k: 0.3,
                nu: 7.5,
                m: 2.0,
            },
        ];
        for spec in specs {
            let once = validate_system(spec).unwrap();
            assert_eq!(validate_system(once).unwrap(), once);
        }
    }

    #[test]
    fn units_must_be_positive() {
        assert!(UnitsConvention::default().validate().is_ok());
        let bad = UnitsConvention {
            hbar: 0.0,
            boltzmann: 1.0,
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::Domain { field: "hbar", .. })
        ));
    }

    #[test]
    fn linear_family_rejects_negative_factor() {
        let d = Deformation::linear(-0.5);
        assert!(d.check_energy(1.0).is_ok());
        assert!(d.check_energy(2.0).is_ok());
        assert!(d.check_energy(2.5).is_err());
        // the exponential factor never changes sign
        assert!(Deformation::exponential(-0.5).check_energy(1e3).is_ok());
    }

    #[test]
    fn system_spec_json_shape() {
        let spec: SystemSpec =
            serde_json::from_str(r#"{"kind":"power_law","k":1.0,"nu":3.0,"m":1.0}"#).unwrap();
        assert_eq!(
            spec,
            SystemSpec::PowerLaw {
                k: 1.0,
                nu: 3.0,
                m: 1.0
            }
        );
        let bad = serde_json::from_str::<SystemSpec>(r#"{"kind":"quantum_box","a":1,"m":1,"q":2}"#);
        assert!(bad.is_err());
    }
}
