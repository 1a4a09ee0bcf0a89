use std::path::{Path, PathBuf};

use clap::ValueEnum;
use deformq::{
    Deformation, DeformationFamily, OdeConfig, QuadratureConfig, SystemSpec, UnitsConvention,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// Which first-order energy law `thermo` and `sweep` use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// Derived from the system's density of states.
    #[default]
    System,
    IdealGas,
    Phonon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    #[serde(default)]
    pub kind: LawKind,
    #[serde(default = "one")]
    pub particles: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phonon_a: Option<f64>,
}

fn one() -> u64 {
    1
}

impl Default for LawSpec {
    fn default() -> Self {
        Self {
            kind: LawKind::System,
            particles: 1,
            phonon_a: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub deformation: Deformation,
    #[serde(default)]
    pub units: UnitsConvention,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default)]
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub law: LawSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSpec::harmonic(1.0),
            deformation: Deformation::none(),
            units: UnitsConvention::default(),
            ode: OdeConfig::default(),
            quad: QuadratureConfig::default(),
            output: OutputSpec::default(),
            law: LawSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section against its engine's contract.
    pub fn validate(&self) -> Result<(), CliError> {
        deformq::validate_system(self.system)?;
        self.units.validate()?;
        self.ode.validate()?;
        self.quad.validate()?;
        if !self.deformation.s.is_finite() {
            return Err(CliError::Usage {
                field: "s",
                reason: "must be finite".into(),
            });
        }
        if self.law.particles == 0 {
            return Err(CliError::Usage {
                field: "particles",
                reason: "must be >= 1".into(),
            });
        }
        match (self.law.kind, self.law.phonon_a) {
            (LawKind::Phonon, None) => Err(CliError::Usage {
                field: "phonon-a",
                reason: "the phonon law needs its coefficient A".into(),
            }),
            (LawKind::Phonon, Some(a)) if !(a > 0.0 && a.is_finite()) => Err(CliError::Usage {
                field: "phonon-a",
                reason: format!("must be > 0, got {a}"),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    Box,
    Harmonic,
    Powerlaw,
}

impl SystemKind {
    fn of(spec: &SystemSpec) -> Self {
        match spec {
            SystemSpec::QuantumBox { .. } => Self::Box,
            SystemSpec::Harmonic { .. } => Self::Harmonic,
            SystemSpec::PowerLaw { .. } => Self::Powerlaw,
        }
    }

    fn default_spec(self) -> SystemSpec {
        match self {
            Self::Box => SystemSpec::QuantumBox { a: 1.0, m: 1.0 },
            Self::Harmonic => SystemSpec::harmonic(1.0),
            Self::Powerlaw => SystemSpec::PowerLaw {
                k: 1.0,
                nu: 2.0,
                m: 1.0,
            },
        }
    }
}

/// Flags shared by every physics subcommand. Each one, when given, overrides
/// the config file, which overrides the defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    /// Box width
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Particle mass (box and power law)
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<f64>,
    /// Oscillator ground energy (default ħω₀/2)
    #[arg(long, allow_hyphen_values = true)]
    pub ground_energy: Option<f64>,
    /// Power-law coupling in U = k|x|^ν
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Deformation parameter
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<DeformationFamilyArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub hbar: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub boltzmann: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeformationFamilyArg {
    Linear,
    Exponential,
}

impl From<DeformationFamilyArg> for DeformationFamily {
    fn from(f: DeformationFamilyArg) -> Self {
        match f {
            DeformationFamilyArg::Linear => DeformationFamily::Linear,
            DeformationFamilyArg::Exponential => DeformationFamily::Exponential,
        }
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(kind) = self.system {
            if kind != SystemKind::of(&cfg.system) {
                cfg.system = kind.default_spec();
            }
        }
        self.apply_system(&mut cfg.system)?;
        if let Some(s) = self.s {
            cfg.deformation.s = s;
        }
        if let Some(f) = self.family {
            cfg.deformation.family = f.into();
        }
        if let Some(h) = self.hbar {
            cfg.units.hbar = h;
        }
        if let Some(k) = self.boltzmann {
            cfg.units.boltzmann = k;
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.clone());
        }
        Ok(cfg)
    }

    fn apply_system(&self, spec: &mut SystemSpec) -> Result<(), CliError> {
        let name = spec.name();
        let stray = |field: &'static str| CliError::Usage {
            field,
            reason: format!("does not apply to the {name} system"),
        };
        match spec {
            SystemSpec::QuantumBox { a, m } => {
                set(a, self.a);
                set(m, self.m);
                for (field, given) in [
                    ("omega0", self.omega0),
                    ("ground-energy", self.ground_energy),
                    ("k", self.k),
                    ("nu", self.nu),
                ] {
                    if given.is_some() {
                        return Err(stray(field));
                    }
                }
            }
            SystemSpec::Harmonic {
                omega0,
                ground_energy,
            } => {
                set(omega0, self.omega0);
                if self.ground_energy.is_some() {
                    *ground_energy = self.ground_energy;
                }
                for (field, given) in [("a", self.a), ("m", self.m), ("k", self.k), ("nu", self.nu)]
                {
                    if given.is_some() {
                        return Err(stray(field));
                    }
                }
            }
            SystemSpec::PowerLaw { k, nu, m } => {
                set(k, self.k);
                set(nu, self.nu);
                set(m, self.m);
                for (field, given) in [
                    ("a", self.a),
                    ("omega0", self.omega0),
                    ("ground-energy", self.ground_energy),
                ] {
                    if given.is_some() {
                        return Err(stray(field));
                    }
                }
            }
        }
        Ok(())
    }
}

fn set(slot: &mut f64, v: Option<f64>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Flags selecting the first-order energy law.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct LawArgs {
    #[arg(long, value_enum)]
    pub law: Option<LawKind>,
    #[arg(long)]
    pub particles: Option<u64>,
    /// Phonon coefficient A in U⁰ = A·T⁴
    #[arg(long, allow_hyphen_values = true)]
    pub phonon_a: Option<f64>,
}

impl LawArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(kind) = self.law {
            cfg.law.kind = kind;
        }
        if let Some(n) = self.particles {
            cfg.law.particles = n;
        }
        if self.phonon_a.is_some() {
            cfg.law.phonon_a = self.phonon_a;
        }
    }
}
