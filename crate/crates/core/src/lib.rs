//! Semiclassical energy spectra and Boltzmann thermodynamics for
//! one-dimensional systems with the deformed commutator [x,p] = iħ(1+sH).
//!
//! The deformation enters through an energy-dependent ħ → ħ·f(E), with
//! f = 1+sE or e^{sE}. [`spectrum`] integrates the resulting quantization rule
//! dE/dn = ħf(E)ω_cl(E); [`statmech`] builds the density of states ρ⁰/f(E),
//! the partition function and its thermodynamics. [`validation`] bundles the
//! cross-checks between numerical engines and closed forms.

pub mod classical;
pub mod error;
pub mod model;
mod ode;
pub mod quadrature;
pub mod special;
pub mod spectrum;
pub mod statmech;
pub mod validation;

pub use error::{Error, Result};
pub use model::{
    validate_system, Cutoff, Deformation, DeformationFamily, Level, SpectrumMethod, SpectrumResult,
    SystemSpec, ThermoPoint, ThermoRoute, UnitsConvention,
};
pub use quadrature::{IntegralResult, QuadratureConfig};
pub use spectrum::OdeConfig;
