//! Command implementations behind the `deformq` binary: configuration
//! resolution, table construction and CSV/JSON rendering.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::CliError;
