use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed configuration document.
    #[error("config: {0}")]
    Config(String),

    /// A flag or config value that the command cannot use.
    #[error("invalid `{field}`: {reason}")]
    Usage { field: &'static str, reason: String },

    #[error(transparent)]
    Engine(#[from] deformq::Error),

    #[error("every sweep row failed")]
    AllRowsFailed,

    #[error("{0} selftest check(s) failed")]
    SelftestFailed(usize),

    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Engine(_) => 2,
            CliError::AllRowsFailed => 3,
            CliError::Config(_) => 4,
            CliError::SelftestFailed(_) | CliError::Io(_) => 1,
        }
    }

    /// The offending parameter, when one can be named.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            CliError::Usage { field, .. } => Some(field),
            CliError::Engine(
                deformq::Error::Domain { field, .. } | deformq::Error::Config { field, .. },
            ) => Some(field),
            CliError::Engine(
                deformq::Error::Precondition(_) | deformq::Error::UnsupportedDomain(_),
            ) => Some("s"),
            CliError::Engine(deformq::Error::UnsupportedDeformation(_)) => Some("family"),
            CliError::Engine(deformq::Error::OutOfDomain { .. }) => Some("n-max"),
            _ => None,
        }
    }
}
