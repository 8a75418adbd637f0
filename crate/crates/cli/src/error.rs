use thiserror::Error;

/// Failures of a command-line run, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration (exit 2).
    #[error("configuration error: {0}")]
    Parse(String),
    /// The simulation itself failed (exit 3).
    #[error("numerical error: {0}")]
    Numeric(modbath_core::Error),
    /// At least one self-test check failed (exit 1).
    #[error("{0} self-test check(s) failed")]
    SelftestFailed(usize),
    /// Reading the config or writing output failed (exit 4).
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SelftestFailed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<modbath_core::Error> for CliError {
    /// Parameter rejections by the library count as configuration errors.
    fn from(e: modbath_core::Error) -> Self {
        use modbath_core::Error as E;
        match e {
            E::Precondition(_) | E::Range { .. } | E::Domain(_) => CliError::Parse(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}
