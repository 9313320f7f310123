use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or configuration file; exit status 2.
    #[error("config error: {0}")]
    Config(String),
    /// A solver failed; exit status 3.
    #[error("solver error ({method}, E = {energy}): {source}")]
    Solver {
        method: String,
        energy: f64,
        #[source]
        source: phasekit::Error,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Solver { .. } => 3,
        }
    }

    pub(crate) fn solver(method: impl Into<String>, energy: f64, source: phasekit::Error) -> Self {
        CliError::Solver { method: method.into(), energy, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
