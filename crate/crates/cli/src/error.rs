use shapeflow::evolution::EvolutionError;
use shapeflow::grassmannian::GrassmannianError;
use shapeflow::kp::KpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::Driver(_)
            | EvolutionError::InvalidParameters(_)
            | EvolutionError::WindowMismatch => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<GrassmannianError> for CliError {
    fn from(e: GrassmannianError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<KpError> for CliError {
    fn from(e: KpError) -> Self {
        match e {
            KpError::TooFewTimes(_) | KpError::OutsideTable(_) => CliError::Config(e.to_string()),
            KpError::Graph(g) => g.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}
