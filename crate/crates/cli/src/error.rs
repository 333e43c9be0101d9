use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }
}

impl From<ecwm::Error> for CliError {
    fn from(err: ecwm::Error) -> Self {
        use ecwm::Error as E;
        let msg = err.to_string();
        match err {
            E::Design(_) | E::MissingColumn(_) | E::InfiniteLogit(_) | E::Io(_) => CliError::Config(msg),
            E::InsufficientData(_) | E::Validation { .. } | E::Parse { .. } => CliError::Data(msg),
            E::Domain(_) | E::DegenerateDenominator(_) | E::Consistency(_) | E::SingularSystem(_) | E::Unreliable { .. } => {
                CliError::Numerical(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
