use thiserror::Error;

/// Exit status 1 for problems with the request, 2 for failures while
/// carrying it out.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<reseb_core::Error> for CliError {
    fn from(e: reseb_core::Error) -> Self {
        use reseb_core::Error as E;
        match &e {
            E::Config(_) | E::Parse { .. } | E::Format(_) | E::Shape { .. } | E::Rank(_) => {
                CliError::Validation(e.to_string())
            }
            E::Io(io) if io.kind() == std::io::ErrorKind::NotFound => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        reseb_core::Error::from(e).into()
    }
}

pub type CliResult<T> = Result<T, CliError>;
