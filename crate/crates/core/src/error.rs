use thiserror::Error;

/// Errors raised by algebra, kinematics, control and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// The controller was used before its objective was configured.
    #[error("controller is not set: {0}")]
    NotSet(&'static str),

    #[error("quadratic program is infeasible: {0}")]
    Infeasible(String),

    #[error("quadratic program did not converge within {0} active-set iterations")]
    MaxIterations(usize),

    #[error("model file error in {source_name}: {message}")]
    ModelFile { source_name: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model_file(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ModelFile {
            source_name: source_name.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            found,
        })
    }
}
