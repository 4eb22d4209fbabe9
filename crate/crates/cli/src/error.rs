use std::path::PathBuf;

use constancy::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] constancy::Error),

    /// A malformed cell; `row` counts data rows from 1, `column` from 1.
    #[error("row {row}, column {column} (`{name}`): {message}")]
    Cell {
        row: usize,
        column: usize,
        name: String,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Core(e) => e.class(),
            CliError::Cell { .. } | CliError::Data(_) | CliError::Io { .. } => ErrorClass::Data,
            CliError::Usage(_) => ErrorClass::Usage,
        }
    }

    /// 1 usage, 2 data, 3 numerical, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Internal => 4,
        }
    }

    /// `error[<class>]: <message>` on one line.
    pub fn render(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.class(), msg.trim())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
