use thiserror::Error;

use crate::backend::BackendError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid emotion value: {0}")]
    InvalidVad(String),

    /// Emoji table is empty, malformed or violates an invariant.
    #[error("emoji table: {0}")]
    Table(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Descriptor failed validation. `path` is a JSON pointer to the first
    /// offending location.
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
