use std::path::PathBuf;

/// Errors raised across the extraction stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or truncated frame file; `offset` is the byte position of the problem.
    #[error("frame format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("depth mismatch: file declares {found}-bit samples, expected {expected}")]
    DepthMismatch { expected: u8, found: u8 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input too short for {test}: need {required}, got {actual}")]
    TooShort {
        test: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("frame {frame_index}: {message}")]
    Frame { frame_index: usize, message: String },

    #[error("report error: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }
}
