use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Mesh connectivity that the edge/fan machinery cannot represent.
    #[error("topology error: {0}")]
    Topology(String),

    /// Bad generator arguments, scenario parameters or config values.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported element type {kind} in {path}")]
    UnsupportedElement { kind: String, path: PathBuf },

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("non-finite state at step {step} (t = {time:.6e} s)")]
    Divergence { step: u64, time: f64 },

    #[error("degenerate element {element}: shortest edge {length:.3e} m")]
    DegenerateElement { element: usize, length: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
