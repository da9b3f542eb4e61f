use std::io;

use thiserror::Error;

/// Errors produced by the transfer pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A block or region reaches outside the plane it refers to.
    #[error("region {x},{y} {w}x{h} exceeds {width}x{height} plane")]
    Bounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    /// An argument violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Malformed sidecar, PGM or other structured input.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// Internal inconsistency between values that should agree.
    #[error("logic error: {0}")]
    Logic(String),

    /// An external super-resolution process misbehaved.
    #[error("plugin error: {message}")]
    Plugin { message: String, stderr: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    /// Failure while processing one frame of a sequence.
    #[error("frame {index}: {source}")]
    Frame {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Attach a frame index to an error raised while processing a sequence.
    pub fn at_frame(self, index: usize) -> Self {
        match self {
            e @ Error::Frame { .. } => e,
            e => Error::Frame {
                index,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with frame context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Frame { source, .. } => source.root(),
            e => e,
        }
    }
}
