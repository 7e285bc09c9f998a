use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {op} got {left:?} and {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid value: {0}")]
    Value(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid state: {0}")]
    State(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::Shape {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Failures while decoding one of the binary formats (IDX, model archive).
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated input: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("duplicate entry name {0:?}")]
    DuplicateName(String),

    #[error("entry name is empty")]
    EmptyName,

    #[error("entry name is not valid UTF-8")]
    InvalidName,

    #[error("{0} trailing bytes after last entry")]
    TrailingBytes(usize),

    #[error("unsupported dimensions: {0}")]
    Dimensions(String),

    #[error("corrupt gzip stream: {0}")]
    Gzip(String),
}
