use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),

    #[error("malformed weight file: {0}")]
    Format(#[from] FormatError),

    #[error("unsupported tensor dtype code {code} for tensor `{name}`")]
    UnsupportedDtype { name: String, code: u8 },

    #[error("weight manifest: {0}")]
    Manifest(String),

    #[error("image: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Structural problems found while parsing an NSTW weight container.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, expected \"NSTW\"")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated while reading {0}")]
    Truncated(&'static str),

    #[error("tensor name is not valid UTF-8")]
    InvalidName,

    #[error("duplicate tensor `{0}`")]
    DuplicateName(String),

    #[error("tensor `{0}` has a shape whose element count overflows")]
    ShapeOverflow(String),

    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn manifest(msg: impl Into<String>) -> Self {
        Error::Manifest(msg.into())
    }
}
