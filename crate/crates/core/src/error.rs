use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file: {0}")]
    UnreadableFile(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("zero-dimension image")]
    ZeroDimension,
    #[error("image {width}x{height} is smaller than the {kernel}x{kernel} blur kernel")]
    ImageTooSmall {
        width: usize,
        height: usize,
        kernel: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no walls detected")]
    NoWalls,
    #[error("degenerate match input")]
    DegenerateMatch,
    #[error("nothing to extrude")]
    NothingToExtrude,
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("dangling wall reference: {0}")]
    DanglingWallRef(u32),
    #[error("image dimensions differ: detected {detected:?}, truth {truth:?}")]
    DimensionMismatch {
        detected: (u32, u32),
        truth: (u32, u32),
    },
    #[error("unsatisfiable synth config: {0}")]
    Unsatisfiable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
