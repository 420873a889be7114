use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero point has no Gaussian valuation")]
    ZeroPoint,
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),
    #[error("depth {depth} exceeds the configured maximum {max}")]
    Capacity { depth: u32, max: u32 },
    #[error("partition check failed for child {child}: {reason}")]
    Partition { child: usize, reason: String },
    #[error("patch corruption: {0}")]
    Corruption(String),
    #[error("empty window: {0}")]
    EmptyWindow(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular lattice basis")]
    SingularBasis,
    #[error("grain coincidence: {0}")]
    Coincidence(String),
    #[error("missing first peak: {0}")]
    MissingPeak(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a resource guard rather than bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::Guard(_))
    }
}
