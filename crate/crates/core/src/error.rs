use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i}, {j}) out of range for {nx}x{ny} grid")]
    Index { i: usize, j: usize, nx: usize, ny: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the run configuration, including sampling
    /// limits a different configuration would satisfy.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Configuration(_))
    }
}
