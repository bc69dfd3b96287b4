use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the configured index space.
    #[error("OutOfSpace: value {value} on axis {axis} is outside [{lower}, {upper}]")]
    OutOfSpace {
        axis: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// The query corners cross or coincide inside the query interval.
    #[error("DegenerateBox: {0}")]
    DegenerateBox(String),

    /// Removal of a point that the index does not hold.
    #[error("NotFound: {0}")]
    NotFound(String),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("Parse: {0}")]
    Parse(String),

    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::OutOfSpace { .. } => "OutOfSpace",
            Error::DegenerateBox(_) => "DegenerateBox",
            Error::NotFound(_) => "NotFound",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
