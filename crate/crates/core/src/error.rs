use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument or evaluation point lies outside the admissible set.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computed quantity over- or underflowed.
    #[error("range error: {0}")]
    Range(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown function family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}` for `{family}`: {msg}")]
    Parameter {
        family: String,
        name: String,
        msg: String,
    },

    /// The integrand returned a non-finite value.
    #[error("non-finite integrand value at abscissa {abscissa}")]
    Singularity { abscissa: f64 },

    /// Two routes to the same integral disagree.
    #[error("quadrature self-check failed: {0}")]
    SelfCheck(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error on line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
