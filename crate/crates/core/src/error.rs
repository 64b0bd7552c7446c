use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex count {n} outside supported range {min}..={max}")]
    VertexCount { n: usize, min: usize, max: usize },

    #[error("vertex index {index} out of range for n = {n}")]
    VertexIndex { index: usize, n: usize },

    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("{what} too large: {got} exceeds limit {limit}{hint}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("decay {lambda} violates {bound}")]
    LambdaBound { lambda: f64, bound: String },

    #[error("type code {code} out of range for n = {n}")]
    TypeCode { code: u32, n: usize },

    #[error("observer and target are both player {0}")]
    SamePlayer(usize),

    #[error("observer type has zero probability under the prior")]
    NullObserver,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:e}, contraction modulus {modulus})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        modulus: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
