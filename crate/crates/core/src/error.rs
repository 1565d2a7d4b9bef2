use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing derivative rule for function `{0}`")]
    MissingDerivativeRule(String),

    #[error("singular evaluation at node {node}: {reason}")]
    SingularEvaluation { node: String, reason: String },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("not a diffeomorphism: derivative {derivative} at theta = {theta}")]
    NotDiffeomorphism { theta: f64, derivative: f64 },

    #[error("z too close to symbol range: margin {margin:e} at (r={r}, theta={theta}, rho={rho}, eta={eta})")]
    ZTooClose { margin: f64, r: f64, theta: f64, rho: f64, eta: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("support escapes window: {0}")]
    SupportEscapesWindow(String),

    #[error("quadrature undersampled: {0}")]
    Undersampled(String),

    #[error("coefficient check failed: {0}")]
    CoefficientCheck(String),

    #[error("weight function check failed: {0}")]
    WeightCheck(String),

    #[error("series too deep: node budget {budget} exceeded after term {achieved}")]
    SeriesTooDeep { achieved: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
