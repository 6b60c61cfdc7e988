use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),

    #[error("operation `{op}` is not defined on a {space} phase space")]
    UnsupportedSpace { op: &'static str, space: String },

    #[error("points belong to different spaces: {0}")]
    SpaceMismatch(String),

    #[error("point {0:?} lies outside the phase space")]
    OutsideSpace(Vec<f64>),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("invalid parameter for `{system}`: {reason}")]
    InvalidParameter { system: String, reason: String },

    #[error("system `{0}` provides no {1}")]
    MissingCapability(String, &'static str),

    #[error("orbit escaped the domain at iterate {0}")]
    Escaped(usize),

    #[error("singular Jacobian at iterate {0}")]
    SingularJacobian(usize),

    #[error("no hyperbolic splitting found: {0}")]
    NotHyperbolic(String),

    #[error("points are in different cylinders (first mismatch at depth {0})")]
    DifferentCylinders(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
