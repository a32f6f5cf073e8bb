use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("directed part contains a cycle through vertex `{0}`")]
    CycleDetected(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("vertex set is not a single district")]
    NotADistrict,
    #[error("intervention and outcome sets overlap")]
    OverlappingSets,
    #[error("target set is empty")]
    EmptyTarget,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("threshold exceeds upper bound")]
    InvalidBounds,
    #[error("no finite-cost solution exists")]
    Infeasible,
    #[error("instance too large for brute force ({0} finite edges)")]
    TooLarge(usize),
    #[error("objective {0} is not supported here")]
    UnsupportedObjective(&'static str),
    #[error("invalid probability {value} on {edge}")]
    InvalidProbability { edge: String, value: f64 },
    #[error("invalid weight {value} on {edge}")]
    InvalidWeight { edge: String, value: f64 },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("no feasible instance after {0} draws")]
    GenerationExhausted(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
