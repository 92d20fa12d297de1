use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("metric is not positive definite at node {node:?} (smallest eigenvalue {min_eigenvalue})")]
    NonSpdMetric { node: [usize; 3], min_eigenvalue: f64 },

    #[error("metric varies by {ratio:.3} between adjacent nodes {a:?} and {b:?} (limit 0.5)")]
    RoughMetric { a: [usize; 3], b: [usize; 3], ratio: f64 },

    #[error("placement mismatch: expected {expected}, got {got}")]
    Placement { expected: &'static str, got: &'static str },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("boundary patch is empty")]
    EmptyPatch,

    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("{steps} time steps per T is odd; the odd continuation needs an even count")]
    OddSteps { steps: usize },

    #[error("solver became unstable at step {step} (control {control:?})")]
    Instability { step: usize, control: Option<usize> },

    #[error("connecting form asymmetry {ratio:.3} exceeds 20% of its norm")]
    Asymmetric { ratio: f64 },

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("oracle space rank {rank} is below 3")]
    RankCollapse { rank: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("algebra closure would exceed {limit} members; lower the degree")]
    Blowup { limit: usize },

    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("bad matrix file: {0}")]
    Format(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }

    /// Exit code for the command-line driver: configuration and input problems
    /// map to 2, everything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::NonSpdMetric { .. }
            | Error::RoughMetric { .. }
            | Error::Cfl { .. }
            | Error::OddSteps { .. }
            | Error::MissingInput(_)
            | Error::Json(_) => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
