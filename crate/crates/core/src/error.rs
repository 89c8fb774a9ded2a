use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("expected {expected} angles, got {got}")]
    AngleCount { expected: usize, got: usize },

    #[error("no angle solution reached tolerance (best fidelity {best_fidelity:.12})")]
    Infeasible { best_fidelity: f64 },

    #[error("input is not affinely 3-dimensional (affine rank {rank})")]
    Degenerate { rank: usize },

    #[error("parameter grid is not strictly monotone at index {index}")]
    NonMonotone { index: usize },

    #[error("missing expectation for {0}")]
    MissingExpectation(String),

    #[error("no measurement group covers {0}")]
    Uncovered(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("grid point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at_point(self, index: usize) -> Self {
        Error::AtPoint {
            index,
            source: Box::new(self),
        }
    }

    /// Strips grid-point wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }
}
