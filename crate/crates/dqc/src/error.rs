use brsp_protocol::{ErrCause, ProtocolError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DqcError {
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid pattern: {0}")]
    Pattern(String),
    #[error("{qubits} qubits exceed the dense simulation limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("expected {expected} prepared qubits, got {actual}")]
    SourceLength { expected: usize, actual: usize },
    #[error("vertex {vertex}: preparation returned the wrong branch (expected {expected})")]
    BranchMismatch { vertex: usize, expected: &'static str },
    #[error("vertex {vertex}: preparation ended in ERR ({cause:?})")]
    PreparationErr { vertex: usize, cause: ErrCause },
    #[error("vertex {vertex}: the prover holds no qubit")]
    MissingQubit { vertex: usize },
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("unknown server {0:?} (expected honest, flipall or flip:i)")]
    UnknownServer(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type Result<T, E = DqcError> = std::result::Result<T, E>;
