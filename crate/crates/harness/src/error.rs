use brsp_core::rigidity::RigidityError;
use brsp_core::zq::ZqError;
use brsp_dqc::DqcError;
use brsp_protocol::ProtocolError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("an experiment needs at least one trial")]
    NoTrials,
    #[error("need at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("undersampled: {total} observations over {categories} categories (need at least {needed})")]
    Undersampled { total: u64, categories: usize, needed: u64 },
    #[error("{0}")]
    Exhausted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Dqc(#[from] DqcError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Zq(#[from] ZqError),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
