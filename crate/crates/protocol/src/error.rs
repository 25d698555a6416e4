use brsp_core::entcf::EntcfError;
use brsp_core::qsim::QsimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("transport I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("peer disconnected")]
    Disconnected,
    #[error("frame of {size} bytes exceeds the {limit}-byte cap")]
    FrameTooLarge { size: usize, limit: usize },
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unexpected `{got}` message, wanted `{wanted}`")]
    Unexpected { wanted: &'static str, got: String },
    #[error("measurement buffer: {0}")]
    Buffer(String),
    #[error(transparent)]
    Entcf(#[from] EntcfError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

impl From<serde_json::Error> for ProtocolError {
    fn from(e: serde_json::Error) -> Self {
        ProtocolError::Malformed(e.to_string())
    }
}
