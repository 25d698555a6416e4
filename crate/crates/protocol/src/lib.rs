//! Buffered remote state preparation: the verifier and prover state machines,
//! the catalogued prover strategies, and the frame transports they talk over.
//!
//! A session is `R ← U{1..N}` qubit preparation tests followed by the abort
//! rule and, if it passes, a final round whose key kind follows the requested
//! basis: an injective key for `W = Z`, a claw-free key for `W = X`.

pub mod azuma;
pub mod config;
pub mod error;
pub mod policy;
pub mod prover;
pub mod session;
pub mod strategy;
pub mod transport;
pub mod verifier;
pub mod wire;

pub use azuma::{azuma_abort_probability, AzumaBound};
pub use config::{Basis, BufferMode, ProtocolConfig, TransportMode};
pub use error::ProtocolError;
pub use policy::{AbortCondition, AbortPolicy, AbortReason, Flag, Tally, TestKind};
pub use prover::{ProverEndpoint, Responder};
pub use session::{qubit_prep_round, run_session, run_session_with, SessionReport};
pub use strategy::StrategyKind;
pub use verifier::{ErrCause, RoundForcing, RoundRecord, RspOutcome, TestChoice, ThetaChoice, Transcript};
