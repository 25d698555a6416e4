//! Measurement-based quantum computation on small graphs, and trap-based
//! blind delegation whose input qubits can come from remote state
//! preparation sessions.

pub mod engine;
pub mod error;
pub mod fk;
pub mod graph;
pub mod library;
pub mod pattern;
pub mod rsp_fk;

pub use engine::StateVector;
pub use error::DqcError;
pub use fk::{fk_delegate, prepare_server_state, FkServer, FkTranscript, ServerKind, StateSource, Verdict};
pub use graph::GraphSpec;
pub use library::{library, LibraryPattern, LogicalCircuit, PatternId};
pub use pattern::{MeasurementPattern, Role};
pub use rsp_fk::{rsp_fk_run, rsp_fk_run_with, RspFkReport};
