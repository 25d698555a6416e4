//! Wiring a verifier and a prover together over a chosen transport.

use std::thread;

use brsp_core::qsim::QubitState;
use serde::{Deserialize, Serialize};

use crate::config::{ProtocolConfig, TransportMode};
use crate::error::ProtocolError;
use crate::prover::{serve, ProverEndpoint, Responder};
use crate::strategy::StrategyKind;
use crate::transport::transport_pair;
use crate::verifier::{LocalLink, RoundForcing, RoundRecord, RspOutcome, Transcript, Verifier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub outcome: RspOutcome,
    /// The qubit the prover holds at the end, when its strategy keeps one.
    pub prover_qubit: Option<QubitState>,
    pub transcript: Transcript,
}

/// Runs one session of the protocol against a catalogued strategy.
pub fn run_session(cfg: &ProtocolConfig, strategy: StrategyKind) -> Result<SessionReport, ProtocolError> {
    run_session_with(cfg, Box::new(ProverEndpoint::new(strategy, cfg.seed)))
}

/// Runs one session against an arbitrary prover. Protocol failures come back
/// as an `Err` outcome; only configuration and connection setup errors are
/// returned as `Err`.
pub fn run_session_with(cfg: &ProtocolConfig, prover: Box<dyn Responder>) -> Result<SessionReport, ProtocolError> {
    cfg.validate()?;
    let (transcript, prover) = match cfg.transport {
        TransportMode::Local => {
            let mut link = LocalLink::new(prover);
            let transcript = Verifier::new(*cfg, &mut link).run();
            (transcript, link.into_prover())
        }
        TransportMode::InProc | TransportMode::Tcp => {
            let (mut verifier_end, prover_end) = transport_pair(cfg.transport)?;
            let handle = thread::spawn(move || serve(prover_end, prover));
            let transcript = Verifier::new(*cfg, &mut verifier_end).run();
            verifier_end.close();
            let prover = handle.join().map_err(|_| ProtocolError::Config("prover thread panicked".into()))?;
            (transcript, prover)
        }
    };
    Ok(SessionReport { outcome: transcript.outcome.clone(), prover_qubit: prover.final_qubit(), transcript })
}

/// A single qubit preparation test, with optional forced coins, over a local link.
pub fn qubit_prep_round(
    cfg: &ProtocolConfig,
    strategy: StrategyKind,
    seed: u64,
    forcing: &RoundForcing,
) -> Result<RoundRecord, ProtocolError> {
    let cfg = ProtocolConfig { seed, ..*cfg };
    cfg.validate()?;
    let mut link = LocalLink::new(Box::new(ProverEndpoint::new(strategy, seed)));
    let mut verifier = Verifier::new(cfg, &mut link);
    verifier.test_round(1, forcing)
}
