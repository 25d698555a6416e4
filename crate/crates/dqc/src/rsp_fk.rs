//! Delegation whose server qubits are delivered by remote state preparation:
//! one session per vertex (`W = Z` for dummies, `W = X` otherwise), then the
//! trap-based exchange on the qubits the prover ended up holding.

use brsp_core::SeedTree;
use brsp_protocol::{run_session_with, Basis, ProtocolConfig, ProverEndpoint, Responder, RspOutcome, StrategyKind};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fk::{
    prepare_server_state, run_delegation, secrets_from_preparations, FkTranscript, PreparedQubit, ServerKind,
    StateSource,
};
use crate::library::{library, PatternId};
use crate::pattern::Role;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub vertex: usize,
    pub basis: Basis,
    pub seed: u64,
    pub rounds: u64,
    pub outcome: RspOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RspFkReport {
    pub pattern: PatternId,
    pub server: ServerKind,
    pub sessions: Vec<SessionSummary>,
    pub transcript: FkTranscript,
}

/// Honest prover in every preparation session.
pub fn rsp_fk_run(cfg: &ProtocolConfig, id: PatternId, server: ServerKind, seed: u64) -> Result<RspFkReport> {
    rsp_fk_run_with(cfg, id, server, seed, |_, session_seed| {
        Box::new(ProverEndpoint::new(StrategyKind::Honest, session_seed))
    })
}

/// `prover(vertex, session_seed)` supplies the prover for each preparation
/// session. Any session ending in ERR aborts the whole run.
pub fn rsp_fk_run_with(
    cfg: &ProtocolConfig,
    id: PatternId,
    server: ServerKind,
    seed: u64,
    mut prover: impl FnMut(usize, u64) -> Box<dyn Responder>,
) -> Result<RspFkReport> {
    let lib = library(id);
    let tree = SeedTree::new(seed);
    let mut sessions = Vec::new();
    let mut preps = Vec::new();
    for v in 0..lib.graph.vertices() {
        let basis = if lib.pattern.role(v) == Role::Dummy { Basis::Z } else { Basis::X };
        let session_seed = tree.named("rsp").child(v as u64).value();
        let session_cfg = ProtocolConfig { basis, seed: session_seed, ..*cfg };
        let report = run_session_with(&session_cfg, prover(v, session_seed))?;
        sessions.push(SessionSummary {
            vertex: v,
            basis,
            seed: session_seed,
            rounds: report.transcript.planned_rounds,
            outcome: report.outcome.clone(),
        });
        if report.outcome.is_err() {
            let transcript = FkTranscript::aborted(format!("vertex {v}: preparation ended in ERR"));
            return Ok(RspFkReport { pattern: id, server, sessions, transcript });
        }
        preps.push(PreparedQubit { outcome: report.outcome, qubit: report.prover_qubit });
    }

    let mut pattern = lib.pattern.clone();
    let mut secret_rng = tree.named("secrets").rng();
    pattern.secrets.r = (0..pattern.vertices()).map(|_| secret_rng.random_range(0..2)).collect();
    secrets_from_preparations(&mut pattern, &lib.graph, &preps)?;
    let state = prepare_server_state(&pattern, &lib.graph, &StateSource::FromRsp(preps))?;
    let mut server_impl = server;
    let transcript = run_delegation(
        &pattern,
        &lib.graph,
        state,
        &mut server_impl,
        &mut tree.named("client").rng(),
        &mut tree.named("server").rng(),
    )?;
    Ok(RspFkReport { pattern: id, server, sessions, transcript })
}
