//! Trap-based blind delegation over a measurement pattern.
//!
//! The client hides each angle as `δᵥ = φ'ᵥ + θᵥ + 4rᵥ` (units of π/4), where
//! `φ'ᵥ = (−1)^{s_X} φᵥ + 4 s_Z` is the flow-corrected angle. Dummies get a
//! uniformly random `δ`. The server measures each qubit in the `|±_δ⟩`
//! basis and reports `b`; the client keeps `s = b ⊕ r`. A trap measured this
//! way returns `b = r` with certainty, so the run is accepted iff that holds
//! on every trap.

use std::fmt;
use std::str::FromStr;

use brsp_core::qsim::QubitState;
use brsp_core::{SeedTree, SimRng};
use brsp_protocol::RspOutcome;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::StateVector;
use crate::error::{DqcError, Result};
use crate::graph::GraphSpec;
use crate::pattern::{MeasurementPattern, Role};

/// A qubit delivered by one remote preparation session, with the verifier's
/// record of what it should be.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedQubit {
    pub outcome: RspOutcome,
    /// What the prover actually holds, if anything.
    pub qubit: Option<QubitState>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSource {
    /// The client prepares `|dᵥ⟩` / `Z^{d'ᵥ}|+_{θᵥ}⟩` itself from the pattern's secrets.
    DirectQuantum,
    /// One prepared qubit per vertex, in vertex order. The pattern's secrets
    /// must already agree with the outcomes (see [`secrets_from_preparations`]).
    FromRsp(Vec<PreparedQubit>),
}

/// Fills `θ` and `d` from remote preparation outcomes: `dᵥ = b` on dummies,
/// and `θᵥ = θ_rsp + 4d'ᵥ` elsewhere so that the delivered `|+_{θ_rsp}⟩`
/// equals `Z^{d'ᵥ}|+_{θᵥ}⟩`. The `r` bits are left alone.
pub fn secrets_from_preparations(
    pattern: &mut MeasurementPattern,
    graph: &GraphSpec,
    preps: &[PreparedQubit],
) -> Result<()> {
    check_branches(pattern, preps)?;
    for (v, prep) in preps.iter().enumerate() {
        if let RspOutcome::Z { b } = prep.outcome {
            pattern.secrets.d[v] = b;
        }
    }
    for (v, prep) in preps.iter().enumerate() {
        if let RspOutcome::X { theta } = prep.outcome {
            pattern.secrets.theta[v] = (theta + 4 * pattern.dummy_byproduct(graph, v)) % 8;
        }
    }
    Ok(())
}

fn check_branches(pattern: &MeasurementPattern, preps: &[PreparedQubit]) -> Result<()> {
    if preps.len() != pattern.vertices() {
        return Err(DqcError::SourceLength { expected: pattern.vertices(), actual: preps.len() });
    }
    for (v, prep) in preps.iter().enumerate() {
        match (&prep.outcome, pattern.role(v)) {
            (RspOutcome::Err { cause }, _) => return Err(DqcError::PreparationErr { vertex: v, cause: cause.clone() }),
            (RspOutcome::Z { .. }, Role::Dummy) | (RspOutcome::X { .. }, Role::Computation | Role::Trap) => {}
            (_, Role::Dummy) => return Err(DqcError::BranchMismatch { vertex: v, expected: "Z" }),
            (_, _) => return Err(DqcError::BranchMismatch { vertex: v, expected: "X" }),
        }
    }
    Ok(())
}

/// The server's register after every graph edge has been entangled.
pub fn prepare_server_state(pattern: &MeasurementPattern, graph: &GraphSpec, source: &StateSource) -> Result<StateVector> {
    pattern.validate(graph)?;
    let qubits = match source {
        StateSource::DirectQuantum => (0..graph.vertices()).map(|v| pattern.prepared_qubit(graph, v)).collect(),
        StateSource::FromRsp(preps) => {
            check_branches(pattern, preps)?;
            preps
                .iter()
                .enumerate()
                .map(|(v, p)| p.qubit.ok_or(DqcError::MissingQubit { vertex: v }))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut state = StateVector::product(&qubits)?;
    for (a, b) in graph.edges() {
        state.cz(a, b);
    }
    Ok(state)
}

/// The server's side of the exchange.
pub trait FkServer {
    /// Measures vertex `v` of `state` at angle index `delta` and reports a
    /// value that should be a bit.
    fn measure(&mut self, state: &mut StateVector, v: usize, delta: u8, rng: &mut SimRng) -> u8;
}

/// Catalogued server behaviours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ServerKind {
    Honest,
    /// Reports the complement of every outcome.
    FlipAll,
    /// Honest except at one vertex.
    FlipVertex { vertex: usize },
}

impl FkServer for ServerKind {
    fn measure(&mut self, state: &mut StateVector, v: usize, delta: u8, rng: &mut SimRng) -> u8 {
        let b = state.measure_xy(v, delta, rng);
        match *self {
            ServerKind::Honest => b,
            ServerKind::FlipAll => b ^ 1,
            ServerKind::FlipVertex { vertex } => b ^ u8::from(vertex == v),
        }
    }
}

impl FromStr for ServerKind {
    type Err = DqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(ServerKind::Honest),
            "flipall" => Ok(ServerKind::FlipAll),
            _ => s
                .strip_prefix("flip:")
                .and_then(|v| v.parse().ok())
                .map(|vertex| ServerKind::FlipVertex { vertex })
                .ok_or_else(|| DqcError::UnknownServer(s.into())),
        }
    }
}

impl fmt::Display for ServerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServerKind::Honest => f.write_str("honest"),
            ServerKind::FlipAll => f.write_str("flipall"),
            ServerKind::FlipVertex { vertex } => write!(f, "flip:{vertex}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    /// The run stopped before a verdict: a preparation ended in ERR or the
    /// server sent something other than a bit.
    Abort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub vertex: usize,
    pub role: Role,
    pub delta: u8,
    pub b: u8,
    /// `b ⊕ r`; dummies carry none.
    pub s: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkTranscript {
    /// In measurement order.
    pub vertices: Vec<VertexRecord>,
    pub verdict: Verdict,
    pub failed_traps: Vec<usize>,
    /// `s` on the output vertices, in output order.
    pub outputs: Vec<u8>,
    pub abort: Option<String>,
}

impl FkTranscript {
    pub fn aborted(reason: impl Into<String>) -> Self {
        FkTranscript {
            vertices: Vec::new(),
            verdict: Verdict::Abort,
            failed_traps: Vec::new(),
            outputs: Vec::new(),
            abort: Some(reason.into()),
        }
    }

    /// The outputs packed as an integer, output `j` on bit `j`.
    pub fn output_index(&self) -> usize {
        self.outputs.iter().enumerate().map(|(j, &s)| usize::from(s) << j).sum()
    }
}

/// Flow-corrected angle `(−1)^{s_X} φ + 4 s_Z`.
pub fn corrected_angle(phi: u8, s_x: u8, s_z: u8) -> u8 {
    let signed = if s_x == 1 { (8 - phi % 8) % 8 } else { phi % 8 };
    (signed + 4 * s_z) % 8
}

/// `δ = φ' + θ + 4r`.
pub fn blind_angle(phi_corrected: u8, theta: u8, r: u8) -> u8 {
    (phi_corrected + theta + 4 * r) % 8
}

/// Runs the exchange on an already prepared register.
pub fn run_delegation(
    pattern: &MeasurementPattern,
    graph: &GraphSpec,
    mut state: StateVector,
    server: &mut dyn FkServer,
    client_rng: &mut SimRng,
    server_rng: &mut SimRng,
) -> Result<FkTranscript> {
    pattern.validate(graph)?;
    let n = graph.vertices();
    let mut s = vec![0u8; n];
    let mut records = Vec::with_capacity(n);
    let mut failed_traps = Vec::new();
    for &v in graph.measurement_order() {
        let role = pattern.role(v);
        let delta = match role {
            Role::Dummy => client_rng.random_range(0..8),
            Role::Trap => blind_angle(0, pattern.secrets.theta[v], pattern.secrets.r[v]),
            Role::Computation => {
                let s_x = graph.predecessor(v).map_or(0, |p| s[p]);
                let s_z = graph.z_dependencies(v).iter().fold(0, |acc, &j| acc ^ s[j]);
                let phi = corrected_angle(pattern.phi[v], s_x, s_z);
                blind_angle(phi, pattern.secrets.theta[v], pattern.secrets.r[v])
            }
        };
        let b = server.measure(&mut state, v, delta, server_rng);
        if b > 1 {
            let mut t = FkTranscript::aborted(format!("vertex {v}: server sent {b}, not a bit"));
            t.vertices = records;
            return Ok(t);
        }
        let sv = (role != Role::Dummy).then(|| b ^ pattern.secrets.r[v]);
        if let Some(x) = sv {
            s[v] = x;
        }
        if role == Role::Trap && b != pattern.secrets.r[v] {
            failed_traps.push(v);
        }
        records.push(VertexRecord { vertex: v, role, delta, b, s: sv });
    }
    let verdict = if failed_traps.is_empty() { Verdict::Accept } else { Verdict::Reject };
    Ok(FkTranscript {
        vertices: records,
        verdict,
        failed_traps,
        outputs: graph.outputs().iter().map(|&o| s[o]).collect(),
        abort: None,
    })
}

/// Draws the client's secrets from `seed`, prepares the register directly
/// and runs the exchange against `server`.
pub fn fk_delegate(
    pattern: &MeasurementPattern,
    graph: &GraphSpec,
    mut server: impl FkServer,
    seed: u64,
) -> Result<FkTranscript> {
    let tree = SeedTree::new(seed);
    let pattern = pattern.clone().with_random_secrets(&mut tree.named("secrets").rng());
    let state = prepare_server_state(&pattern, graph, &StateSource::DirectQuantum)?;
    run_delegation(&pattern, graph, state, &mut server, &mut tree.named("client").rng(), &mut tree.named("server").rng())
}
