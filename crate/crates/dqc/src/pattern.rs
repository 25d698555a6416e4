//! Measurement patterns with dummy and trap vertices.

use std::collections::BTreeSet;

use brsp_core::qsim::QubitState;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};
use crate::graph::GraphSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Computation,
    Dummy,
    Trap,
}

/// The client's per-vertex secrets: `θ ∈ Z₈`, `r ∈ {0,1}`, and `d ∈ {0,1}`
/// (used on dummies only).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secrets {
    pub theta: Vec<u8>,
    pub r: Vec<u8>,
    pub d: Vec<u8>,
}

impl Secrets {
    pub fn zeros(n: usize) -> Self {
        Secrets { theta: vec![0; n], r: vec![0; n], d: vec![0; n] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    /// Target angles `φ ∈ Z₈` (units of π/4).
    pub phi: Vec<u8>,
    pub dummies: BTreeSet<usize>,
    pub traps: BTreeSet<usize>,
    pub secrets: Secrets,
}

fn pattern_err(msg: impl Into<String>) -> DqcError {
    DqcError::Pattern(msg.into())
}

impl MeasurementPattern {
    /// A pattern with all-zero secrets, checked against `graph`.
    pub fn new(graph: &GraphSpec, phi: Vec<u8>, dummies: &[usize], traps: &[usize]) -> Result<Self> {
        let pattern = MeasurementPattern {
            secrets: Secrets::zeros(phi.len()),
            phi,
            dummies: dummies.iter().copied().collect(),
            traps: traps.iter().copied().collect(),
        };
        pattern.validate(graph)?;
        Ok(pattern)
    }

    pub fn validate(&self, graph: &GraphSpec) -> Result<()> {
        let n = graph.vertices();
        if self.phi.len() != n {
            return Err(pattern_err(format!("{} angles for {n} vertices", self.phi.len())));
        }
        if self.phi.iter().any(|&p| p >= 8) {
            return Err(pattern_err("angles must lie in Z₈"));
        }
        let s = &self.secrets;
        if s.theta.len() != n || s.r.len() != n || s.d.len() != n {
            return Err(pattern_err("secret vectors must have one entry per vertex"));
        }
        if s.theta.iter().any(|&t| t >= 8) || s.r.iter().chain(&s.d).any(|&b| b > 1) {
            return Err(pattern_err("secrets out of range"));
        }
        if let Some(v) = self.dummies.iter().chain(&self.traps).find(|&&v| v >= n) {
            return Err(pattern_err(format!("vertex {v} out of range")));
        }
        if let Some(v) = self.dummies.intersection(&self.traps).next() {
            return Err(pattern_err(format!("vertex {v} is both dummy and trap")));
        }
        if let Some(v) = (0..n).find(|v| !self.dummies.contains(v) && s.d[*v] != 0) {
            return Err(pattern_err(format!("non-dummy {v} carries a dummy bit")));
        }
        for &t in &self.traps {
            if self.phi[t] != 0 {
                return Err(pattern_err(format!("trap {t} has a nonzero angle")));
            }
            if let Some(u) = graph.neighbors(t).find(|u| !self.dummies.contains(u)) {
                return Err(pattern_err(format!("trap {t} has non-dummy neighbour {u}")));
            }
        }
        let domain = graph.flow_domain();
        for v in 0..n {
            let computes = self.role(v) == Role::Computation;
            if computes != domain.contains(&v) {
                return Err(pattern_err(format!("vertex {v}: role {:?} disagrees with the flow", self.role(v))));
            }
        }
        Ok(())
    }

    pub fn role(&self, v: usize) -> Role {
        if self.dummies.contains(&v) {
            Role::Dummy
        } else if self.traps.contains(&v) {
            Role::Trap
        } else {
            Role::Computation
        }
    }

    pub fn vertices(&self) -> usize {
        self.phi.len()
    }

    /// Fresh uniform secrets.
    pub fn with_random_secrets<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        let n = self.vertices();
        self.secrets.theta = (0..n).map(|_| rng.random_range(0..8)).collect();
        self.secrets.r = (0..n).map(|_| rng.random_range(0..2)).collect();
        self.secrets.d = (0..n).map(|v| if self.dummies.contains(&v) { rng.random_range(0..2) } else { 0 }).collect();
        self
    }

    /// `d'ᵥ`: XOR of the dummy bits over the dummy neighbours of `v`.
    pub fn dummy_byproduct(&self, graph: &GraphSpec, v: usize) -> u8 {
        graph.neighbors(v).filter(|u| self.dummies.contains(u)).fold(0, |acc, u| acc ^ self.secrets.d[u])
    }

    /// The qubit the server receives for `v`: `|dᵥ⟩` on dummies, otherwise
    /// `Z^{d'ᵥ}|+_{θᵥ}⟩`.
    pub fn prepared_qubit(&self, graph: &GraphSpec, v: usize) -> QubitState {
        match self.role(v) {
            Role::Dummy => QubitState::basis(self.secrets.d[v]),
            _ => QubitState::plus_index(self.secrets.theta[v] + 4 * self.dummy_byproduct(graph, v)),
        }
    }
}
