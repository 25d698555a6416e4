//! A fixed set of small patterns, each paired with the circuit it computes.
//!
//! Every pattern starts its logical qubits in `|+⟩` and reads them out by
//! measuring the output vertices in the `|±_φ⟩` basis. Each carries one trap
//! shielded by a dummy.

use std::fmt;
use std::str::FromStr;

use brsp_core::qsim::QubitState;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{phase, StateVector};
use crate::error::{DqcError, Result};
use crate::graph::GraphSpec;
use crate::pattern::MeasurementPattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternId {
    /// Three-vertex wire, `φ = (0, 0)`, read out at π/4.
    Teleport,
    /// Three-vertex wire applying `J(π/4)·J(π/2)`, read out at 0.
    Rotation,
    /// Two wires joined by an edge between their outputs.
    Cz,
}

impl PatternId {
    pub const ALL: [PatternId; 3] = [PatternId::Teleport, PatternId::Rotation, PatternId::Cz];

    pub fn name(self) -> &'static str {
        match self {
            PatternId::Teleport => "teleport",
            PatternId::Rotation => "rotation",
            PatternId::Cz => "cz",
        }
    }
}

impl FromStr for PatternId {
    type Err = DqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "teleport" | "identity" => Ok(PatternId::Teleport),
            "rotation" => Ok(PatternId::Rotation),
            "cz" => Ok(PatternId::Cz),
            _ => Err(DqcError::UnknownPattern(s.into())),
        }
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    /// `J(α) = H·diag(1, e^{−iα})`, the gate one measured vertex applies.
    J { qubit: usize, angle: u8 },
    Cz { a: usize, b: usize },
}

/// The computation a pattern implements, written as a gate list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
    /// Readout angle per logical qubit.
    pub readout: Vec<u8>,
}

impl LogicalCircuit {
    /// Exact readout distribution; outcome `j` of qubit `j` sits on bit `j`.
    pub fn output_distribution(&self) -> Result<Vec<f64>> {
        let mut state = StateVector::product(&vec![QubitState::plus_index(0); self.qubits])?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for gate in &self.gates {
            match *gate {
                Gate::J { qubit, angle } => {
                    let e = phase(8 - angle % 8);
                    let (p, m) = (Complex64::new(h, 0.0), e * h);
                    state.apply(qubit, [[p, m], [p, -m]]);
                }
                Gate::Cz { a, b } => state.cz(a, b),
            }
        }
        Ok((0..1usize << self.qubits)
            .map(|outcome| {
                let mut s = state.clone();
                let mut p = 1.0;
                for (q, &angle) in self.readout.iter().enumerate() {
                    let b = ((outcome >> q) & 1) as u8;
                    p *= s.xy_probability(q, angle, b);
                    if p > 0.0 {
                        s.project(q, angle, b);
                    }
                }
                p
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LibraryPattern {
    pub id: PatternId,
    pub graph: GraphSpec,
    pub pattern: MeasurementPattern,
    pub circuit: LogicalCircuit,
}

pub fn library(id: PatternId) -> LibraryPattern {
    let build = |vertices, edges: &[(usize, usize)], inputs: &[usize], outputs: &[usize], flow: &[(usize, usize)]| {
        GraphSpec::new(vertices, edges, inputs, outputs, flow).expect("library graph is valid")
    };
    let (graph, phi, dummies, traps, circuit) = match id {
        // 0-1-2 wire; dummy 3 shields trap 4 from the output
        PatternId::Teleport | PatternId::Rotation => {
            let graph = build(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[0], &[2], &[(0, 1), (1, 2)]);
            let (a0, a1, out) = if id == PatternId::Teleport { (0, 0, 1) } else { (2, 1, 0) };
            let circuit = LogicalCircuit {
                qubits: 1,
                gates: vec![Gate::J { qubit: 0, angle: a0 }, Gate::J { qubit: 0, angle: a1 }],
                readout: vec![out],
            };
            (graph, vec![a0, a1, out, 0, 0], vec![3], vec![4], circuit)
        }
        // wires 0→2 and 1→3, joined by 2-3; dummy 4 shields trap 5
        PatternId::Cz => {
            let graph = build(6, &[(0, 2), (1, 3), (2, 3), (3, 4), (4, 5)], &[0, 1], &[2, 3], &[(0, 2), (1, 3)]);
            let circuit = LogicalCircuit {
                qubits: 2,
                gates: vec![
                    Gate::J { qubit: 0, angle: 1 },
                    Gate::J { qubit: 1, angle: 3 },
                    Gate::Cz { a: 0, b: 1 },
                ],
                readout: vec![0, 2],
            };
            (graph, vec![1, 3, 0, 2, 0, 0], vec![4], vec![5], circuit)
        }
    };
    let pattern = MeasurementPattern::new(&graph, phi, &dummies, &traps).expect("library pattern is valid");
    LibraryPattern { id, graph, pattern, circuit }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teleport_readout_is_cos_squared() {
        let p = library(PatternId::Teleport).circuit.output_distribution().unwrap();
        let expected = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        assert!((p[0] - expected).abs() < 1e-12);
        assert!((p[1] - (1.0 - expected)).abs() < 1e-12);
    }

    #[test]
    fn distributions_are_normalized() {
        for id in PatternId::ALL {
            let p = library(id).circuit.output_distribution().unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{id}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for id in PatternId::ALL {
            assert_eq!(id.name().parse::<PatternId>().unwrap(), id);
        }
        assert!("toffoli".parse::<PatternId>().is_err());
    }
}
