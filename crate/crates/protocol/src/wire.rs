//! Messages and their JSON encoding.
//!
//! Every message is one JSON object `{session, round, type, payload}`. The
//! transport wraps each encoded object in a frame: a 4-byte big-endian length
//! followed by that many bytes of UTF-8 JSON.

use std::collections::BTreeMap;

use brsp_core::entcf::{self, Point, PreimagePair, PublicKey};
use brsp_core::linalg::{c, CMat};
use brsp_core::qsim::{DensityMatrix, MeasurementSpec, Povm, QubitBasis};
use brsp_core::zq::EquationVector;
use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::policy::AbortReason;

/// Largest accepted frame body.
pub const MAX_FRAME_BYTES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub session: u64,
    pub round: u64,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Body {
    /// Announces the maximum round count `N`.
    Start { max_rounds: u64 },
    /// Hex of the versioned binary key record.
    Key { key: String },
    Commit { y: Point },
    /// Buffered mode: asks for the measurement specification of step 3.
    RequestSpec {},
    MeasurementSpec { spec: WireSpec },
    ChallengePreimage {},
    Preimage { b: u8, x: Point },
    RequestEquation {},
    Equation { d: EquationVector },
    /// Buffered mode: the state the buffer will measure.
    BufferState { state: WireMatrix },
    ChallengeMeasure { basis: MeasureLabel },
    Bit { bit: u8 },
    /// Buffered mode: the challenge, the buffer's outcome and the post-measurement state.
    BufferResult { basis: MeasureLabel, outcome: u8, state: WireMatrix },
    Err { reason: ErrReason },
    /// End of a successful session. Carries nothing about the prepared state.
    Outcome { status: String },
}

impl Body {
    pub fn name(&self) -> &'static str {
        match self {
            Body::Start { .. } => "start",
            Body::Key { .. } => "key",
            Body::Commit { .. } => "commit",
            Body::RequestSpec {} => "request_spec",
            Body::MeasurementSpec { .. } => "measurement_spec",
            Body::ChallengePreimage {} => "challenge_preimage",
            Body::Preimage { .. } => "preimage",
            Body::RequestEquation {} => "request_equation",
            Body::Equation { .. } => "equation",
            Body::BufferState { .. } => "buffer_state",
            Body::ChallengeMeasure { .. } => "challenge_measure",
            Body::Bit { .. } => "bit",
            Body::BufferResult { .. } => "buffer_result",
            Body::Err { .. } => "err",
            Body::Outcome { .. } => "outcome",
        }
    }

    /// Whether the session ends after this message.
    pub fn is_terminal(&self) -> bool {
        matches!(self, Body::Err { .. } | Body::Outcome { .. })
    }

    pub fn key(pk: &PublicKey) -> Body {
        Body::Key { key: hex::encode(entcf::encode_public_key(pk)) }
    }

    pub fn preimage(p: PreimagePair) -> Body {
        Body::Preimage { b: p.b, x: p.x }
    }
}

/// Why the verifier sent `err`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrReason {
    Abort(AbortReason),
    Protocol { detail: String },
}

pub fn decode_key(hex_key: &str) -> Result<PublicKey, ProtocolError> {
    let bytes = hex::decode(hex_key).map_err(|e| ProtocolError::Malformed(format!("key hex: {e}")))?;
    Ok(entcf::decode_public_key(&bytes)?)
}

/// A measurement challenge: `"Z"` or a θ index in `{0,1,2,3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureLabel {
    Z(ZLabel),
    Theta(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZLabel {
    Z,
}

impl MeasureLabel {
    pub const ALL: [MeasureLabel; 5] = [
        MeasureLabel::Z(ZLabel::Z),
        MeasureLabel::Theta(0),
        MeasureLabel::Theta(1),
        MeasureLabel::Theta(2),
        MeasureLabel::Theta(3),
    ];

    pub fn basis(self) -> Result<QubitBasis, ProtocolError> {
        match self {
            MeasureLabel::Z(_) => Ok(QubitBasis::Z),
            MeasureLabel::Theta(t) if t < 4 => Ok(QubitBasis::X(t)),
            MeasureLabel::Theta(t) => Err(ProtocolError::Malformed(format!("θ index {t} out of range"))),
        }
    }

    pub fn from_basis(b: QubitBasis) -> Self {
        match b {
            QubitBasis::Z => MeasureLabel::Z(ZLabel::Z),
            QubitBasis::X(t) => MeasureLabel::Theta(t),
        }
    }

    /// Key used in a [`MeasurementSpec`]: `"Z"`, `"X0"`, …, `"X3"`.
    pub fn spec_key(self) -> String {
        match self {
            MeasureLabel::Z(_) => "Z".to_owned(),
            MeasureLabel::Theta(t) => format!("X{t}"),
        }
    }
}

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireMatrix {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WireMatrix {
    pub fn from_matrix(m: &CMat) -> Self {
        let dim = m.nrows();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for col in 0..dim {
                re.push(m[(r, col)].re);
                im.push(m[(r, col)].im);
            }
        }
        WireMatrix { dim, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat, ProtocolError> {
        let n = self.dim * self.dim;
        if self.dim == 0 || self.re.len() != n || self.im.len() != n {
            return Err(ProtocolError::Malformed(format!("matrix of dim {} has {} entries", self.dim, self.re.len())));
        }
        Ok(CMat::from_fn(self.dim, self.dim, |r, col| c(self.re[r * self.dim + col], self.im[r * self.dim + col])))
    }

    pub fn to_density(&self) -> Result<DensityMatrix, ProtocolError> {
        Ok(DensityMatrix::new(self.to_matrix()?)?)
    }
}

/// Measurement specification on the wire: challenge key to POVM effects.
pub type WireSpec = BTreeMap<String, Vec<WireMatrix>>;

pub fn spec_to_wire(spec: &MeasurementSpec) -> WireSpec {
    spec.challenges()
        .map(|k| {
            let povm = spec.get(k).expect("listed challenge");
            (k.to_owned(), povm.effects().iter().map(WireMatrix::from_matrix).collect())
        })
        .collect()
}

pub fn spec_from_wire(wire: &WireSpec) -> Result<MeasurementSpec, ProtocolError> {
    let mut spec = MeasurementSpec::new();
    for (k, effects) in wire {
        let effects = effects.iter().map(WireMatrix::to_matrix).collect::<Result<Vec<_>, _>>()?;
        spec.insert(k.clone(), Povm::new(effects)?);
    }
    Ok(spec)
}

pub fn encode(msg: &Message) -> Result<Vec<u8>, ProtocolError> {
    let bytes = serde_json::to_vec(msg)?;
    if bytes.len() > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: bytes.len(), limit: MAX_FRAME_BYTES });
    }
    Ok(bytes)
}

pub fn decode(bytes: &[u8]) -> Result<Message, ProtocolError> {
    if bytes.len() > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: bytes.len(), limit: MAX_FRAME_BYTES });
    }
    Ok(serde_json::from_slice(bytes)?)
}
