//! The prover's side of a session.

use brsp_core::entcf::PublicKey;
use brsp_core::qsim::QubitState;
use brsp_core::{SeedTree, SimRng};

use crate::error::ProtocolError;
use crate::strategy::{ProverStrategy, StrategyKind};
use crate::transport::FrameEndpoint;
use crate::wire::{self, spec_to_wire, Body, Message, WireMatrix};

/// Anything that can play the prover: maps each verifier message to the
/// prover's replies.
pub trait Responder: Send {
    fn respond(&mut self, msg: &Message) -> Result<Vec<Message>, ProtocolError>;
    /// The qubit the prover holds after an accepted session.
    fn final_qubit(&self) -> Option<QubitState>;
}

pub struct ProverEndpoint {
    strategy: Box<dyn ProverStrategy>,
    rng: SimRng,
    pk: Option<PublicKey>,
    buffered: bool,
    final_qubit: Option<QubitState>,
}

impl ProverEndpoint {
    pub fn new(strategy: StrategyKind, seed: u64) -> Self {
        Self::with_strategy(strategy.build(), seed)
    }

    pub fn with_strategy(strategy: Box<dyn ProverStrategy>, seed: u64) -> Self {
        ProverEndpoint {
            strategy,
            rng: SeedTree::new(seed).named("prover").rng(),
            pk: None,
            buffered: false,
            final_qubit: None,
        }
    }

    fn pk(&self) -> Result<&PublicKey, ProtocolError> {
        self.pk.as_ref().ok_or_else(|| ProtocolError::Malformed("challenge before key".into()))
    }
}

impl Responder for ProverEndpoint {
    fn respond(&mut self, msg: &Message) -> Result<Vec<Message>, ProtocolError> {
        let reply = |body| Message { session: msg.session, round: msg.round, body };
        let bodies = match &msg.body {
            Body::Start { .. } => vec![],
            Body::Key { key } => {
                let pk = wire::decode_key(key)?;
                let y = self.strategy.commit(&pk, &mut self.rng)?;
                self.pk = Some(pk);
                self.buffered = false;
                vec![Body::Commit { y }]
            }
            Body::RequestSpec {} => {
                self.buffered = true;
                vec![Body::MeasurementSpec { spec: spec_to_wire(&self.strategy.measurement_spec()) }]
            }
            Body::ChallengePreimage {} => {
                let pk = self.pk()?.clone();
                vec![Body::preimage(self.strategy.preimage(&pk, &mut self.rng)?)]
            }
            Body::RequestEquation {} => {
                let pk = self.pk()?.clone();
                let d = self.strategy.equation(&pk, &mut self.rng)?;
                let mut out = vec![Body::Equation { d }];
                if self.buffered {
                    let state = self.strategy.buffer_state()?;
                    out.push(Body::BufferState { state: WireMatrix::from_matrix(state.matrix()) });
                }
                out
            }
            Body::ChallengeMeasure { basis } => {
                vec![Body::Bit { bit: self.strategy.measure(basis.basis()?, &mut self.rng)? }]
            }
            Body::BufferResult { state, .. } => {
                self.strategy.absorb(state.to_density()?);
                vec![]
            }
            Body::Outcome { .. } => {
                self.final_qubit = self.strategy.held_qubit();
                vec![]
            }
            Body::Err { .. } => vec![],
            other => {
                return Err(ProtocolError::Unexpected { wanted: "a verifier message", got: other.name().to_owned() })
            }
        };
        Ok(bodies.into_iter().map(reply).collect())
    }

    fn final_qubit(&self) -> Option<QubitState> {
        self.final_qubit
    }
}

/// Runs a prover over `endpoint` until the session ends or the connection
/// fails, then closes the connection and hands the responder back.
pub fn serve(mut endpoint: FrameEndpoint, mut responder: Box<dyn Responder>) -> Box<dyn Responder> {
    while let Ok(frame) = endpoint.recv_frame() {
        let Ok(msg) = wire::decode(&frame) else { break };
        let Ok(replies) = responder.respond(&msg) else { break };
        let sent = replies.iter().try_for_each(|r| endpoint.send_frame(&wire::encode(r)?));
        if sent.is_err() || msg.body.is_terminal() {
            break;
        }
    }
    endpoint.close();
    responder
}
