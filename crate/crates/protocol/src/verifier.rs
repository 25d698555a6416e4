//! The verifier's side: test rounds, the abort rule and the final round.

use std::collections::VecDeque;

use brsp_core::entcf::{self, EntcfError, FamilyKind, Inversion, Point, PreimagePair, PublicKey, Trapdoor};
use brsp_core::qsim::{self, DensityMatrix, MeasurementSpec};
use brsp_core::rigidity::qrac_bits;
use brsp_core::zq::{AngleOutcome, EquationVector};
use brsp_core::{SeedTree, SimRng};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Basis, BufferMode, ProtocolConfig};
use crate::error::ProtocolError;
use crate::policy::{AbortPolicy, AbortReason, Flag, Tally, TestKind};
use crate::prover::Responder;
use crate::transport::FrameEndpoint;
use crate::wire::{self, spec_from_wire, Body, ErrReason, MeasureLabel, Message, WireMatrix, ZLabel};

/// Byte-level connection from the verifier to a prover.
pub trait FrameLink {
    fn send_frame(&mut self, body: &[u8]) -> Result<(), ProtocolError>;
    fn recv_frame(&mut self) -> Result<Vec<u8>, ProtocolError>;
}

impl FrameLink for FrameEndpoint {
    fn send_frame(&mut self, body: &[u8]) -> Result<(), ProtocolError> {
        FrameEndpoint::send_frame(self, body)
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, ProtocolError> {
        FrameEndpoint::recv_frame(self)
    }
}

/// A prover called synchronously on the verifier's thread. Frames still go
/// through the wire encoding so transcripts match the threaded transports.
pub struct LocalLink {
    prover: Box<dyn Responder>,
    inbox: VecDeque<Vec<u8>>,
    closed: bool,
}

impl LocalLink {
    pub fn new(prover: Box<dyn Responder>) -> Self {
        LocalLink { prover, inbox: VecDeque::new(), closed: false }
    }

    pub fn into_prover(self) -> Box<dyn Responder> {
        self.prover
    }
}

impl FrameLink for LocalLink {
    fn send_frame(&mut self, body: &[u8]) -> Result<(), ProtocolError> {
        if self.closed {
            return Err(ProtocolError::Disconnected);
        }
        let replies = wire::decode(body).and_then(|m| self.prover.respond(&m));
        match replies {
            Ok(replies) => {
                for r in &replies {
                    self.inbox.push_back(wire::encode(r)?);
                }
            }
            Err(_) => self.closed = true,
        }
        Ok(())
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, ProtocolError> {
        self.inbox.pop_front().ok_or(ProtocolError::Disconnected)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToProver,
    ToVerifier,
}

/// One frame body as it crossed the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub direction: Direction,
    pub json: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Challenge {
    Preimage,
    Measure { basis: MeasureLabel },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Response {
    Preimage { b: u8, x: Point },
    Measurement { d: EquationVector, bit: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: u64,
    pub g: u8,
    pub y: Point,
    /// The verifier's `(θ̂, v̂)`; only computed for `G = 0` measurement tests.
    pub angle: Option<AngleOutcome>,
    pub kind: TestKind,
    pub challenge: Challenge,
    pub response: Response,
    pub flag: Flag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestChoice {
    Preimage,
    ZMeasurement,
    XMeasurement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaChoice {
    /// `θ = θ̂` whenever `θ̂` is defined.
    MatchHat,
    Index(u8),
}

/// Overrides for the verifier's coins in a single round; used to drive a
/// round into a specific branch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundForcing {
    pub g: Option<u8>,
    pub test: Option<TestChoice>,
    pub theta: Option<ThetaChoice>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrCause {
    Abort(AbortReason),
    /// The final equation fell outside a good set, so `θ̂` is undefined.
    OutsideGoodSet,
    NoPreimage,
    Transport { detail: String },
    Protocol { detail: String },
    Buffer { detail: String },
}

impl From<&ProtocolError> for ErrCause {
    fn from(e: &ProtocolError) -> Self {
        let detail = e.to_string();
        match e {
            ProtocolError::Io(_) | ProtocolError::Disconnected => ErrCause::Transport { detail },
            ProtocolError::Buffer(_) | ProtocolError::Qsim(_) => ErrCause::Buffer { detail },
            _ => ErrCause::Protocol { detail },
        }
    }
}

/// The verifier's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum RspOutcome {
    /// `W = Z`: the prover should hold `|b⟩`.
    Z { b: u8 },
    /// `W = X`: the prover should hold `|+_{θπ/4}⟩`.
    X { theta: u8 },
    Err { cause: ErrCause },
}

impl RspOutcome {
    pub fn is_err(&self) -> bool {
        matches!(self, RspOutcome::Err { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalRecord {
    pub kind: FamilyKind,
    pub y: Point,
    pub d: EquationVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session: u64,
    pub config: ProtocolConfig,
    /// The privately sampled `R`.
    pub planned_rounds: u64,
    pub rounds: Vec<RoundRecord>,
    pub tally: Tally,
    pub final_round: Option<FinalRecord>,
    pub outcome: RspOutcome,
    pub frames: Vec<FrameRecord>,
}

impl Transcript {
    /// Every frame in order, each prefixed with a direction byte (`>` to the
    /// prover, `<` from it) and terminated by a newline.
    pub fn frame_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for f in &self.frames {
            out.push(if f.direction == Direction::ToProver { b'>' } else { b'<' });
            out.extend_from_slice(f.json.as_bytes());
            out.push(b'\n');
        }
        out
    }
}

/// The ideal measurement buffer: holds the prover's declared measurements and
/// state, and measures on the verifier's challenge.
struct MeasurementBuffer {
    rng: SimRng,
    spec: Option<MeasurementSpec>,
    state: Option<DensityMatrix>,
}

impl MeasurementBuffer {
    fn load_spec(&mut self, spec: MeasurementSpec) -> Result<(), ProtocolError> {
        for label in MeasureLabel::ALL {
            let key = label.spec_key();
            let povm = spec.get(&key).ok_or_else(|| ProtocolError::Buffer(format!("no measurement for `{key}`")))?;
            if povm.effects().len() != 2 {
                return Err(ProtocolError::Buffer(format!("measurement `{key}` is not binary")));
            }
        }
        self.spec = Some(spec);
        Ok(())
    }

    fn measure(&mut self, label: MeasureLabel) -> Result<(u8, DensityMatrix), ProtocolError> {
        let spec = self.spec.as_ref().ok_or_else(|| ProtocolError::Buffer("no specification".into()))?;
        let state = self.state.take().ok_or_else(|| ProtocolError::Buffer("no state".into()))?;
        let (outcome, post) = qsim::buffer_evaluate(spec, &state, &label.spec_key(), &mut self.rng)?;
        Ok((outcome as u8, post))
    }
}

struct Coins {
    g: u8,
    test: TestChoice,
    theta: u8,
}

impl Coins {
    /// Draws every coin of a round up front so that forcing one branch never
    /// shifts the randomness of another.
    fn draw(rng: &mut SimRng, forcing: &RoundForcing) -> Self {
        let g = rng.random_range(0..2u8);
        let preimage = rng.random_bool(0.5);
        let z = rng.random_bool(0.5);
        let theta = rng.random_range(0..4u8);
        let test = match (preimage, z) {
            (true, _) => TestChoice::Preimage,
            (false, true) => TestChoice::ZMeasurement,
            (false, false) => TestChoice::XMeasurement,
        };
        Coins { g: forcing.g.unwrap_or(g), test: forcing.test.unwrap_or(test), theta }
    }
}

pub struct Verifier<'a> {
    cfg: ProtocolConfig,
    session: u64,
    tree: SeedTree,
    link: &'a mut dyn FrameLink,
    buffer: MeasurementBuffer,
    frames: Vec<FrameRecord>,
    rounds: Vec<RoundRecord>,
    tally: Tally,
    final_round: Option<FinalRecord>,
}

/// Seeds the session id and the verifier's streams from a root seed.
pub fn session_id(seed: u64) -> u64 {
    SeedTree::new(seed).named("session").value()
}

impl<'a> Verifier<'a> {
    pub fn new(cfg: ProtocolConfig, link: &'a mut dyn FrameLink) -> Self {
        let root = SeedTree::new(cfg.seed);
        Verifier {
            cfg,
            session: session_id(cfg.seed),
            tree: root.named("verifier"),
            link,
            buffer: MeasurementBuffer { rng: root.named("buffer").rng(), spec: None, state: None },
            frames: Vec::new(),
            rounds: Vec::new(),
            tally: Tally::default(),
            final_round: None,
        }
    }

    fn send(&mut self, round: u64, body: Body) -> Result<(), ProtocolError> {
        let bytes = wire::encode(&Message { session: self.session, round, body })?;
        self.frames.push(FrameRecord {
            direction: Direction::ToProver,
            json: String::from_utf8(bytes.clone()).expect("JSON is UTF-8"),
        });
        self.link.send_frame(&bytes)
    }

    fn recv(&mut self, round: u64) -> Result<Body, ProtocolError> {
        let bytes = self.link.recv_frame()?;
        let json = String::from_utf8(bytes).map_err(|_| ProtocolError::Malformed("frame is not UTF-8".into()))?;
        let msg = wire::decode(json.as_bytes());
        self.frames.push(FrameRecord { direction: Direction::ToVerifier, json });
        let msg = msg?;
        if msg.session != self.session || msg.round != round {
            return Err(ProtocolError::Malformed(format!(
                "frame for session {} round {} during session {} round {round}",
                msg.session, msg.round, self.session
            )));
        }
        Ok(msg.body)
    }

    /// Runs the whole protocol: `R` test rounds, the abort rule, then the final round.
    pub fn run(mut self) -> Transcript {
        let mut rng = self.tree.named("rounds").rng();
        let planned = rng.random_range(1..=self.cfg.max_rounds);
        let outcome = match self.run_inner(planned) {
            Ok(outcome) => outcome,
            Err(e) => {
                let cause = ErrCause::from(&e);
                let _ = self.send(0, Body::Err { reason: ErrReason::Protocol { detail: e.to_string() } });
                RspOutcome::Err { cause }
            }
        };
        Transcript {
            session: self.session,
            config: self.cfg,
            planned_rounds: planned,
            rounds: self.rounds,
            tally: self.tally,
            final_round: self.final_round,
            outcome,
            frames: self.frames,
        }
    }

    fn run_inner(&mut self, planned: u64) -> Result<RspOutcome, ProtocolError> {
        self.send(0, Body::Start { max_rounds: self.cfg.max_rounds })?;
        for i in 1..=planned {
            let record = self.test_round(i, &RoundForcing::default())?;
            self.tally.record(record.kind, record.flag);
            self.rounds.push(record);
        }
        if let Some(reason) = AbortPolicy::new(self.cfg.delta).evaluate(&self.tally) {
            self.send(planned + 1, Body::Err { reason: ErrReason::Abort(reason) })?;
            return Ok(RspOutcome::Err { cause: ErrCause::Abort(reason) });
        }
        self.final_round(planned + 1)
    }

    fn keys(&self, round: u64, kind: FamilyKind) -> Result<(PublicKey, Trapdoor), ProtocolError> {
        let seed = self.tree.child(round).named("key").value();
        Ok(entcf::gen(kind, &self.cfg.backend_params(), seed)?)
    }

    /// Sends a key and collects the commitment, plus the buffered-mode specification.
    fn open_round(&mut self, round: u64, pk: &PublicKey) -> Result<Point, ProtocolError> {
        self.send(round, Body::key(pk))?;
        let y = match self.recv(round)? {
            Body::Commit { y } => y,
            other => return Err(unexpected("commit", &other)),
        };
        if self.cfg.buffer_mode == BufferMode::Buffered {
            self.send(round, Body::RequestSpec {})?;
            match self.recv(round)? {
                Body::MeasurementSpec { spec } => self.buffer.load_spec(spec_from_wire(&spec)?)?,
                other => return Err(unexpected("measurement_spec", &other)),
            }
        }
        Ok(y)
    }

    fn request_equation(&mut self, round: u64, pk: &PublicKey) -> Result<EquationVector, ProtocolError> {
        self.send(round, Body::RequestEquation {})?;
        let d = match self.recv(round)? {
            Body::Equation { d } => d,
            other => return Err(unexpected("equation", &other)),
        };
        if d.len() != pk.width() {
            return Err(ProtocolError::Malformed(format!("equation of length {}, key width {}", d.len(), pk.width())));
        }
        if self.cfg.buffer_mode == BufferMode::Buffered {
            match self.recv(round)? {
                Body::BufferState { state } => self.buffer.state = Some(state.to_density()?),
                other => return Err(unexpected("buffer_state", &other)),
            }
        }
        Ok(d)
    }

    fn measurement(&mut self, round: u64, label: MeasureLabel) -> Result<u8, ProtocolError> {
        match self.cfg.buffer_mode {
            BufferMode::Direct => {
                self.send(round, Body::ChallengeMeasure { basis: label })?;
                match self.recv(round)? {
                    Body::Bit { bit } if bit < 2 => Ok(bit),
                    other => Err(unexpected("bit", &other)),
                }
            }
            BufferMode::Buffered => {
                let (outcome, post) = self.buffer.measure(label)?;
                let state = WireMatrix::from_matrix(post.matrix());
                self.send(round, Body::BufferResult { basis: label, outcome, state })?;
                Ok(outcome)
            }
        }
    }

    /// One qubit preparation test.
    pub fn test_round(&mut self, round: u64, forcing: &RoundForcing) -> Result<RoundRecord, ProtocolError> {
        let mut rng = self.tree.child(round).rng();
        let coins = Coins::draw(&mut rng, forcing);
        let kind = if coins.g == 0 { FamilyKind::ClawFree } else { FamilyKind::Injective };
        let (pk, td) = self.keys(round, kind)?;
        let y = self.open_round(round, &pk)?;
        let inversion = invert_or_none(&td, &pk, &y)?;

        if coins.test == TestChoice::Preimage {
            self.send(round, Body::ChallengePreimage {})?;
            let answer = match self.recv(round)? {
                Body::Preimage { b, x } => PreimagePair { b, x },
                other => return Err(unexpected("preimage", &other)),
            };
            let flag = preimage_flag(inversion.as_ref(), &answer);
            return Ok(RoundRecord {
                index: round,
                g: coins.g,
                y,
                angle: None,
                kind: TestKind::Preimage,
                challenge: Challenge::Preimage,
                response: Response::Preimage { b: answer.b, x: answer.x },
                flag,
            });
        }

        let d = self.request_equation(round, &pk)?;
        let angle = match (&inversion, coins.g) {
            (Some(_), 0) => entcf::extract_angle(&td, &pk, &y, &d)?,
            _ => None,
        };
        let (label, kind, expected) = if coins.test == TestChoice::ZMeasurement {
            let expected = match (coins.g, &inversion) {
                (1, Some(Inversion::Injective { b, .. })) => Some(Some(*b)),
                // no preimage: b̂ is undefined and no answer can match it
                (1, _) => Some(None),
                _ => None,
            };
            (MeasureLabel::Z(ZLabel::Z), TestKind::ZMeas, expected)
        } else {
            let theta = match (forcing.theta, angle) {
                (Some(ThetaChoice::MatchHat), Some(a)) => a.theta_hat,
                (Some(ThetaChoice::Index(t)), _) => t % 4,
                _ => coins.theta,
            };
            let (kind, expected) = x_test(coins.g, angle, theta);
            (MeasureLabel::Theta(theta), kind, expected.map(Some))
        };
        let bit = self.measurement(round, label)?;
        let flag = match expected {
            Some(e) if e != Some(bit) => kind.failure().expect("checked kinds can fail"),
            _ => Flag::Pass,
        };
        Ok(RoundRecord {
            index: round,
            g: coins.g,
            y,
            angle,
            kind,
            challenge: Challenge::Measure { basis: label },
            response: Response::Measurement { d, bit },
            flag,
        })
    }

    fn final_round(&mut self, round: u64) -> Result<RspOutcome, ProtocolError> {
        let kind = match self.cfg.basis {
            Basis::Z => FamilyKind::Injective,
            Basis::X => FamilyKind::ClawFree,
        };
        let (pk, td) = self.keys(round, kind)?;
        let y = self.open_round(round, &pk)?;
        let d = self.request_equation(round, &pk)?;
        self.final_round = Some(FinalRecord { kind, y: y.clone(), d: d.clone() });
        let outcome = match invert_or_none(&td, &pk, &y)? {
            None => RspOutcome::Err { cause: ErrCause::NoPreimage },
            Some(Inversion::Injective { b, .. }) => RspOutcome::Z { b },
            Some(Inversion::Claw { .. }) => match entcf::extract_angle(&td, &pk, &y, &d)? {
                Some(a) => RspOutcome::X { theta: a.index() },
                None => RspOutcome::Err { cause: ErrCause::OutsideGoodSet },
            },
        };
        let body = match &outcome {
            RspOutcome::Err { cause } => Body::Err { reason: ErrReason::Protocol { detail: format!("{cause:?}") } },
            _ => Body::Outcome { status: "accept".into() },
        };
        self.send(round, body)?;
        Ok(outcome)
    }
}

fn unexpected(wanted: &'static str, got: &Body) -> ProtocolError {
    ProtocolError::Unexpected { wanted, got: got.name().to_owned() }
}

fn invert_or_none(td: &Trapdoor, pk: &PublicKey, y: &Point) -> Result<Option<Inversion>, ProtocolError> {
    match entcf::invert(td, pk, y) {
        Ok(inv) => Ok(Some(inv)),
        Err(EntcfError::NoPreimage | EntcfError::BadDomainPoint) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Preimage test: for a claw-free key the answer must equal `x̂_b`; for an
/// injective key it must equal `(b̂, x̂)`. A commitment without preimages fails.
pub fn preimage_flag(inversion: Option<&Inversion>, answer: &PreimagePair) -> Flag {
    let ok = match inversion {
        Some(Inversion::Claw { x0, x1 }) => match answer.b {
            0 => answer.x == *x0,
            1 => answer.x == *x1,
            _ => false,
        },
        Some(Inversion::Injective { b, x }) => answer.b == *b && answer.x == *x,
        None => false,
    };
    if ok {
        Flag::Pass
    } else {
        Flag::FailP
    }
}

/// Classifies an `X_θ` test and returns the bit the prover must answer, if any.
/// Part A: `θ = θ̂`, expect `v̂`. Part B: `θ ∈ {0,2}`, `θ̂ ∈ {1,3}`, expect bit
/// `θ` of the QRAC input `u = θ̂ + 4v̂`.
pub fn x_test(g: u8, angle: Option<AngleOutcome>, theta: u8) -> (TestKind, Option<u8>) {
    let Some(a) = angle.filter(|_| g == 0) else {
        return (TestKind::Vacuous, None);
    };
    if theta == a.theta_hat {
        (TestKind::XMeasA, Some(a.v_hat))
    } else if theta % 2 == 0 && a.theta_hat % 2 == 1 {
        let (u0, u2) = qrac_bits(a.index());
        (TestKind::XMeasB, Some(if theta == 0 { u0 } else { u2 }))
    } else {
        (TestKind::Vacuous, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use brsp_core::zq::theta_decompose;

    #[test]
    fn x_test_cases() {
        let a = |m| Some(theta_decompose(m));
        assert_eq!(x_test(1, a(5), 1), (TestKind::Vacuous, None));
        assert_eq!(x_test(0, None, 1), (TestKind::Vacuous, None));
        assert_eq!(x_test(0, a(5), 1), (TestKind::XMeasA, Some(1)));
        assert_eq!(x_test(0, a(2), 2), (TestKind::XMeasA, Some(0)));
        // u = 5: both encoded bits are 1
        assert_eq!(x_test(0, a(5), 0), (TestKind::XMeasB, Some(1)));
        assert_eq!(x_test(0, a(5), 2), (TestKind::XMeasB, Some(1)));
        // u = 1: both encoded bits are 0; u = 3: u₀ = 1, u₂ = 0
        assert_eq!(x_test(0, a(1), 0), (TestKind::XMeasB, Some(0)));
        assert_eq!(x_test(0, a(3), 0), (TestKind::XMeasB, Some(1)));
        assert_eq!(x_test(0, a(3), 2), (TestKind::XMeasB, Some(0)));
        // θ odd and different from θ̂, or θ̂ even and different from θ
        assert_eq!(x_test(0, a(1), 3), (TestKind::Vacuous, None));
        assert_eq!(x_test(0, a(2), 0), (TestKind::Vacuous, None));
    }

    #[test]
    fn preimage_checks() {
        let claw = Inversion::Claw { x0: Point::Word(26), x1: Point::Word(31) };
        let ans = |b, x| PreimagePair { b, x: Point::Word(x) };
        assert_eq!(preimage_flag(Some(&claw), &ans(0, 26)), Flag::Pass);
        assert_eq!(preimage_flag(Some(&claw), &ans(1, 31)), Flag::Pass);
        assert_eq!(preimage_flag(Some(&claw), &ans(1, 26)), Flag::FailP);
        assert_eq!(preimage_flag(Some(&claw), &ans(2, 26)), Flag::FailP);
        let inj = Inversion::Injective { b: 1, x: Point::Word(26) };
        assert_eq!(preimage_flag(Some(&inj), &ans(1, 26)), Flag::Pass);
        assert_eq!(preimage_flag(Some(&inj), &ans(0, 26)), Flag::FailP);
        assert_eq!(preimage_flag(None, &ans(0, 26)), Flag::FailP);
    }
}
