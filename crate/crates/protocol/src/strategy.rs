//! Catalogued prover behaviours.

use std::fmt;
use std::str::FromStr;

use brsp_core::entcf::{self, Point, PreimagePair, PublicKey};
use brsp_core::linalg;
use brsp_core::qsim::{
    self, BinaryObservable, ClawSuperposition, DensityMatrix, MeasurementSpec, Povm, QubitBasis, QubitState,
};
use brsp_core::zq::EquationVector;
use brsp_core::SimRng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::wire::MeasureLabel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum StrategyKind {
    Honest,
    /// Honest, except every measurement challenge is answered with a σ_Z measurement.
    ZOnly,
    /// Well-formed commitment, uniformly random answers.
    RandomAnswer,
    /// Honest, except each preimage answer has its branch bit flipped with probability `rate`.
    PreimageDefector { rate: f64 },
}

impl StrategyKind {
    pub fn build(self) -> Box<dyn ProverStrategy> {
        match self {
            StrategyKind::Honest => Box::new(Honest::default()),
            StrategyKind::ZOnly => Box::new(ZOnly::default()),
            StrategyKind::RandomAnswer => Box::new(RandomAnswer),
            StrategyKind::PreimageDefector { rate } => Box::new(PreimageDefector { rate, inner: Honest::default() }),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = ProtocolError;
    /// `honest`, `zonly`, `random`, or `defector:RATE`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(StrategyKind::Honest),
            "zonly" => Ok(StrategyKind::ZOnly),
            "random" => Ok(StrategyKind::RandomAnswer),
            _ => {
                let rate = s
                    .strip_prefix("defector:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .filter(|r| (0.0..=1.0).contains(r))
                    .ok_or_else(|| ProtocolError::Config(format!("unknown prover `{s}`")))?;
                Ok(StrategyKind::PreimageDefector { rate })
            }
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Honest => f.write_str("honest"),
            StrategyKind::ZOnly => f.write_str("zonly"),
            StrategyKind::RandomAnswer => f.write_str("random"),
            StrategyKind::PreimageDefector { rate } => write!(f, "defector:{rate}"),
        }
    }
}

/// A prover's answers to each step of a round. The endpoint calls these in
/// protocol order; `measure` is used in direct mode, `measurement_spec` and
/// `buffer_state` in buffered mode.
pub trait ProverStrategy: Send {
    fn commit(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<Point, ProtocolError>;
    fn preimage(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<PreimagePair, ProtocolError>;
    fn equation(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<EquationVector, ProtocolError>;
    fn measure(&mut self, basis: QubitBasis, rng: &mut SimRng) -> Result<u8, ProtocolError>;
    fn measurement_spec(&mut self) -> MeasurementSpec;
    fn buffer_state(&mut self) -> Result<DensityMatrix, ProtocolError>;
    /// Buffered mode: the post-measurement state handed back by the buffer.
    fn absorb(&mut self, _state: DensityMatrix) {}
    /// The qubit held after the last equation, if the strategy keeps one.
    fn held_qubit(&self) -> Option<QubitState>;
}

fn observable_spec(pick: impl Fn(QubitBasis) -> QubitBasis) -> MeasurementSpec {
    let mut spec = MeasurementSpec::new();
    for label in MeasureLabel::ALL {
        let basis = pick(label.basis().expect("catalogued label"));
        let obs = BinaryObservable::new(basis.observable()).expect("Pauli observable");
        spec.insert(label.spec_key(), obs.to_povm());
    }
    spec
}

/// The honest prover: commits via the image-register collapse, answers
/// preimage requests by a computational-basis measurement and equations by a
/// Z₈ Fourier measurement, then measures the remaining qubit as asked.
#[derive(Default)]
pub struct Honest {
    claw: Option<ClawSuperposition>,
    qubit: Option<QubitState>,
}

impl Honest {
    fn qubit(&self) -> Result<QubitState, ProtocolError> {
        self.qubit.ok_or_else(|| ProtocolError::Malformed("measurement before equation".into()))
    }
}

impl ProverStrategy for Honest {
    fn commit(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<Point, ProtocolError> {
        let (y, claw) = qsim::commit(pk, rng)?;
        self.claw = Some(claw);
        self.qubit = None;
        Ok(y)
    }

    fn preimage(&mut self, _pk: &PublicKey, rng: &mut SimRng) -> Result<PreimagePair, ProtocolError> {
        let claw = self.claw.take().ok_or_else(|| ProtocolError::Malformed("preimage before commit".into()))?;
        let (b, x) = claw.measure_preimage(rng)?;
        Ok(PreimagePair { b, x })
    }

    fn equation(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<EquationVector, ProtocolError> {
        let claw = self.claw.take().ok_or_else(|| ProtocolError::Malformed("equation before commit".into()))?;
        let (d, q) = qsim::measure_equation(pk, &claw, rng)?;
        self.qubit = Some(q);
        Ok(d)
    }

    fn measure(&mut self, basis: QubitBasis, rng: &mut SimRng) -> Result<u8, ProtocolError> {
        let (bit, post) = qsim::measure_qubit(&self.qubit()?, basis, rng);
        self.qubit = Some(post);
        Ok(bit)
    }

    fn measurement_spec(&mut self) -> MeasurementSpec {
        observable_spec(|b| b)
    }

    fn buffer_state(&mut self) -> Result<DensityMatrix, ProtocolError> {
        Ok(self.qubit()?.to_density())
    }

    fn held_qubit(&self) -> Option<QubitState> {
        self.qubit
    }
}

#[derive(Default)]
pub struct ZOnly {
    inner: Honest,
}

impl ProverStrategy for ZOnly {
    fn commit(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<Point, ProtocolError> {
        self.inner.commit(pk, rng)
    }

    fn preimage(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<PreimagePair, ProtocolError> {
        self.inner.preimage(pk, rng)
    }

    fn equation(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<EquationVector, ProtocolError> {
        self.inner.equation(pk, rng)
    }

    fn measure(&mut self, _basis: QubitBasis, rng: &mut SimRng) -> Result<u8, ProtocolError> {
        self.inner.measure(QubitBasis::Z, rng)
    }

    fn measurement_spec(&mut self) -> MeasurementSpec {
        observable_spec(|_| QubitBasis::Z)
    }

    fn buffer_state(&mut self) -> Result<DensityMatrix, ProtocolError> {
        self.inner.buffer_state()
    }

    fn held_qubit(&self) -> Option<QubitState> {
        self.inner.held_qubit()
    }
}

pub struct RandomAnswer;

impl ProverStrategy for RandomAnswer {
    fn commit(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<Point, ProtocolError> {
        let b = rng.random_range(0..2u8);
        let x = pk.sample_domain(rng);
        Ok(entcf::eval(pk, b, &x)?)
    }

    fn preimage(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<PreimagePair, ProtocolError> {
        let b = rng.random_range(0..2u8);
        Ok(PreimagePair { b, x: pk.sample_domain(rng) })
    }

    fn equation(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<EquationVector, ProtocolError> {
        Ok(EquationVector::random(pk.width(), rng))
    }

    fn measure(&mut self, _basis: QubitBasis, rng: &mut SimRng) -> Result<u8, ProtocolError> {
        Ok(rng.random_range(0..2u8))
    }

    fn measurement_spec(&mut self) -> MeasurementSpec {
        let half = linalg::identity(2) * linalg::c(0.5, 0.0);
        let coin = Povm::new(vec![half.clone(), half]).expect("fair coin POVM");
        let mut spec = MeasurementSpec::new();
        for label in MeasureLabel::ALL {
            spec.insert(label.spec_key(), coin.clone());
        }
        spec
    }

    fn buffer_state(&mut self) -> Result<DensityMatrix, ProtocolError> {
        Ok(DensityMatrix::maximally_mixed(2))
    }

    fn held_qubit(&self) -> Option<QubitState> {
        None
    }
}

pub struct PreimageDefector {
    rate: f64,
    inner: Honest,
}

impl ProverStrategy for PreimageDefector {
    fn commit(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<Point, ProtocolError> {
        self.inner.commit(pk, rng)
    }

    fn preimage(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<PreimagePair, ProtocolError> {
        let mut p = self.inner.preimage(pk, rng)?;
        if rng.random::<f64>() < self.rate {
            p.b ^= 1;
        }
        Ok(p)
    }

    fn equation(&mut self, pk: &PublicKey, rng: &mut SimRng) -> Result<EquationVector, ProtocolError> {
        self.inner.equation(pk, rng)
    }

    fn measure(&mut self, basis: QubitBasis, rng: &mut SimRng) -> Result<u8, ProtocolError> {
        self.inner.measure(basis, rng)
    }

    fn measurement_spec(&mut self) -> MeasurementSpec {
        self.inner.measurement_spec()
    }

    fn buffer_state(&mut self) -> Result<DensityMatrix, ProtocolError> {
        self.inner.buffer_state()
    }

    fn held_qubit(&self) -> Option<QubitState> {
        self.inner.held_qubit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for k in [
            StrategyKind::Honest,
            StrategyKind::ZOnly,
            StrategyKind::RandomAnswer,
            StrategyKind::PreimageDefector { rate: 0.25 },
        ] {
            assert_eq!(k.to_string().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("defector:1.5".parse::<StrategyKind>().is_err());
        assert!("oracle".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn specs_cover_every_challenge() {
        for k in [StrategyKind::Honest, StrategyKind::ZOnly, StrategyKind::RandomAnswer] {
            let spec = k.build().measurement_spec();
            let keys: Vec<_> = spec.challenges().collect();
            assert_eq!(keys, ["X0", "X1", "X2", "X3", "Z"]);
        }
    }
}
