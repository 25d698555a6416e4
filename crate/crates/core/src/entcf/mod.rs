//! Extended trapdoor claw-free families.
//!
//! A key is either claw-free (`F`: `f_{k,0}` and `f_{k,1}` share a range and
//! every image has one preimage under each) or injective (`G`: the two ranges
//! are disjoint). Two backends implement the same interface:
//!
//! * [`Backend::Mock`] keys are built from a keyed permutation `π` of `w`-bit
//!   words. Claws are exact, which makes every protocol test deterministic.
//! * [`Backend::Lwe`] keys evaluate `A·x + b·u mod q` at toy dimensions. Claws
//!   are approximate and accepted by [`chk`] up to a noise bound.
//!
//! Mock keys offer no hardness whatsoever: the public key carries the shift
//! and the permutation key, since both are needed to evaluate `f_{k,1}`.

mod codec;
mod feistel;
mod lwe;
mod mock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_public_key, encode_public_key, KEY_FORMAT_VERSION};
pub use feistel::Feistel;
pub use lwe::{LweKey, LweParams, LweTrapdoor};
pub use mock::{MockKey, MockTrapdoor, Permutation};

use crate::seed::SeedTree;
use crate::zq::{self, AngleOutcome, BitString, EquationVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntcfError {
    #[error("unsupported parameters for the {backend:?} backend: {reason}")]
    UnsupportedParams { backend: Backend, reason: String },
    #[error("operation requires a {expected:?} key")]
    WrongKind { expected: FamilyKind },
    #[error("trapdoor does not belong to this key")]
    TrapdoorMismatch,
    #[error("domain point does not match the key's backend or shape")]
    BadDomainPoint,
    #[error("image has no preimage under this key")]
    NoPreimage,
    #[error("equation has length {actual}, key width is {expected}")]
    EquationLength { expected: usize, actual: usize },
    #[error("malformed key encoding: {0}")]
    Malformed(String),
    #[error(transparent)]
    Zq(#[from] zq::ZqError),
}

pub type Result<T, E = EntcfError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `F`: two preimages per image.
    ClawFree,
    /// `G`: disjoint ranges, one preimage per image.
    Injective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Lwe,
}

/// A domain or range element: a machine word (Mock) or a residue vector (Lwe).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Word(u64),
    Vector(Vec<u32>),
}

impl Point {
    pub fn as_word(&self) -> Option<u64> {
        match self {
            Point::Word(w) => Some(*w),
            Point::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[u32]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Word(_) => None,
        }
    }
}

/// The image `y` a prover commits to.
pub type Commitment = Point;

/// A claimed preimage `(b, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreimagePair {
    pub b: u8,
    pub x: Point,
}

/// Parameters selecting a backend and its dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendParams {
    /// `w`-bit domain.
    Mock { w: u32 },
    Lwe(LweParams),
}

impl BackendParams {
    pub fn backend(&self) -> Backend {
        match self {
            BackendParams::Mock { .. } => Backend::Mock,
            BackendParams::Lwe(_) => Backend::Lwe,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyBody {
    Mock(MockKey),
    Lwe(LweKey),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub kind: FamilyKind,
    pub body: KeyBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trapdoor {
    Mock(MockTrapdoor),
    Lwe(LweTrapdoor),
}

/// Result of trapdoor inversion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inversion {
    Claw { x0: Point, x1: Point },
    Injective { b: u8, x: Point },
}

impl PublicKey {
    pub fn backend(&self) -> Backend {
        match self.body {
            KeyBody::Mock(_) => Backend::Mock,
            KeyBody::Lwe(_) => Backend::Lwe,
        }
    }

    /// Width `w` of the binary encoding `J` of a domain element.
    pub fn width(&self) -> usize {
        match &self.body {
            KeyBody::Mock(k) => k.width as usize,
            KeyBody::Lwe(k) => k.params.width(),
        }
    }

    /// Uniform domain element.
    pub fn sample_domain<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.body {
            KeyBody::Mock(k) => Point::Word(k.sample_domain(rng)),
            KeyBody::Lwe(k) => Point::Vector(k.sample_domain(rng)),
        }
    }

    /// `J(x)`, LSB-first.
    pub fn encode_domain(&self, x: &Point) -> Result<BitString> {
        match (&self.body, x) {
            (KeyBody::Mock(k), Point::Word(x)) => Ok(zq::j_encode(*x, k.width as usize)?),
            (KeyBody::Lwe(k), Point::Vector(x)) => k.encode_domain(x),
            _ => Err(EntcfError::BadDomainPoint),
        }
    }
}

/// Samples a key pair; deterministic in `seed`.
pub fn gen(kind: FamilyKind, params: &BackendParams, seed: u64) -> Result<(PublicKey, Trapdoor)> {
    let mut rng = SeedTree::new(seed).named("entcf-gen").rng();
    match params {
        BackendParams::Mock { w } => {
            let (key, td) = mock::generate(kind, *w, &mut rng)?;
            Ok((PublicKey { kind, body: KeyBody::Mock(key) }, Trapdoor::Mock(td)))
        }
        BackendParams::Lwe(p) => {
            let (key, td) = lwe::generate(kind, *p, &mut rng)?;
            Ok((PublicKey { kind, body: KeyBody::Lwe(key) }, Trapdoor::Lwe(td)))
        }
    }
}

/// Transparent Mock key (`π` = identity) for golden-vector tests.
#[cfg(any(test, feature = "test-vectors"))]
pub fn transparent_mock(kind: FamilyKind, w: u32, shift: u64) -> Result<(PublicKey, Trapdoor)> {
    let (key, td) = mock::transparent(kind, w, shift)?;
    Ok((PublicKey { kind, body: KeyBody::Mock(key) }, Trapdoor::Mock(td)))
}

/// `f_{k,b}(x)`.
pub fn eval(pk: &PublicKey, b: u8, x: &Point) -> Result<Point> {
    if b > 1 {
        return Err(EntcfError::BadDomainPoint);
    }
    match (&pk.body, x) {
        (KeyBody::Mock(k), Point::Word(x)) => Ok(Point::Word(k.eval(pk.kind, b, *x)?)),
        (KeyBody::Lwe(k), Point::Vector(x)) => Ok(Point::Vector(k.eval(b, x)?)),
        _ => Err(EntcfError::BadDomainPoint),
    }
}

/// Whether `(b, x)` is a preimage of `y`: exact for Mock, within the noise
/// bound in every coordinate for Lwe.
pub fn chk(pk: &PublicKey, b: u8, x: &Point, y: &Point) -> bool {
    if b > 1 {
        return false;
    }
    match (&pk.body, x, y) {
        (KeyBody::Mock(k), Point::Word(x), Point::Word(y)) => k.eval(pk.kind, b, *x).is_ok_and(|v| v == *y),
        (KeyBody::Lwe(k), Point::Vector(x), Point::Vector(y)) => k.check(b, x, y),
        _ => false,
    }
}

fn match_trapdoor(t: &Trapdoor, pk: &PublicKey) -> Result<()> {
    let ok = match (t, &pk.body) {
        (Trapdoor::Mock(t), KeyBody::Mock(k)) => t.matches(k),
        (Trapdoor::Lwe(t), KeyBody::Lwe(k)) => t.params == k.params,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(EntcfError::TrapdoorMismatch)
    }
}

/// Trapdoor inversion: both preimages for `F` keys, the unique one for `G` keys.
pub fn invert(t: &Trapdoor, pk: &PublicKey, y: &Point) -> Result<Inversion> {
    match_trapdoor(t, pk)?;
    match (t, &pk.body) {
        (Trapdoor::Mock(td), KeyBody::Mock(k)) => mock::invert(td, k, pk.kind, y),
        (Trapdoor::Lwe(td), KeyBody::Lwe(k)) => lwe::invert(td, k, pk.kind, y),
        _ => unreachable!("checked by match_trapdoor"),
    }
}

/// All preimages of `y`, found without the trapdoor. This is the simulator's
/// stand-in for the collapse of the prover's superposition when it measures
/// the image register; at desk scale it is a permutation inverse (Mock) or an
/// exhaustive search (Lwe).
pub fn preimages_public(pk: &PublicKey, y: &Point) -> Vec<PreimagePair> {
    match (&pk.body, y) {
        (KeyBody::Mock(k), Point::Word(y)) => mock::preimages(k, pk.kind, *y),
        (KeyBody::Lwe(k), Point::Vector(y)) => lwe::preimages(k, y),
        _ => Vec::new(),
    }
}

/// Membership of `d` in the good set `G_{k,b,x}`.
pub fn g_set_membership(t: &Trapdoor, pk: &PublicKey, b: u8, x: &Point, d: &EquationVector) -> Result<bool> {
    if pk.kind != FamilyKind::ClawFree {
        return Err(EntcfError::WrongKind { expected: FamilyKind::ClawFree });
    }
    match_trapdoor(t, pk)?;
    if d.len() != pk.width() {
        return Err(EntcfError::EquationLength { expected: pk.width(), actual: d.len() });
    }
    match (t, &pk.body, x) {
        (Trapdoor::Mock(td), KeyBody::Mock(k), Point::Word(_)) => Ok(mock::g_set(td, k, d)),
        (Trapdoor::Lwe(_), KeyBody::Lwe(k), Point::Vector(x)) => k.g_set(b, x, d),
        _ => Err(EntcfError::BadDomainPoint),
    }
}

/// The verifier's angle `(θ̂, v̂)` for image `y` and equation `d`; `None` (⊥)
/// when `d` falls outside either good set.
pub fn extract_angle(t: &Trapdoor, pk: &PublicKey, y: &Point, d: &EquationVector) -> Result<Option<AngleOutcome>> {
    if pk.kind != FamilyKind::ClawFree {
        return Err(EntcfError::WrongKind { expected: FamilyKind::ClawFree });
    }
    let Inversion::Claw { x0, x1 } = invert(t, pk, y)? else {
        return Err(EntcfError::WrongKind { expected: FamilyKind::ClawFree });
    };
    if !g_set_membership(t, pk, 0, &x0, d)? || !g_set_membership(t, pk, 1, &x1, d)? {
        return Ok(None);
    }
    let m = zq::relative_phase_mod8(d, &pk.encode_domain(&x0)?, &pk.encode_domain(&x1)?)?;
    Ok(Some(zq::theta_decompose(m)))
}

/// A candidate element `(b, x_b, d, θ̂, v̂)` of the set `H_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HkTuple {
    pub b: u8,
    pub x: Point,
    pub d: EquationVector,
    pub theta_hat: u8,
    pub v_hat: u8,
}

/// Whether the tuple lies in `H_k` for image `y`: `(b, x)` is the trapdoor
/// preimage of `y` on branch `b`, `d` is good for both preimages, and
/// `(θ̂, v̂)` is the extracted angle.
pub fn hk_membership(t: &Trapdoor, pk: &PublicKey, y: &Point, tuple: &HkTuple) -> Result<bool> {
    if !chk(pk, tuple.b, &tuple.x, y) {
        return Ok(false);
    }
    let Inversion::Claw { x0, x1 } = invert(t, pk, y)? else {
        return Err(EntcfError::WrongKind { expected: FamilyKind::ClawFree });
    };
    let expected_x = if tuple.b == 0 { x0 } else { x1 };
    if expected_x != tuple.x {
        return Ok(false);
    }
    Ok(extract_angle(t, pk, y, &tuple.d)?
        .is_some_and(|a| a.theta_hat == tuple.theta_hat && a.v_hat == tuple.v_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zq::{j_encode, theta_decompose};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn eq(v: &[u8]) -> EquationVector {
        EquationVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn transparent_golden_vectors() {
        let (pk, td) = transparent_mock(FamilyKind::ClawFree, 6, 5).unwrap();
        assert_eq!(eval(&pk, 1, &Point::Word(26)).unwrap(), Point::Word(31));
        assert_eq!(
            invert(&td, &pk, &Point::Word(26)).unwrap(),
            Inversion::Claw { x0: Point::Word(26), x1: Point::Word(31) }
        );
        assert!(chk(&pk, 1, &Point::Word(31), &Point::Word(26)));
        assert!(!chk(&pk, 0, &Point::Word(31), &Point::Word(26)));

        let d = eq(&[3, 1, 2, 0, 7, 5]);
        let angle = extract_angle(&td, &pk, &Point::Word(26), &d).unwrap().unwrap();
        assert_eq!(angle, AngleOutcome { theta_hat: 1, v_hat: 1 });
        assert!((angle.radians() - 5.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(extract_angle(&td, &pk, &Point::Word(26), &EquationVector::zeros(6)).unwrap(), None);

        let (gpk, gtd) = transparent_mock(FamilyKind::Injective, 6, 0).unwrap();
        let y = Point::Word(26 * 2 + 1);
        assert_eq!(invert(&gtd, &gpk, &y).unwrap(), Inversion::Injective { b: 1, x: Point::Word(26) });
    }

    #[test]
    fn hk_membership_examples() {
        let (pk, td) = transparent_mock(FamilyKind::ClawFree, 6, 5).unwrap();
        let y = Point::Word(26);
        let mut tuple = HkTuple { b: 1, x: Point::Word(31), d: eq(&[3, 1, 2, 0, 7, 5]), theta_hat: 1, v_hat: 1 };
        assert!(hk_membership(&td, &pk, &y, &tuple).unwrap());
        tuple.v_hat = 0;
        assert!(!hk_membership(&td, &pk, &y, &tuple).unwrap());
        tuple.v_hat = 1;
        tuple.d = EquationVector::zeros(6);
        assert!(!hk_membership(&td, &pk, &y, &tuple).unwrap());
    }

    #[test]
    fn g_set_examples() {
        let (pk, td) = gen(FamilyKind::ClawFree, &BackendParams::Mock { w: 16 }, 4).unwrap();
        let x = Point::Word(1234);
        assert!(!g_set_membership(&td, &pk, 0, &x, &EquationVector::zeros(16)).unwrap());
        assert!(g_set_membership(&td, &pk, 0, &x, &eq(&[1; 16])).unwrap());
        let (gpk, gtd) = gen(FamilyKind::Injective, &BackendParams::Mock { w: 16 }, 4).unwrap();
        assert!(matches!(
            g_set_membership(&gtd, &gpk, 0, &x, &eq(&[1; 16])),
            Err(EntcfError::WrongKind { .. })
        ));
    }

    #[test]
    fn mock_claws_from_random_keys() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for w in [6u32, 16, 40, 64] {
            let (pk, td) = gen(FamilyKind::ClawFree, &BackendParams::Mock { w }, u64::from(w)).unwrap();
            for _ in 0..1000 {
                let b = rng.random_range(0..2u8);
                let x = pk.sample_domain(&mut rng);
                let y = eval(&pk, b, &x).unwrap();
                let Inversion::Claw { x0, x1 } = invert(&td, &pk, &y).unwrap() else { panic!() };
                assert!(chk(&pk, 0, &x0, &y) && chk(&pk, 1, &x1, &y));
                assert_eq!(if b == 0 { &x0 } else { &x1 }, &x);
                assert_ne!(x0, x1);
                assert_eq!(preimages_public(&pk, &y).len(), 2);
            }
        }
    }

    #[test]
    fn mock_injective_ranges_are_disjoint() {
        for w in [6u32, 12] {
            let (pk, td) = gen(FamilyKind::Injective, &BackendParams::Mock { w }, 77).unwrap();
            let mut seen = std::collections::HashSet::new();
            for b in 0..2u8 {
                for x in 0..(1u64 << w) {
                    let y = eval(&pk, b, &Point::Word(x)).unwrap();
                    assert!(seen.insert(y.clone()), "two preimages for {y:?}");
                    assert_eq!(invert(&td, &pk, &y).unwrap(), Inversion::Injective { b, x: Point::Word(x) });
                }
            }
            assert_eq!(seen.len(), 1 << (w + 1));
        }
    }

    #[test]
    fn mock_width_limits() {
        assert!(gen(FamilyKind::ClawFree, &BackendParams::Mock { w: 65 }, 0).is_err());
        assert!(gen(FamilyKind::Injective, &BackendParams::Mock { w: 64 }, 0).is_err());
        assert!(gen(FamilyKind::ClawFree, &BackendParams::Mock { w: 0 }, 0).is_err());
        assert!(gen(FamilyKind::Injective, &BackendParams::Mock { w: 63 }, 0).is_ok());
    }

    #[test]
    fn gen_is_deterministic() {
        let p = BackendParams::Mock { w: 16 };
        assert_eq!(gen(FamilyKind::ClawFree, &p, 5).unwrap(), gen(FamilyKind::ClawFree, &p, 5).unwrap());
        assert_ne!(gen(FamilyKind::ClawFree, &p, 5).unwrap().0, gen(FamilyKind::ClawFree, &p, 6).unwrap().0);
        let l = BackendParams::Lwe(LweParams::desk());
        assert_eq!(gen(FamilyKind::ClawFree, &l, 5).unwrap(), gen(FamilyKind::ClawFree, &l, 5).unwrap());
    }

    #[test]
    fn swapping_labels_negates_the_angle() {
        let (pk, td) = gen(FamilyKind::ClawFree, &BackendParams::Mock { w: 16 }, 21).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let x = pk.sample_domain(&mut rng);
            let y = eval(&pk, 0, &x).unwrap();
            let d = EquationVector::random(16, &mut rng);
            let Inversion::Claw { x0, x1 } = invert(&td, &pk, &y).unwrap() else { panic!() };
            let (j0, j1) = (pk.encode_domain(&x0).unwrap(), pk.encode_domain(&x1).unwrap());
            let fwd = zq::relative_phase_mod8(&d, &j0, &j1).unwrap();
            let back = zq::relative_phase_mod8(&d, &j1, &j0).unwrap();
            assert_eq!((fwd + back) % 8, 0);
            if let Some(a) = extract_angle(&td, &pk, &y, &d).unwrap() {
                assert_eq!(a, theta_decompose(fwd));
            }
        }
    }

    #[test]
    fn lwe_claws_and_angles() {
        let params = BackendParams::Lwe(LweParams::desk());
        let (pk, td) = gen(FamilyKind::ClawFree, &params, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut defined = 0;
        for _ in 0..60 {
            let b = rng.random_range(0..2u8);
            let x = pk.sample_domain(&mut rng);
            let y = eval(&pk, b, &x).unwrap();
            let Inversion::Claw { x0, x1 } = invert(&td, &pk, &y).unwrap() else { panic!() };
            assert!(chk(&pk, 0, &x0, &y) && chk(&pk, 1, &x1, &y));
            assert_eq!(if b == 0 { &x0 } else { &x1 }, &x);
            let d = EquationVector::random(pk.width(), &mut rng);
            if extract_angle(&td, &pk, &y, &d).unwrap().is_some() {
                defined += 1;
            }
        }
        assert!(defined > 0);
    }

    #[test]
    fn lwe_injective_inversion() {
        let params = BackendParams::Lwe(LweParams::desk());
        let (pk, td) = gen(FamilyKind::Injective, &params, 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let b = rng.random_range(0..2u8);
            let x = pk.sample_domain(&mut rng);
            let y = eval(&pk, b, &x).unwrap();
            assert_eq!(invert(&td, &pk, &y).unwrap(), Inversion::Injective { b, x: x.clone() });
            assert_eq!(preimages_public(&pk, &y), vec![PreimagePair { b, x }]);
        }
    }

    #[test]
    fn lwe_encoding_width() {
        let (pk, _) = gen(FamilyKind::ClawFree, &BackendParams::Lwe(LweParams::desk()), 1).unwrap();
        assert_eq!(pk.width(), 15);
        let bits = pk.encode_domain(&Point::Vector(vec![16, 0, 1])).unwrap();
        assert_eq!(&bits.bits()[..5], j_encode(16, 5).unwrap().bits());
        assert_eq!(bits.bits()[10], 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn mock_roundtrip(seed in any::<u64>(), x in any::<u64>(), b in 0u8..2, injective in any::<bool>()) {
            let kind = if injective { FamilyKind::Injective } else { FamilyKind::ClawFree };
            let (pk, td) = gen(kind, &BackendParams::Mock { w: 20 }, seed).unwrap();
            let x = Point::Word(x & ((1 << 20) - 1));
            let y = eval(&pk, b, &x).unwrap();
            prop_assert!(chk(&pk, b, &x, &y));
            match invert(&td, &pk, &y).unwrap() {
                Inversion::Claw { x0, x1 } => prop_assert_eq!(if b == 0 { x0 } else { x1 }, x),
                Inversion::Injective { b: bb, x: xx } => { prop_assert_eq!(bb, b); prop_assert_eq!(xx, x); }
            }
        }
    }
}
