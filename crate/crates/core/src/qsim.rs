//! Exact simulation of the honest prover's states, small-dimension
//! adversarial states and measurements, and the measurement buffer.
//!
//! The honest prover is never simulated as a `2·2^w` vector. After committing
//! to `y` its state is the two-term superposition over the preimages of `y`;
//! measuring the preimage register in the Z₈ Fourier basis is simulated by
//! drawing `d` uniformly and writing the resulting relative phase onto the
//! remaining qubit, which has the same distribution.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entcf::{self, Commitment, EntcfError, Point, PublicKey};
use crate::linalg::{self, c, CMat, CVec};
use crate::zq::{self, EquationVector};

/// Largest Hilbert-space dimension accepted for adversarial states.
pub const MAX_DIM: usize = 16;

const NORM_TOL: f64 = 1e-12;
const MATRIX_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("dimension {0} exceeds the limit {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix has a negative eigenvalue {0}")]
    NotPsd(f64),
    #[error("trace {0} exceeds 1")]
    TraceTooLarge(f64),
    #[error("state has zero trace")]
    ZeroTrace,
    #[error("matrix does not square to the identity")]
    NotObservable,
    #[error("POVM effects do not sum to the identity")]
    IncompletePovm,
    #[error("POVM has no effects")]
    EmptyPovm,
    #[error("no measurement declared for challenge `{0}`")]
    MissingChallenge(String),
    #[error("dimension mismatch: {expected} vs {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state has no branch to measure")]
    EmptySuperposition,
    #[error(transparent)]
    Entcf(#[from] EntcfError),
}

pub type Result<T, E = QsimError> = std::result::Result<T, E>;

/// A pure single-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    amps: [Complex64; 2],
}

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let n = a0.norm_sqr() + a1.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QsimError::NotNormalized(n));
        }
        Ok(QubitState { amps: [a0, a1] })
    }

    /// `|b⟩`.
    pub fn basis(b: u8) -> Self {
        let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
        QubitState { amps: if b == 0 { [one, zero] } else { [zero, one] } }
    }

    /// `|+_φ⟩ = (|0⟩ + e^{iφ}|1⟩)/√2`.
    pub fn plus(phi: f64) -> Self {
        QubitState { amps: [c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, phi)] }
    }

    /// `|+_{kπ/4}⟩`.
    pub fn plus_index(k: u8) -> Self {
        Self::plus(f64::from(k % 8) * FRAC_PI_4)
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    pub fn to_vector(&self) -> CVec {
        CVec::from_column_slice(&self.amps)
    }

    /// Global phase removed: the first non-negligible amplitude is real and positive.
    pub fn canonical(&self) -> Self {
        let v = linalg::canonical_phase(&self.to_vector());
        QubitState { amps: [v[0], v[1]] }
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &QubitState) -> f64 {
        (self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]).norm_sqr()
    }

    /// `k` such that the state equals `|+_{kπ/4}⟩` up to global phase.
    pub fn plus_index_of(&self) -> Option<u8> {
        (0..8).find(|&k| self.overlap(&Self::plus_index(k)) > 1.0 - 1e-9)
    }

    /// `b` such that the state equals `|b⟩` up to global phase.
    pub fn basis_index_of(&self) -> Option<u8> {
        (0..2).find(|&b| self.overlap(&Self::basis(b)) > 1.0 - 1e-9)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { m: linalg::outer(&self.to_vector()) }
    }
}

/// Single-qubit measurement requested by the verifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitBasis {
    /// `σ_Z`; outcome 0 is `|0⟩`.
    Z,
    /// `σ_{X,θπ/4} = cos(θπ/4)σ_X + sin(θπ/4)σ_Y` for `θ ∈ {0,1,2,3}`; outcome 0 is `|+_{θπ/4}⟩`.
    X(u8),
}

impl QubitBasis {
    /// Post-measurement state for each outcome.
    pub fn eigenstates(self) -> [QubitState; 2] {
        match self {
            QubitBasis::Z => [QubitState::basis(0), QubitState::basis(1)],
            QubitBasis::X(theta) => [QubitState::plus_index(theta), QubitState::plus_index(theta + 4)],
        }
    }

    pub fn observable(self) -> CMat {
        match self {
            QubitBasis::Z => linalg::sigma_z(),
            QubitBasis::X(theta) => linalg::sigma_xy(f64::from(theta) * FRAC_PI_4),
        }
    }
}

/// Born-rule measurement of a qubit; returns the outcome and the eigenstate it collapses to.
pub fn measure_qubit<R: Rng + ?Sized>(q: &QubitState, basis: QubitBasis, rng: &mut R) -> (u8, QubitState) {
    let states = basis.eigenstates();
    let p0 = states[0].overlap(q);
    let bit = u8::from(rng.random::<f64>() >= p0);
    (bit, states[bit as usize])
}

/// The honest prover's state after committing to `y`:
/// `a₀|0⟩|x₀⟩ + a₁|1⟩|x₁⟩`, or a single branch for injective keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClawSuperposition {
    pub amp0: Complex64,
    pub amp1: Complex64,
    pub x0: Option<Point>,
    pub x1: Option<Point>,
}

impl ClawSuperposition {
    pub fn two_branch(x0: Point, x1: Point) -> Self {
        let a = c(FRAC_1_SQRT_2, 0.0);
        ClawSuperposition { amp0: a, amp1: a, x0: Some(x0), x1: Some(x1) }
    }

    pub fn single_branch(b: u8, x: Point) -> Self {
        let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
        if b == 0 {
            ClawSuperposition { amp0: one, amp1: zero, x0: Some(x), x1: None }
        } else {
            ClawSuperposition { amp0: zero, amp1: one, x0: None, x1: Some(x) }
        }
    }

    pub fn is_two_branch(&self) -> bool {
        self.x0.is_some() && self.x1.is_some()
    }

    /// Branch bit and preimage of a single-branch state.
    pub fn single(&self) -> Option<(u8, &Point)> {
        match (&self.x0, &self.x1) {
            (Some(x), None) => Some((0, x)),
            (None, Some(x)) => Some((1, x)),
            _ => None,
        }
    }

    /// Measures the branch register: `(b, x_b)` with probability `|a_b|²`.
    pub fn measure_preimage<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u8, Point)> {
        match (&self.x0, &self.x1) {
            (Some(x0), Some(x1)) => {
                if rng.random::<f64>() < self.amp0.norm_sqr() {
                    Ok((0, x0.clone()))
                } else {
                    Ok((1, x1.clone()))
                }
            }
            (Some(x0), None) => Ok((0, x0.clone())),
            (None, Some(x1)) => Ok((1, x1.clone())),
            (None, None) => Err(QsimError::EmptySuperposition),
        }
    }
}

/// Prepares the uniform superposition over `(b, x)`, evaluates the key and
/// measures the image register. The returned state is the exact
/// post-measurement state.
pub fn commit<R: Rng + ?Sized>(pk: &PublicKey, rng: &mut R) -> Result<(Commitment, ClawSuperposition)> {
    let b = rng.random_range(0..2u8);
    let x = pk.sample_domain(rng);
    let y = entcf::eval(pk, b, &x)?;
    let pre = entcf::preimages_public(pk, &y);
    let find = |bb: u8| pre.iter().find(|p| p.b == bb).map(|p| p.x.clone());
    let state = match (find(0), find(1)) {
        (Some(x0), Some(x1)) => ClawSuperposition::two_branch(x0, x1),
        _ => ClawSuperposition::single_branch(b, x),
    };
    Ok((y, state))
}

/// The qubit left after measuring the preimage register with Fourier outcome `d`.
pub fn equation_qubit(pk: &PublicKey, state: &ClawSuperposition, d: &EquationVector) -> Result<QubitState> {
    match (&state.x0, &state.x1) {
        (Some(x0), Some(x1)) => {
            let m = zq::relative_phase_mod8(d, &pk.encode_domain(x0)?, &pk.encode_domain(x1)?)
                .map_err(EntcfError::from)?;
            let phase = Complex64::from_polar(1.0, f64::from(m) * FRAC_PI_4);
            QubitState::new(state.amp0, state.amp1 * phase).map(|q| q.canonical())
        }
        (Some(_), None) => Ok(QubitState::basis(0)),
        (None, Some(_)) => Ok(QubitState::basis(1)),
        (None, None) => Err(QsimError::EmptySuperposition),
    }
}

/// Fourier-basis measurement of the preimage register: `d` uniform over Z₈^w.
/// For a single-branch state the qubit is the deterministic `|b⟩`.
pub fn measure_equation<R: Rng + ?Sized>(
    pk: &PublicKey,
    state: &ClawSuperposition,
    rng: &mut R,
) -> Result<(EquationVector, QubitState)> {
    let d = EquationVector::random(pk.width(), rng);
    let q = equation_qubit(pk, state, &d)?;
    Ok((d, q))
}

/// A possibly sub-normalized density matrix of dimension at most [`MAX_DIM`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
}

fn check_square(m: &CMat) -> Result<usize> {
    if !m.is_square() {
        return Err(QsimError::NotSquare);
    }
    if m.nrows() > MAX_DIM {
        return Err(QsimError::DimensionTooLarge(m.nrows()));
    }
    Ok(m.nrows())
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        if !linalg::is_hermitian(&m, MATRIX_TOL) {
            return Err(QsimError::NotHermitian);
        }
        let (vals, _) = linalg::hermitian_eigen(&m);
        if let Some(&min) = vals.first() {
            if min < -MATRIX_TOL {
                return Err(QsimError::NotPsd(min));
            }
        }
        let t = linalg::trace(&m).re;
        if t > 1.0 + MATRIX_TOL {
            return Err(QsimError::TraceTooLarge(t));
        }
        Ok(DensityMatrix { m })
    }

    pub fn from_pure(v: &CVec) -> Result<Self> {
        let n = v.norm_squared();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QsimError::NotNormalized(n));
        }
        Self::new(linalg::outer(v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { m: linalg::identity(d) / c(d as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.m).re
    }

    /// `Tr(Aρ)`.
    pub fn expectation(&self, a: &CMat) -> f64 {
        linalg::trace(&(a * &self.m)).re
    }
}

/// A Hermitian matrix squaring to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryObservable {
    m: CMat,
}

impl BinaryObservable {
    pub fn new(m: CMat) -> Result<Self> {
        let d = check_square(&m)?;
        if !linalg::is_hermitian(&m, MATRIX_TOL) {
            return Err(QsimError::NotHermitian);
        }
        if linalg::max_abs_diff(&(&m * &m), &linalg::identity(d)) > MATRIX_TOL {
            return Err(QsimError::NotObservable);
        }
        Ok(BinaryObservable { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// `(I + (−1)^outcome·O)/2`.
    pub fn projector(&self, outcome: u8) -> CMat {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        (linalg::identity(self.dim()) + &self.m * c(sign, 0.0)) * c(0.5, 0.0)
    }

    pub fn to_povm(&self) -> Povm {
        Povm { effects: vec![self.projector(0), self.projector(1)] }
    }
}

/// PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<CMat>,
}

impl Povm {
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let first = effects.first().ok_or(QsimError::EmptyPovm)?;
        let d = check_square(first)?;
        let mut sum = CMat::zeros(d, d);
        for e in &effects {
            if check_square(e)? != d {
                return Err(QsimError::DimensionMismatch { expected: d, actual: e.nrows() });
            }
            if !linalg::is_hermitian(e, MATRIX_TOL) {
                return Err(QsimError::NotHermitian);
            }
            let min = linalg::hermitian_eigen(e).0[0];
            if min < -MATRIX_TOL {
                return Err(QsimError::NotPsd(min));
            }
            sum += e;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d)) > MATRIX_TOL {
            return Err(QsimError::IncompletePovm);
        }
        Ok(Povm { effects })
    }

    /// Measurement in the computational basis of `C^d`.
    pub fn computational(d: usize) -> Self {
        Povm {
            effects: (0..d)
                .map(|i| {
                    let mut e = CMat::zeros(d, d);
                    e[(i, i)] = c(1.0, 0.0);
                    e
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }
}

/// What a prover declares to the buffer: one POVM per challenge it may receive.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeasurementSpec {
    entries: BTreeMap<String, Povm>,
}

impl MeasurementSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, challenge: impl Into<String>, povm: Povm) -> Self {
        self.entries.insert(challenge.into(), povm);
        self
    }

    pub fn insert(&mut self, challenge: impl Into<String>, povm: Povm) {
        self.entries.insert(challenge.into(), povm);
    }

    pub fn get(&self, challenge: &str) -> Option<&Povm> {
        self.entries.get(challenge)
    }

    pub fn challenges(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn is_projector(e: &CMat) -> bool {
    linalg::max_abs_diff(&(e * e), e) <= MATRIX_TOL
}

/// Born probabilities `Tr(E_r ρ)/Tr ρ` of a POVM on a state.
pub fn outcome_probabilities(povm: &Povm, rho: &DensityMatrix) -> Result<Vec<f64>> {
    if povm.dim() != rho.dim() {
        return Err(QsimError::DimensionMismatch { expected: povm.dim(), actual: rho.dim() });
    }
    let t = rho.trace();
    if t <= MATRIX_TOL {
        return Err(QsimError::ZeroTrace);
    }
    Ok(povm.effects().iter().map(|e| (rho.expectation(e) / t).max(0.0)).collect())
}

/// Applies the declared measurement for `challenge` to `ρ`: samples an
/// outcome and returns it with the Lüders post-state `√E ρ √E / Tr(Eρ)`.
/// Sub-normalized states are renormalized first.
pub fn buffer_evaluate<R: Rng + ?Sized>(
    spec: &MeasurementSpec,
    rho: &DensityMatrix,
    challenge: &str,
    rng: &mut R,
) -> Result<(usize, DensityMatrix)> {
    let povm = spec.get(challenge).ok_or_else(|| QsimError::MissingChallenge(challenge.to_owned()))?;
    let probs = outcome_probabilities(povm, rho)?;
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut outcome = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            outcome = i;
            break;
        }
        u -= p;
    }
    let e = &povm.effects()[outcome];
    let k = if is_projector(e) { e.clone() } else { linalg::psd_sqrt(e) };
    let post = &k * rho.matrix() * k.adjoint();
    let t = linalg::trace(&post).re;
    if t <= 0.0 {
        return Err(QsimError::ZeroTrace);
    }
    let post = post / c(t, 0.0);
    // symmetrize away rounding noise
    let post = (&post + post.adjoint()) * c(0.5, 0.0);
    Ok((outcome, DensityMatrix { m: post }))
}

/// Squared Uhlmann fidelity `(Tr √(√a·b·√a))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QsimError::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    let sa = linalg::psd_sqrt(a.matrix());
    let inner = &sa * b.matrix() * &sa;
    let root_trace: f64 = linalg::hermitian_eigen(&inner).0.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(root_trace * root_trace)
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QsimError::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&(a.matrix() - b.matrix())))
}
