//! Rigidity numerics: the 2↦1 QRAC value and its optimum, anticommutation
//! diagnostics, and extraction of a qubit isometry from a pair of binary
//! observables through the Jordan block structure of their projections.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c, CMat, CVec};
use crate::qsim::{BinaryObservable, DensityMatrix, QsimError, QubitState};
use crate::seed::SeedTree;

const EIGEN_CLUSTER_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error("vector ({0}, {1}, {2}) is not a unit Bloch vector")]
    NotUnit(f64, f64, f64),
    #[error("QRAC instances are single-qubit; got dimension {0}")]
    NotQubit(usize),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one state is required")]
    NoStates,
    #[error("dimension {0} is odd")]
    OddDimension(usize),
    #[error("dimension mismatch: {expected} vs {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state vector length {len} is not a multiple of {dim}")]
    StateShape { len: usize, dim: usize },
    #[error("matrix text: {0}")]
    Parse(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

pub type Result<T, E = RigidityError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if ((x * x + y * y + z * z).sqrt() - 1.0).abs() > 1e-10 {
            return Err(RigidityError::NotUnit(x, y, z));
        }
        Ok(BlochVector { x, y, z })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n < 1e-300 {
            return Err(RigidityError::NotUnit(x, y, z));
        }
        Ok(BlochVector { x: x / n, y: y / n, z: z / n })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n2 = v.iter().map(|a| a * a).sum::<f64>();
            if n2 > 1e-6 && n2 <= 1.0 {
                return Self::normalized(v[0], v[1], v[2]).expect("nonzero");
            }
        }
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    fn combine(&self, a: f64, o: &BlochVector, b: f64) -> [f64; 3] {
        [a * self.x + b * o.x, a * self.y + b * o.y, a * self.z + b * o.z]
    }

    /// `n·σ`.
    pub fn observable(&self) -> BinaryObservable {
        let m = linalg::sigma_x() * c(self.x, 0.0) + linalg::sigma_y() * c(self.y, 0.0) + linalg::sigma_z() * c(self.z, 0.0);
        BinaryObservable::new(m).expect("unit Bloch vectors give observables")
    }

    /// Bloch vector of a traceless single-qubit observable.
    pub fn of_observable(o: &BinaryObservable) -> Option<Self> {
        if o.dim() != 2 {
            return None;
        }
        let m = o.matrix();
        let x = linalg::trace(&(m * linalg::sigma_x())).re / 2.0;
        let y = linalg::trace(&(m * linalg::sigma_y())).re / 2.0;
        let z = linalg::trace(&(m * linalg::sigma_z())).re / 2.0;
        Self::new(x, y, z).ok()
    }

    /// The pure state `(I + n·σ)/2`.
    pub fn pure_state(&self) -> DensityMatrix {
        let m = (linalg::identity(2) + self.observable().matrix()) * c(0.5, 0.0);
        DensityMatrix::new(m).expect("pure state")
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Encodings indexed by `u ∈ {1,3,5,7}` plus the two decoding observables.
#[derive(Clone, Debug, PartialEq)]
pub struct QracInstance {
    pub encodings: [DensityMatrix; 4],
    pub x0: BinaryObservable,
    pub x2: BinaryObservable,
}

/// The odd elements of Z₈ used as QRAC inputs.
pub const QRAC_INPUTS: [u8; 4] = [1, 3, 5, 7];

/// The two encoded bits `(u₀, u₂)` of `u ∈ {1,3,5,7}`: `u₀ = 0` iff
/// `u ∈ {1,7}` and `u₂ = 0` iff `u ∈ {1,3}`.
pub fn qrac_bits(u: u8) -> (u8, u8) {
    (u8::from(!matches!(u, 1 | 7)), u8::from(!matches!(u, 1 | 3)))
}

impl QracInstance {
    pub fn new(encodings: [DensityMatrix; 4], x0: BinaryObservable, x2: BinaryObservable) -> Result<Self> {
        for d in encodings.iter().map(DensityMatrix::dim).chain([x0.dim(), x2.dim()]) {
            if d != 2 {
                return Err(RigidityError::NotQubit(d));
            }
        }
        Ok(QracInstance { encodings, x0, x2 })
    }

    /// Encodings `|+_{uπ/4}⟩`, `X₀ = σ_X`, `X₂ = σ_Y`.
    pub fn canonical() -> Self {
        let encodings = QRAC_INPUTS.map(|u| QubitState::plus(f64::from(u) * FRAC_PI_4).to_density());
        QracInstance {
            encodings,
            x0: BinaryObservable::new(linalg::sigma_x()).expect("σ_X"),
            x2: BinaryObservable::new(linalg::sigma_y()).expect("σ_Y"),
        }
    }

    /// For fixed observables, the best encoding of each `u` is the top
    /// eigenvector of `X₀^{u₀} + X₂^{u₂}`, or `I/2` when the top eigenvalue is
    /// degenerate (every state is then optimal).
    pub fn with_optimal_encodings(x0: BinaryObservable, x2: BinaryObservable) -> Result<Self> {
        if x0.dim() != 2 || x2.dim() != 2 {
            return Err(RigidityError::NotQubit(x0.dim().max(x2.dim())));
        }
        let encodings = QRAC_INPUTS.map(|u| {
            let (u0, u2) = qrac_bits(u);
            let m = x0.projector(u0) + x2.projector(u2);
            let (vals, vecs) = linalg::hermitian_eigen(&m);
            if (vals[1] - vals[0]).abs() < 1e-12 {
                DensityMatrix::maximally_mixed(2)
            } else {
                DensityMatrix::from_pure(&vecs.column(1).into_owned()).expect("unit eigenvector")
            }
        });
        Ok(QracInstance { encodings, x0, x2 })
    }

    pub fn from_bloch(n0: &BlochVector, n2: &BlochVector) -> Self {
        Self::with_optimal_encodings(n0.observable(), n2.observable()).expect("qubit observables")
    }
}

/// `¼ Σ_u Σ_{i∈{0,2}} ½ Tr(X_i^{u_i} φ_u)` with `X^{b} = (I + (−1)^b X)/2`.
pub fn qrac_success(inst: &QracInstance) -> f64 {
    let mut total = 0.0;
    for (phi, &u) in inst.encodings.iter().zip(&QRAC_INPUTS) {
        let (u0, u2) = qrac_bits(u);
        total += 0.5 * (phi.expectation(&inst.x0.projector(u0)) + phi.expectation(&inst.x2.projector(u2)));
    }
    total / 4.0
}

/// `½(1 + S/8)` with `S = 2‖v₀+v₂‖ + 2‖v₀−v₂‖`: the value reached by optimal
/// encodings for measurements with Bloch vectors `v₀`, `v₂`.
pub fn qrac_bound_from_bloch(v0: &BlochVector, v2: &BlochVector) -> f64 {
    let s = 2.0 * norm3(v0.combine(1.0, v2, 1.0)) + 2.0 * norm3(v0.combine(1.0, v2, -1.0));
    0.5 * (1.0 + s / 8.0)
}

/// `(1/|S|) Σ_{ρ∈S} Tr({X₀,X₂}² ρ)`.
pub fn anticommutator_score(x0: &BinaryObservable, x2: &BinaryObservable, states: &[DensityMatrix]) -> Result<f64> {
    if states.is_empty() {
        return Err(RigidityError::NoStates);
    }
    let d = x0.dim();
    if x2.dim() != d {
        return Err(RigidityError::DimensionMismatch { expected: d, actual: x2.dim() });
    }
    let anti = x0.matrix() * x2.matrix() + x2.matrix() * x0.matrix();
    let sq = &anti * &anti;
    let mut total = 0.0;
    for rho in states {
        if rho.dim() != d {
            return Err(RigidityError::DimensionMismatch { expected: d, actual: rho.dim() });
        }
        total += rho.expectation(&sq);
    }
    Ok(total / states.len() as f64)
}

#[derive(Clone, Debug)]
pub struct QracOptimum {
    pub success: f64,
    pub instance: QracInstance,
    pub trials: usize,
}

const REFINED_CANDIDATES: usize = 8;
const REFINE_STEPS: usize = 300;

/// Rotates `v` towards a random direction by at most `step` radians.
fn jitter<R: Rng + ?Sized>(v: &BlochVector, step: f64, rng: &mut R) -> BlochVector {
    let r = BlochVector::random(rng);
    let w = v.combine(1.0, &r, step);
    BlochVector::normalized(w[0], w[1], w[2]).unwrap_or(*v)
}

fn refine<R: Rng + ?Sized>(mut n0: BlochVector, mut n2: BlochVector, rng: &mut R) -> (f64, BlochVector, BlochVector) {
    let mut best = qrac_success(&QracInstance::from_bloch(&n0, &n2));
    let mut step = 0.5;
    for _ in 0..REFINE_STEPS {
        let (c0, c2) = (jitter(&n0, step, rng), jitter(&n2, step, rng));
        let v = qrac_success(&QracInstance::from_bloch(&c0, &c2));
        if v > best {
            (best, n0, n2) = (v, c0, c2);
        } else {
            step = (step * 0.97).max(1e-6);
        }
    }
    (best, n0, n2)
}

/// Random search over single-qubit instances: each trial draws two
/// measurement directions and uses optimal encodings for them; the best few
/// are then refined by a shrinking random local search.
pub fn qrac_optimize(trials: usize, seed: u64) -> Result<QracOptimum> {
    optimize(trials, seed, None)
}

/// As [`qrac_optimize`], with `start` evaluated as the first trial.
pub fn qrac_optimize_from(start: QracInstance, trials: usize, seed: u64) -> Result<QracOptimum> {
    optimize(trials, seed, Some(start))
}

fn optimize(trials: usize, seed: u64, start: Option<QracInstance>) -> Result<QracOptimum> {
    if trials == 0 {
        return Err(RigidityError::NoTrials);
    }
    let mut rng = SeedTree::new(seed).named("qrac-optimize").rng();
    let mut best: Option<(f64, QracInstance)> = None;
    let offer = |v: f64, inst: QracInstance, best: &mut Option<(f64, QracInstance)>| {
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            *best = Some((v, inst));
        }
    };
    let mut random_trials = trials;
    if let Some(inst) = start {
        offer(qrac_success(&inst), inst, &mut best);
        random_trials -= 1;
    }
    let mut candidates: Vec<(f64, BlochVector, BlochVector)> = Vec::with_capacity(random_trials);
    for _ in 0..random_trials {
        let (n0, n2) = (BlochVector::random(&mut rng), BlochVector::random(&mut rng));
        candidates.push((qrac_success(&QracInstance::from_bloch(&n0, &n2)), n0, n2));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (v, n0, n2) in candidates.iter().take(REFINED_CANDIDATES) {
        offer(*v, QracInstance::from_bloch(n0, n2), &mut best);
        let (rv, r0, r2) = refine(*n0, *n2, &mut rng);
        offer(rv, QracInstance::from_bloch(&r0, &r2), &mut best);
    }
    let (success, instance) = best.expect("at least one trial");
    Ok(QracOptimum { success, instance, trials })
}

/// Result of [`jordan_extract`].
#[derive(Clone, Debug)]
pub struct IsometryReport {
    /// `V : C^D → C² ⊗ C^m`, a `2m × D` matrix; row `a·m + j` is `|a⟩⊗|j⟩`.
    pub isometry: CMat,
    pub block_dim: usize,
    /// Eigenvalues of `PXP` on the `+1` eigenspace of `Z`, one per block.
    pub block_overlaps: Vec<f64>,
    /// `‖V†V − I‖`.
    pub isometry_defect: f64,
    /// `‖Z − V†(σ_Z⊗I)V‖`.
    pub z_residual: f64,
    /// `‖X − V†(σ_X⊗I)V‖`.
    pub x_residual: f64,
    /// `‖((Z − V†(σ_Z⊗I)V) ⊗ I)|ψ⟩‖²` when a state was supplied.
    pub z_residual_state: Option<f64>,
    pub x_residual_state: Option<f64>,
    pub x_prime: Option<XPrimeReport>,
}

/// Decomposition `V X' V† ≈ σ_X ⊗ A_X + σ_Y ⊗ A_Y`.
#[derive(Clone, Debug)]
pub struct XPrimeReport {
    pub a_x: CMat,
    pub a_y: CMat,
    /// `‖V X' V† − (σ_X⊗A_X + σ_Y⊗A_Y)‖`.
    pub residual: f64,
    /// `‖A_X² + A_Y² − I‖`.
    pub identity_defect: f64,
    /// `‖[A_X, A_Y]‖`.
    pub commutator: f64,
}

/// Orthonormal basis of the range of a projector, obtained by Gram–Schmidt
/// on its images of the standard basis vectors. This fixes a deterministic,
/// basis-independent choice inside degenerate eigenspaces.
fn canonical_basis(projector: &CMat, expected: usize) -> Vec<CVec> {
    let d = projector.nrows();
    let mut basis: Vec<CVec> = Vec::with_capacity(expected);
    for i in 0..d {
        if basis.len() == expected {
            break;
        }
        let mut v = projector.column(i).into_owned();
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(linalg::canonical_phase(&(v / c(n, 0.0))));
        }
    }
    basis
}

/// Eigen-decomposition with degenerate clusters replaced by their canonical basis.
fn canonical_eigenvectors(m: &CMat, embed: &CMat) -> Vec<(f64, CVec)> {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let mut out = Vec::with_capacity(vals.len());
    let mut i = 0;
    while i < vals.len() {
        let mut j = i + 1;
        while j < vals.len() && (vals[j] - vals[i]).abs() < EIGEN_CLUSTER_TOL {
            j += 1;
        }
        let cluster = embed * vecs.columns(i, j - i);
        let projector = &cluster * cluster.adjoint();
        let mean = vals[i..j].iter().sum::<f64>() / (j - i) as f64;
        for v in canonical_basis(&projector, j - i) {
            out.push((mean, v));
        }
        i = j;
    }
    out
}

fn state_residual(r: &CMat, psi: &CVec) -> Result<f64> {
    let d = r.nrows();
    if psi.len() % d != 0 {
        return Err(RigidityError::StateShape { len: psi.len(), dim: d });
    }
    let ancilla = psi.len() / d;
    let full = linalg::kron(r, &linalg::identity(ancilla));
    Ok((full * psi).norm_squared())
}

/// Builds an isometry under which `Z ≃ σ_Z ⊗ I` and `X ≃ σ_X ⊗ I`.
///
/// The `+1` eigenspace of `Z` is diagonalized against `PXP`; each eigenvector
/// `e_j` with eigenvalue `λ_j` is paired with `(I−P)Xe_j/√(1−λ_j²)`, which
/// spans the `−1` half of a two-dimensional invariant block. Vectors of the
/// `−1` eigenspace left over after pairing fill the remaining slots.
pub fn jordan_extract(
    z: &BinaryObservable,
    x: &BinaryObservable,
    x_prime: Option<&BinaryObservable>,
    psi: Option<&CVec>,
) -> Result<IsometryReport> {
    let d = z.dim();
    if d % 2 != 0 {
        return Err(RigidityError::OddDimension(d));
    }
    for other in [Some(x), x_prime].into_iter().flatten() {
        if other.dim() != d {
            return Err(RigidityError::DimensionMismatch { expected: d, actual: other.dim() });
        }
    }
    let p = z.projector(0);
    let p_perp = z.projector(1);
    let plus_basis = canonical_basis(&p, d);
    let k = plus_basis.len();
    let bp = CMat::from_columns(&plus_basis);
    let restricted = bp.adjoint() * x.matrix() * &bp;
    let evs = canonical_eigenvectors(&restricted, &bp);

    let m = k.max(d - k);
    let mut rows: Vec<Option<CVec>> = vec![None; 2 * m];
    let mut block_overlaps = Vec::with_capacity(k);
    let mut paired: Vec<CVec> = Vec::new();
    for (j, (lambda, e)) in evs.iter().enumerate() {
        block_overlaps.push(*lambda);
        rows[j] = Some(e.clone());
        let f = &p_perp * x.matrix() * e;
        let n = f.norm();
        if n > PAIRING_TOL {
            let f = f / c(n, 0.0);
            rows[m + j] = Some(f.clone());
            paired.push(f);
        }
    }
    let mut rest = p_perp.clone();
    for f in &paired {
        rest -= linalg::outer(f);
    }
    let free = canonical_basis(&rest, d - k - paired.len());
    let mut free_iter = free.into_iter();
    for slot in rows[m..2 * m].iter_mut().filter(|r| r.is_none()) {
        match free_iter.next() {
            Some(g) => *slot = Some(g),
            None => break,
        }
    }

    let mut v = CMat::zeros(2 * m, d);
    for (r, row) in rows.iter().enumerate() {
        if let Some(vec) = row {
            v.row_mut(r).copy_from(&vec.adjoint());
        }
    }

    let id_m = linalg::identity(m);
    let pull_back = |s: &CMat| v.adjoint() * linalg::kron(s, &id_m) * &v;
    let z_diff = z.matrix() - pull_back(&linalg::sigma_z());
    let x_diff = x.matrix() - pull_back(&linalg::sigma_x());
    let (z_residual_state, x_residual_state) = match psi {
        Some(psi) => (Some(state_residual(&z_diff, psi)?), Some(state_residual(&x_diff, psi)?)),
        None => (None, None),
    };

    let x_prime = x_prime.map(|xp| {
        let pushed = &v * xp.matrix() * v.adjoint();
        let b01 = pushed.view((0, m), (m, m)).into_owned();
        let b10 = pushed.view((m, 0), (m, m)).into_owned();
        let a_x = (&b01 + &b10) * c(0.5, 0.0);
        let a_y = (&b10 - &b01) * Complex64::new(0.0, -0.5);
        let model = linalg::kron(&linalg::sigma_x(), &a_x) + linalg::kron(&linalg::sigma_y(), &a_y);
        let identity_defect = linalg::op_norm(&(&a_x * &a_x + &a_y * &a_y - &id_m));
        let commutator = linalg::op_norm(&(&a_x * &a_y - &a_y * &a_x));
        XPrimeReport { residual: linalg::op_norm(&(pushed - model)), identity_defect, commutator, a_x, a_y }
    });

    Ok(IsometryReport {
        isometry_defect: linalg::op_norm(&(v.adjoint() * &v - linalg::identity(d))),
        z_residual: linalg::op_norm(&z_diff),
        x_residual: linalg::op_norm(&x_diff),
        isometry: v,
        block_dim: m,
        block_overlaps,
        z_residual_state,
        x_residual_state,
        x_prime,
    })
}

fn parse_entry(tok: &str, lineno: usize) -> Result<Complex64> {
    let bad = || RigidityError::Parse(format!("line {}: bad entry `{tok}`", lineno + 1));
    let (re, im) = tok.split_once(':').unwrap_or((tok, "0"));
    Ok(c(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

/// Parses a complex vector in the same entry syntax as [`parse_matrix_text`],
/// entries separated by any whitespace including newlines.
pub fn parse_vector_text(text: &str) -> Result<CVec> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            entries.push(parse_entry(tok, lineno)?);
        }
    }
    if entries.is_empty() {
        return Err(RigidityError::Parse("no entries".into()));
    }
    Ok(CVec::from_vec(entries))
}

/// Parses a square complex matrix from text: one row per line, entries
/// separated by whitespace, each entry `re` or `re:im`. Blank lines and text
/// after `#` are ignored.
pub fn parse_matrix_text(text: &str) -> Result<CMat> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line.split_whitespace().map(|tok| parse_entry(tok, lineno)).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(RigidityError::Parse("no rows".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(RigidityError::Parse(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}
