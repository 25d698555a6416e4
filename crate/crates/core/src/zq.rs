//! Modular arithmetic, the bit and Z₈ encodings used by the claw-free
//! families, and exhaustive oracles for the moderate-matrix and hardcore
//! statements about random matrices over Z_q.
//!
//! Bit strings are indexed least-significant bit first everywhere in the
//! workspace: index 0 of `j_encode(x, w)` is `x & 1`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `q^ℓ` for which row spans are enumerated exhaustively.
pub const DEFAULT_SPAN_CAP: u64 = 1_000_000;

/// Largest `n` accepted by [`hardcore_distance_oracle`] (enumerates `2^n` vectors).
pub const MAX_ORACLE_DIMENSION: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZqError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("parameter `{name}` must be at least 1")]
    ZeroParameter { name: &'static str },
    #[error("value {value} does not fit in {width} bits")]
    OutOfRange { value: u64, width: usize },
    #[error("width {0} exceeds the 64-bit word limit")]
    WidthTooLarge(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("entry {value} at position {index} is outside [0, {bound})")]
    EntryOutOfRange { index: usize, value: u64, bound: u64 },
    #[error("row span has {size} elements, above the enumeration cap {cap}")]
    SpanTooLarge { size: u128, cap: u64 },
    #[error("dimension n = {0} is above the oracle limit {MAX_ORACLE_DIMENSION}")]
    DimensionTooLarge(usize),
    #[error("hardcore direction d̂ is empty")]
    EmptyDirection,
    #[error("unsupported hardcore modulus {0} (expected 2 or 8)")]
    UnsupportedModulus(u32),
}

pub type Result<T, E = ZqError> = std::result::Result<T, E>;

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// `⌈log₂ q⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(q: u64) -> usize {
    if q <= 1 {
        0
    } else {
        (64 - (q - 1).leading_zeros()) as usize
    }
}

/// Symbols `q`, `n`, `ℓ`, `w` shared by the lattice backend and the oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulusParams {
    pub q: u32,
    pub n: usize,
    pub ell: usize,
    pub w: usize,
}

impl ModulusParams {
    pub fn new(q: u32, n: usize, ell: usize, w: usize) -> Result<Self> {
        if !is_prime(u64::from(q)) {
            return Err(ZqError::NotPrime(u64::from(q)));
        }
        for (name, v) in [("n", n), ("ell", ell), ("w", w)] {
            if v == 0 {
                return Err(ZqError::ZeroParameter { name });
            }
        }
        Ok(ModulusParams { q, n, ell, w })
    }

    /// Parameters with `w = n·⌈log₂ q⌉`, the width of the binary encoding of Z_q^n.
    pub fn lattice(q: u32, n: usize, ell: usize) -> Result<Self> {
        Self::new(q, n, ell, n * ceil_log2(u64::from(q)).max(1))
    }

    pub fn bits_per_coordinate(&self) -> usize {
        ceil_log2(u64::from(self.q)).max(1)
    }
}

/// A fixed-width string of bits, least-significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some((index, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(ZqError::EntryOutOfRange { index, value: u64::from(value), bound: 2 });
        }
        Ok(BitString(bits))
    }

    pub fn zeros(w: usize) -> Self {
        BitString(vec![0; w])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Concatenation, `self` occupying the low indices.
    pub fn concat(mut self, other: &BitString) -> BitString {
        self.0.extend_from_slice(&other.0);
        self
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Base-2 digits of `x`, LSB at index 0.
pub fn j_encode(x: u64, w: usize) -> Result<BitString> {
    if w > 64 {
        return Err(ZqError::WidthTooLarge(w));
    }
    if w < 64 && x >> w != 0 {
        return Err(ZqError::OutOfRange { value: x, width: w });
    }
    Ok(BitString((0..w).map(|i| ((x >> i) & 1) as u8).collect()))
}

pub fn j_decode(bits: &BitString) -> Result<u64> {
    if bits.len() > 64 {
        return Err(ZqError::WidthTooLarge(bits.len()));
    }
    Ok(bits.0.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i)))
}

/// An equation `d ∈ Z₈^w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct EquationVector(Vec<u8>);

impl EquationVector {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &v)| v > 7) {
            return Err(ZqError::EntryOutOfRange { index, value: u64::from(value), bound: 8 });
        }
        Ok(EquationVector(entries))
    }

    pub fn zeros(w: usize) -> Self {
        EquationVector(vec![0; w])
    }

    /// Uniform over Z₈^w.
    pub fn random<R: Rng + ?Sized>(w: usize, rng: &mut R) -> Self {
        let mut entries = Vec::with_capacity(w);
        let mut pool = 0u64;
        let mut left = 0;
        for _ in 0..w {
            if left == 0 {
                pool = rng.random();
                left = 21;
            }
            entries.push((pool & 7) as u8);
            pool >>= 3;
            left -= 1;
        }
        EquationVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }
}

impl TryFrom<Vec<u8>> for EquationVector {
    type Error = ZqError;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        EquationVector::new(v)
    }
}

impl From<EquationVector> for Vec<u8> {
    fn from(v: EquationVector) -> Vec<u8> {
        v.0
    }
}

/// The pair `(θ̂, v̂)` with `θ̂ ∈ {0,1,2,3}`, `v̂ ∈ {0,1}`; an undefined outcome
/// (⊥) is represented as `Option::None` by callers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngleOutcome {
    pub theta_hat: u8,
    pub v_hat: u8,
}

impl AngleOutcome {
    /// `θ̂ + 4v̂ ∈ {0,…,7}`, the multiple of π/4 of the prepared angle.
    pub fn index(self) -> u8 {
        self.theta_hat + 4 * self.v_hat
    }

    pub fn radians(self) -> f64 {
        f64::from(self.index()) * std::f64::consts::FRAC_PI_4
    }
}

/// `Σᵢ dᵢ·(j1ᵢ − j0ᵢ) mod 8`: the relative phase, in units of π/4, that the
/// Z₈ Fourier measurement outcome `d` imprints between the two branches.
pub fn relative_phase_mod8(d: &EquationVector, j0: &BitString, j1: &BitString) -> Result<u8> {
    if j0.len() != d.len() {
        return Err(ZqError::LengthMismatch { expected: d.len(), actual: j0.len() });
    }
    if j1.len() != d.len() {
        return Err(ZqError::LengthMismatch { expected: d.len(), actual: j1.len() });
    }
    let sum = d
        .entries()
        .iter()
        .zip(j0.bits().iter().zip(j1.bits()))
        .fold(0i64, |acc, (&di, (&a, &b))| acc + i64::from(di) * (i64::from(b) - i64::from(a)));
    Ok(sum.rem_euclid(8) as u8)
}

/// Splits `m ∈ {0..7}` as `θ̂ + 4v̂`.
pub fn theta_decompose(m: u8) -> AngleOutcome {
    assert!(m < 8, "Z₈ element out of range: {m}");
    AngleOutcome { theta_hat: m % 4, v_hat: m / 4 }
}

/// Representative of `r mod q` in `(−q/2, q/2]`.
pub fn centered(r: u32, q: u32) -> i64 {
    let r = i64::from(r % q);
    let q = i64::from(q);
    if 2 * r > q {
        r - q
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueVector {
    q: u32,
    entries: Vec<u32>,
}

impl ResidueVector {
    pub fn new(q: u32, entries: Vec<u32>) -> Result<Self> {
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &v)| v >= q) {
            return Err(ZqError::EntryOutOfRange { index, value: u64::from(value), bound: u64::from(q) });
        }
        Ok(ResidueVector { q, entries })
    }

    /// Reduces arbitrary integers into `[0, q)`.
    pub fn reduce(q: u32, values: &[i64]) -> Self {
        let qq = i64::from(q);
        ResidueVector { q, entries: values.iter().map(|v| v.rem_euclid(qq) as u32).collect() }
    }

    pub fn random<R: Rng + ?Sized>(q: u32, len: usize, rng: &mut R) -> Self {
        ResidueVector { q, entries: (0..len).map(|_| rng.random_range(0..q)).collect() }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }
}

/// A matrix over Z_q, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueMatrix {
    q: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl ResidueMatrix {
    pub fn new(q: u32, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(ZqError::LengthMismatch { expected: rows * cols, actual: entries.len() });
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &v)| v >= q) {
            return Err(ZqError::EntryOutOfRange { index, value: u64::from(value), bound: u64::from(q) });
        }
        Ok(ResidueMatrix { q, rows, cols, entries })
    }

    pub fn zeros(q: u32, rows: usize, cols: usize) -> Self {
        ResidueMatrix { q, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn random<R: Rng + ?Sized>(q: u32, rows: usize, cols: usize, rng: &mut R) -> Self {
        ResidueMatrix { q, rows, cols, entries: (0..rows * cols).map(|_| rng.random_range(0..q)).collect() }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// `M·x mod q`.
    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(ZqError::LengthMismatch { expected: self.cols, actual: x.len() });
        }
        let q = u64::from(self.q);
        Ok((0..self.rows)
            .map(|r| {
                let acc = self.row(r).iter().zip(x).fold(0u64, |acc, (&a, &b)| (acc + u64::from(a) * u64::from(b)) % q);
                acc as u32
            })
            .collect())
    }

    /// `cᵀ·M mod q` for a coefficient vector `c ∈ Z_q^rows`.
    pub fn row_combination(&self, coeffs: &[u32]) -> Vec<u32> {
        let q = u64::from(self.q);
        let mut out = vec![0u64; self.cols];
        for (r, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o = (*o + u64::from(c) * u64::from(a)) % q;
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }
}

fn qualifies(r: u32, q: u32) -> bool {
    // |rep| ∈ (q/32, 3q/32]  ⇔  32|rep| > q  and  32|rep| ≤ 3q
    let a = centered(r, q).unsigned_abs();
    32 * a > u64::from(q) && 32 * a <= 3 * u64::from(q)
}

fn moderate_entries(entries: &[u32], q: u32) -> bool {
    let count = entries.iter().filter(|&&r| qualifies(r, q)).count();
    4 * count >= entries.len()
}

/// At least n/4 entries whose centered representative has absolute value in
/// `(q/32, 3q/32]`.
pub fn is_moderate_vector(b: &ResidueVector) -> bool {
    moderate_entries(b.entries(), b.modulus())
}

/// Verdict of a moderate-matrix check, flagged when the row span was sampled
/// rather than enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModerateVerdict {
    pub moderate: bool,
    pub probabilistic: bool,
    pub combinations_checked: u64,
}

fn span_size(c: &ResidueMatrix) -> u128 {
    (c.modulus() as u128).checked_pow(c.rows() as u32).unwrap_or(u128::MAX)
}

/// Exhaustive check that every nonzero vector of the row span is moderate.
pub fn is_moderate_matrix(c: &ResidueMatrix) -> Result<bool> {
    is_moderate_matrix_capped(c, DEFAULT_SPAN_CAP)
}

pub fn is_moderate_matrix_capped(c: &ResidueMatrix, cap: u64) -> Result<bool> {
    let size = span_size(c);
    if size > u128::from(cap) {
        return Err(ZqError::SpanTooLarge { size, cap });
    }
    let q = c.modulus();
    let mut coeffs = vec![0u32; c.rows()];
    // odometer over Z_q^ℓ \ {0}
    loop {
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return Ok(true);
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if !moderate_entries(&c.row_combination(&coeffs), q) {
            return Ok(false);
        }
    }
}

/// Exhaustive when `q^ℓ ≤ cap`, otherwise checks `samples` random nonzero
/// combinations and reports a probabilistic verdict.
pub fn moderate_verdict<R: Rng + ?Sized>(c: &ResidueMatrix, cap: u64, samples: u64, rng: &mut R) -> ModerateVerdict {
    let size = span_size(c);
    if size <= u128::from(cap) {
        let moderate = is_moderate_matrix_capped(c, cap).expect("span within cap");
        return ModerateVerdict { moderate, probabilistic: false, combinations_checked: (size - 1) as u64 };
    }
    let q = c.modulus();
    for i in 0..samples {
        let coeffs = loop {
            let v: Vec<u32> = (0..c.rows()).map(|_| rng.random_range(0..q)).collect();
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        };
        if !moderate_entries(&c.row_combination(&coeffs), q) {
            return ModerateVerdict { moderate: false, probabilistic: false, combinations_checked: i + 1 };
        }
    }
    ModerateVerdict { moderate: true, probabilistic: true, combinations_checked: samples }
}

/// Range of the hardcore value `z = d̂·s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardcoreModulus {
    Two,
    Eight,
}

impl HardcoreModulus {
    pub fn value(self) -> u32 {
        match self {
            HardcoreModulus::Two => 2,
            HardcoreModulus::Eight => 8,
        }
    }
}

impl TryFrom<u32> for HardcoreModulus {
    type Error = ZqError;
    fn try_from(m: u32) -> Result<Self> {
        match m {
            2 => Ok(HardcoreModulus::Two),
            8 => Ok(HardcoreModulus::Eight),
            other => Err(ZqError::UnsupportedModulus(other)),
        }
    }
}

/// Distance from uniform of `z` conditioned on one fiber `Cs = v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberDistance {
    pub v: Vec<u32>,
    /// `Pr_s[Cs = v]`.
    pub probability: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardcoreTable {
    pub modulus: HardcoreModulus,
    pub fibers: Vec<FiberDistance>,
    /// Probability-weighted mean of the per-fiber distances.
    pub mean_distance: f64,
    pub max_distance: f64,
    /// Distance of the joint law of `(Cs, z)` from uniform on `Z_q^ℓ × Z_m`.
    pub joint_distance: f64,
    /// `2·q^{ℓ/2}·2^{−n/80}`.
    pub bound: f64,
}

/// The asymptotic distance bound `2·q^{ℓ/2}·2^{−n/80}`.
pub fn hardcore_bound(q: u32, ell: usize, n: usize) -> f64 {
    2.0 * f64::from(q).powf(ell as f64 / 2.0) * 2f64.powf(-(n as f64) / 80.0)
}

/// Enumerates `s ∈ {0,1}^n` and tabulates, for every nonempty fiber of
/// `s ↦ Cs mod q`, the total-variation distance of `d̂·s mod m` from uniform
/// on `Z_m`.
pub fn hardcore_distance_oracle(c: &ResidueMatrix, d_hat: &BitString, modulus: HardcoreModulus) -> Result<HardcoreTable> {
    let n = c.cols();
    if d_hat.is_empty() {
        return Err(ZqError::EmptyDirection);
    }
    if d_hat.len() != n {
        return Err(ZqError::LengthMismatch { expected: n, actual: d_hat.len() });
    }
    if n > MAX_ORACLE_DIMENSION {
        return Err(ZqError::DimensionTooLarge(n));
    }
    let q = c.modulus();
    let ell = c.rows();
    let m = modulus.value() as usize;

    // Column-wise walk in Gray-code order: one column added or removed per step.
    let mut v = vec![0u32; ell];
    let mut z = 0usize;
    let mut s: u64 = 0;
    let mut counts: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    let total = 1u64 << n;
    for step in 0..total {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            s ^= 1 << bit;
            let adding = (s >> bit) & 1 == 1;
            for (r, vr) in v.iter_mut().enumerate() {
                let a = c.get(r, bit);
                *vr = if adding { (*vr + a) % q } else { (*vr + q - a) % q };
            }
            if d_hat.bits()[bit] == 1 {
                z = if adding { (z + 1) % m } else { (z + m - 1) % m };
            }
        }
        counts.entry(v.clone()).or_insert_with(|| vec![0; m])[z] += 1;
    }

    let total_f = total as f64;
    let uniform = 1.0 / m as f64;
    let joint_cells = (q as f64).powi(ell as i32) * m as f64;
    let mut fibers = Vec::with_capacity(counts.len());
    let mut joint = 0.0;
    let mut occupied = 0.0;
    for (v, hist) in counts {
        let fiber_total: u64 = hist.iter().sum();
        let ft = fiber_total as f64;
        let distance = 0.5 * hist.iter().map(|&k| (k as f64 / ft - uniform).abs()).sum::<f64>();
        for &k in &hist {
            joint += (k as f64 / total_f - 1.0 / joint_cells).abs();
        }
        occupied += m as f64;
        fibers.push(FiberDistance { v, probability: ft / total_f, distance });
    }
    // cells of Z_q^ℓ × Z_m never hit contribute their full uniform mass
    joint += (joint_cells - occupied) / joint_cells;
    let mean_distance = fibers.iter().map(|f| f.probability * f.distance).sum();
    let max_distance = fibers.iter().map(|f| f.distance).fold(0.0, f64::max);
    Ok(HardcoreTable {
        modulus,
        fibers,
        mean_distance,
        max_distance,
        joint_distance: 0.5 * joint,
        bound: hardcore_bound(q, ell, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn bits(v: &[u8]) -> BitString {
        BitString::new(v.to_vec()).unwrap()
    }

    #[test]
    fn j_encode_examples() {
        assert_eq!(j_encode(26, 6).unwrap(), bits(&[0, 1, 0, 1, 1, 0]));
        assert_eq!(j_encode(0, 4).unwrap(), bits(&[0, 0, 0, 0]));
        assert_eq!(j_encode(31, 6).unwrap(), bits(&[1, 1, 1, 1, 1, 0]));
        assert!(matches!(j_encode(64, 6), Err(ZqError::OutOfRange { .. })));
        assert_eq!(j_encode(u64::MAX, 64).unwrap().hamming_weight(), 64);
    }

    #[test]
    fn j_roundtrip_exhaustive_small_widths() {
        for w in 0..=12usize {
            let mut seen = std::collections::HashSet::new();
            for x in 0..(1u64 << w) {
                let enc = j_encode(x, w).unwrap();
                assert_eq!(j_decode(&enc).unwrap(), x);
                assert!(seen.insert(enc));
            }
        }
    }

    #[test]
    fn relative_phase_examples() {
        let d = EquationVector::new(vec![3, 1, 2, 0, 7, 5]).unwrap();
        let j0 = j_encode(26, 6).unwrap();
        let j1 = j_encode(31, 6).unwrap();
        assert_eq!(relative_phase_mod8(&d, &j0, &j1).unwrap(), 5);
        assert_eq!(relative_phase_mod8(&d, &j0, &j0).unwrap(), 0);
        assert_eq!(relative_phase_mod8(&EquationVector::zeros(6), &j0, &j1).unwrap(), 0);
        // the reverse labelling negates the phase
        assert_eq!(relative_phase_mod8(&d, &j1, &j0).unwrap(), 3);
        assert!(relative_phase_mod8(&d, &j_encode(1, 5).unwrap(), &j1).is_err());
    }

    #[test]
    fn theta_decompose_is_a_bijection() {
        assert_eq!(theta_decompose(5), AngleOutcome { theta_hat: 1, v_hat: 1 });
        assert_eq!(theta_decompose(0), AngleOutcome { theta_hat: 0, v_hat: 0 });
        assert_eq!(theta_decompose(7), AngleOutcome { theta_hat: 3, v_hat: 1 });
        let images: std::collections::HashSet<_> = (0..8).map(theta_decompose).collect();
        assert_eq!(images.len(), 8);
        for m in 0..8 {
            assert_eq!(theta_decompose(m).index(), m);
        }
    }

    #[test]
    fn equation_vector_rejects_large_entries() {
        assert!(EquationVector::new(vec![0, 8]).is_err());
        let parsed: std::result::Result<EquationVector, _> = serde_json::from_str("[1,9]");
        assert!(parsed.is_err());
    }

    #[test]
    fn moderate_vector_examples() {
        let v = |e: &[u32]| ResidueVector::new(17, e.to_vec()).unwrap();
        assert!(is_moderate_vector(&v(&[1, 16, 5, 0])));
        assert!(!is_moderate_vector(&v(&[0, 0, 0, 0])));
        assert!(!is_moderate_vector(&v(&[5, 5, 5, 5])));
        assert_eq!(centered(16, 17), -1);
        assert_eq!(centered(8, 17), 8);
        assert_eq!(centered(9, 17), -8);
    }

    #[test]
    fn no_single_row_matrix_is_moderate() {
        // Each nonzero entry qualifies for only a handful of the q−1 nonzero
        // multiples, so some multiple of the row is always non-moderate.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for q in [11u32, 13, 17, 97] {
            for _ in 0..50 {
                let c = ResidueMatrix::random(q, 1, 12, &mut rng);
                assert!(!is_moderate_matrix(&c).unwrap());
            }
        }
    }

    #[test]
    fn span_cap_is_enforced() {
        let c = ResidueMatrix::zeros(1009, 2, 4);
        assert!(matches!(is_moderate_matrix_capped(&c, 1000), Err(ZqError::SpanTooLarge { .. })));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let verdict = moderate_verdict(&ResidueMatrix::random(1009, 2, 8, &mut rng), 1000, 64, &mut rng);
        assert!(!verdict.moderate);
        assert!(!verdict.probabilistic);
    }

    #[test]
    fn hardcore_oracle_degenerate_direction() {
        let c = ResidueMatrix::zeros(5, 1, 6);
        let table = hardcore_distance_oracle(&c, &BitString::zeros(6), HardcoreModulus::Two).unwrap();
        assert_eq!(table.fibers.len(), 1);
        assert!((table.fibers[0].distance - 0.5).abs() < 1e-15);
        let table8 = hardcore_distance_oracle(&c, &BitString::zeros(6), HardcoreModulus::Eight).unwrap();
        assert!((table8.fibers[0].distance - 7.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn hardcore_oracle_unconditioned_fair_bit() {
        let c = ResidueMatrix::zeros(5, 1, 6);
        let mut d = vec![0u8; 6];
        d[2] = 1;
        let table = hardcore_distance_oracle(&c, &bits(&d), HardcoreModulus::Two).unwrap();
        assert_eq!(table.fibers[0].v, vec![0]);
        assert!(table.fibers[0].distance.abs() < 1e-15);
    }

    /// Independent brute force: group all s by Cs with plain loops.
    fn naive_table(c: &ResidueMatrix, d: &BitString, m: usize) -> BTreeMap<Vec<u32>, f64> {
        let n = c.cols();
        let mut groups: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
        for s in 0..(1u32 << n) {
            let sv: Vec<u32> = (0..n).map(|i| (s >> i) & 1).collect();
            let v = c.mul_vec(&sv).unwrap();
            let z = (0..n).map(|i| d.bits()[i] as usize * sv[i] as usize).sum::<usize>() % m;
            groups.entry(v).or_default().push(z);
        }
        groups
            .into_iter()
            .map(|(v, zs)| {
                let mut hist = vec![0f64; m];
                for z in &zs {
                    hist[*z] += 1.0;
                }
                let tv = 0.5 * hist.iter().map(|h| (h / zs.len() as f64 - 1.0 / m as f64).abs()).sum::<f64>();
                (v, tv)
            })
            .collect()
    }

    #[test]
    fn hardcore_oracle_matches_naive_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (q, ell, n) in [(5u32, 1usize, 8usize), (7, 2, 9), (17, 1, 10)] {
            let c = ResidueMatrix::random(q, ell, n, &mut rng);
            let d = BitString::new((0..n).map(|_| rng.random_range(0..2u8)).collect()).unwrap();
            for modulus in [HardcoreModulus::Two, HardcoreModulus::Eight] {
                let table = hardcore_distance_oracle(&c, &d, modulus).unwrap();
                let naive = naive_table(&c, &d, modulus.value() as usize);
                assert_eq!(table.fibers.len(), naive.len());
                for f in &table.fibers {
                    assert!((f.distance - naive[&f.v]).abs() < 1e-12);
                }
                let p: f64 = table.fibers.iter().map(|f| f.probability).sum();
                assert!((p - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hardcore_small_q_example_within_bound() {
        // q=5, ℓ=1, n=8: the bound 2·√5·2^{−0.1} exceeds 1, so every entry satisfies it.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let c = ResidueMatrix::random(5, 1, 8, &mut rng);
        let d = bits(&[1, 1, 0, 1, 0, 0, 1, 0]);
        let table = hardcore_distance_oracle(&c, &d, HardcoreModulus::Two).unwrap();
        let bound = 2.0 * 5f64.sqrt() * 2f64.powf(-0.1);
        assert!((table.bound - bound).abs() < 1e-12);
        assert!(table.fibers.iter().all(|f| f.distance <= bound));
    }

    #[test]
    fn hardcore_oracle_input_errors() {
        let c = ResidueMatrix::zeros(5, 1, 21);
        assert_eq!(
            hardcore_distance_oracle(&c, &BitString::zeros(21), HardcoreModulus::Two),
            Err(ZqError::DimensionTooLarge(21))
        );
        let c = ResidueMatrix::zeros(5, 1, 4);
        assert_eq!(
            hardcore_distance_oracle(&c, &BitString::zeros(0), HardcoreModulus::Two),
            Err(ZqError::EmptyDirection)
        );
        assert!(HardcoreModulus::try_from(4).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModulusParams::new(15, 2, 1, 4).is_err());
        assert!(ModulusParams::new(17, 0, 1, 4).is_err());
        let p = ModulusParams::lattice(17, 3, 8).unwrap();
        assert_eq!(p.w, 15);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(ceil_log2(16), 4);
    }

    proptest! {
        #[test]
        fn j_roundtrip(x in any::<u64>(), w in 1usize..=64) {
            let x = if w == 64 { x } else { x & ((1u64 << w) - 1) };
            prop_assert_eq!(j_decode(&j_encode(x, w).unwrap()).unwrap(), x);
        }

        #[test]
        fn phase_is_antisymmetric(d in proptest::collection::vec(0u8..8, 10), a in 0u64..1024, b in 0u64..1024) {
            let d = EquationVector::new(d).unwrap();
            let (ja, jb) = (j_encode(a, 10).unwrap(), j_encode(b, 10).unwrap());
            let fwd = relative_phase_mod8(&d, &ja, &jb).unwrap();
            let back = relative_phase_mod8(&d, &jb, &ja).unwrap();
            prop_assert_eq!((fwd + back) % 8, 0);
        }
    }
}
