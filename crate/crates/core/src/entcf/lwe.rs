//! Toy lattice backend: `f_b(x) = ⌊(A·x + b·u mod q) / 2^κ⌋` on `x ∈ Z_q^n`.
//!
//! Claw-free keys use `u = A·s + e` with `‖e‖_∞ ≤ B`, so that
//! `f_1(x − s) = f_0(x) + e` and [`chk`](super::chk) accepts both branches up
//! to the noise bound. Injective keys use a uniform `u`. Dimensions are small
//! enough that preimages are found by exhaustive search over `Z_q^n`; the
//! generator rejects matrices for which that search could be ambiguous.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EntcfError, FamilyKind, Inversion, Point, PreimagePair, Result};
use crate::entcf::Backend;
use crate::zq::{self, centered, BitString, EquationVector, ModulusParams, ResidueMatrix};

/// Upper bound on `q^n` for the exhaustive preimage search.
pub const MAX_SEARCH_SPACE: u64 = 1 << 20;

const MAX_GEN_ATTEMPTS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LweParams {
    pub q: u32,
    pub n: usize,
    /// Rows of `A`.
    pub m: usize,
    /// Rounding shift κ.
    pub kappa: u32,
    /// Noise bound `B`.
    pub noise_bound: u32,
}

impl LweParams {
    /// `q = 17, n = 3, m = 8, κ = 0, B = 1`.
    pub const fn desk() -> Self {
        LweParams { q: 17, n: 3, m: 8, kappa: 0, noise_bound: 1 }
    }

    pub fn bits_per_coordinate(&self) -> usize {
        zq::ceil_log2(u64::from(self.q))
    }

    pub fn width(&self) -> usize {
        self.n * self.bits_per_coordinate()
    }

    pub fn modulus_params(&self) -> Result<ModulusParams> {
        Ok(ModulusParams::new(self.q, self.n, self.m, self.width())?)
    }

    fn search_space(&self) -> u64 {
        u64::from(self.q).saturating_pow(self.n as u32)
    }

    /// Minimum centered distance between images of distinct inputs that keeps
    /// noisy preimages unique.
    fn separation(&self) -> i64 {
        (2 * i64::from(self.noise_bound) + 1) << self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(EntcfError::UnsupportedParams { backend: Backend::Lwe, reason });
        if !zq::is_prime(u64::from(self.q)) || self.q < 3 || self.q > 65521 {
            return fail(format!("q = {} must be a prime in 3..=65521", self.q));
        }
        if self.n == 0 || self.m < self.n || self.m > u16::MAX as usize {
            return fail(format!("need 1 ≤ n ≤ m ≤ 65535, got n = {}, m = {}", self.n, self.m));
        }
        if self.search_space() > MAX_SEARCH_SPACE {
            return fail(format!("q^n = {}^{} exceeds the search limit {MAX_SEARCH_SPACE}", self.q, self.n));
        }
        if self.kappa as usize >= self.bits_per_coordinate() || 2 * self.separation() >= i64::from(self.q) {
            return fail(format!("rounding κ = {} and noise B = {} too large for q = {}", self.kappa, self.noise_bound, self.q));
        }
        Ok(())
    }

    fn rounded_range(&self) -> u32 {
        ((self.q - 1) >> self.kappa) + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LweKey {
    pub params: LweParams,
    /// `m × n`.
    pub a: ResidueMatrix,
    pub u: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LweTrapdoor {
    pub params: LweParams,
    /// Secret `s` (zero for injective keys).
    pub s: Vec<u32>,
    /// Noise `e` (zero for injective keys).
    pub e: Vec<i64>,
}

fn for_each_vector(q: u32, n: usize, mut f: impl FnMut(&[u32])) {
    let mut x = vec![0u32; n];
    loop {
        f(&x);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

fn linf_centered(v: &[u32], q: u32) -> i64 {
    v.iter().map(|&r| centered(r, q).abs()).max().unwrap_or(0)
}

pub(crate) fn generate<R: Rng + ?Sized>(kind: FamilyKind, p: LweParams, rng: &mut R) -> Result<(LweKey, LweTrapdoor)> {
    p.validate()?;
    let q = p.q;
    for _ in 0..MAX_GEN_ATTEMPTS {
        let a = ResidueMatrix::random(q, p.m, p.n, rng);
        let mut well_separated = true;
        for_each_vector(q, p.n, |z| {
            if well_separated && z.iter().any(|&v| v != 0) {
                let az = a.mul_vec(z).expect("shape");
                well_separated = linf_centered(&az, q) >= p.separation();
            }
        });
        if !well_separated {
            continue;
        }
        let (u, s, e) = match kind {
            FamilyKind::ClawFree => {
                let s: Vec<u32> = (0..p.n).map(|_| rng.random_range(0..q)).collect();
                let bound = i64::from(p.noise_bound);
                let e: Vec<i64> = (0..p.m).map(|_| rng.random_range(-bound..=bound)).collect();
                let as_ = a.mul_vec(&s).expect("shape");
                let u = as_.iter().zip(&e).map(|(&v, &ei)| (i64::from(v) + ei).rem_euclid(i64::from(q)) as u32).collect();
                (u, s, e)
            }
            FamilyKind::Injective => {
                let u: Vec<u32> = (0..p.m).map(|_| rng.random_range(0..q)).collect();
                // u must stay far from the image of A, else f_0 and f_1 overlap
                let mut far = true;
                for_each_vector(q, p.n, |z| {
                    if far {
                        let az = a.mul_vec(z).expect("shape");
                        let diff: Vec<u32> = u.iter().zip(&az).map(|(&ui, &v)| (ui + q - v) % q).collect();
                        far = linf_centered(&diff, q) >= p.separation();
                    }
                });
                if !far {
                    continue;
                }
                (u, vec![0; p.n], vec![0; p.m])
            }
        };
        return Ok((LweKey { params: p, a, u }, LweTrapdoor { params: p, s, e }));
    }
    Err(EntcfError::UnsupportedParams {
        backend: Backend::Lwe,
        reason: format!("no well-separated matrix found in {MAX_GEN_ATTEMPTS} attempts"),
    })
}

impl LweKey {
    pub(crate) fn sample_domain<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        (0..self.params.n).map(|_| rng.random_range(0..self.params.q)).collect()
    }

    fn valid_domain(&self, x: &[u32]) -> bool {
        x.len() == self.params.n && x.iter().all(|&v| v < self.params.q)
    }

    fn raw(&self, b: u8, x: &[u32]) -> Vec<u32> {
        let q = self.params.q;
        let ax = self.a.mul_vec(x).expect("domain validated");
        if b == 0 {
            ax
        } else {
            ax.iter().zip(&self.u).map(|(&v, &u)| (v + u) % q).collect()
        }
    }

    pub(crate) fn eval(&self, b: u8, x: &[u32]) -> Result<Vec<u32>> {
        if !self.valid_domain(x) {
            return Err(EntcfError::BadDomainPoint);
        }
        let k = self.params.kappa;
        Ok(self.raw(b, x).into_iter().map(|v| v >> k).collect())
    }

    fn distance(&self, f: &[u32], y: &[u32]) -> Option<u32> {
        if f.len() != y.len() {
            return None;
        }
        let r = self.params.rounded_range();
        f.iter()
            .zip(y)
            .map(|(&a, &b)| {
                if a >= r || b >= r {
                    None
                } else {
                    let d = a.abs_diff(b);
                    Some(d.min(r - d))
                }
            })
            .try_fold(0u32, |acc, d| d.map(|d| acc.max(d)))
    }

    pub(crate) fn check(&self, b: u8, x: &[u32], y: &[u32]) -> bool {
        self.eval(b, x)
            .ok()
            .and_then(|f| self.distance(&f, y))
            .is_some_and(|d| d <= self.params.noise_bound)
    }

    /// Closest branch-`b` preimage within the noise bound.
    fn search(&self, b: u8, y: &[u32]) -> Option<Vec<u32>> {
        let mut best: Option<(u32, Vec<u32>)> = None;
        for_each_vector(self.params.q, self.params.n, |x| {
            let f = self.eval(b, x).expect("enumerated domain");
            if let Some(d) = self.distance(&f, y) {
                if d <= self.params.noise_bound && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, x.to_vec()));
                }
            }
        });
        best.map(|(_, x)| x)
    }

    pub(crate) fn encode_domain(&self, x: &[u32]) -> Result<BitString> {
        if !self.valid_domain(x) {
            return Err(EntcfError::BadDomainPoint);
        }
        let bits = self.params.bits_per_coordinate();
        let mut out = Vec::with_capacity(self.params.width());
        for &v in x {
            out.extend_from_slice(zq::j_encode(u64::from(v), bits)?.bits());
        }
        Ok(BitString::new(out)?)
    }

    /// The good set as defined for lattice keys: `I_{b,x}(d)` takes, per
    /// coordinate block, the parity of `d mod 2` against
    /// `J(x) ⊕ J(x − (−1)^b·1)`; its restriction to the window starting at
    /// `b·⌊n/2⌋` of length `⌈n/2⌉` must have weight at least `n/4`.
    pub(crate) fn g_set(&self, b: u8, x: &[u32], d: &EquationVector) -> Result<bool> {
        if !self.valid_domain(x) || b > 1 {
            return Err(EntcfError::BadDomainPoint);
        }
        let (q, n) = (self.params.q, self.params.n);
        let shifted: Vec<u32> = x.iter().map(|&v| if b == 0 { (v + q - 1) % q } else { (v + 1) % q }).collect();
        let jx = self.encode_domain(x)?;
        let js = self.encode_domain(&shifted)?;
        let bits = self.params.bits_per_coordinate();
        let start = usize::from(b) * (n / 2);
        let end = (start + n.div_ceil(2)).min(n);
        let weight = (start..end)
            .filter(|&j| {
                (j * bits..(j + 1) * bits)
                    .map(|k| (d.entries()[k] & 1) & (jx.bits()[k] ^ js.bits()[k]))
                    .fold(0u8, |acc, v| acc ^ v)
                    == 1
            })
            .count();
        Ok(4 * weight >= n)
    }
}

pub(crate) fn preimages(key: &LweKey, y: &[u32]) -> Vec<PreimagePair> {
    (0..2u8)
        .filter_map(|b| key.search(b, y).map(|x| PreimagePair { b, x: Point::Vector(x) }))
        .collect()
}

pub(crate) fn invert(td: &LweTrapdoor, key: &LweKey, kind: FamilyKind, y: &Point) -> Result<Inversion> {
    let y = y.as_vector().ok_or(EntcfError::BadDomainPoint)?;
    if y.len() != key.params.m {
        return Err(EntcfError::BadDomainPoint);
    }
    let q = key.params.q;
    match kind {
        FamilyKind::ClawFree => {
            let x0 = key.search(0, y).ok_or(EntcfError::NoPreimage)?;
            let x1: Vec<u32> = x0.iter().zip(&td.s).map(|(&a, &s)| (a + q - s) % q).collect();
            if !key.check(1, &x1, y) {
                return Err(EntcfError::NoPreimage);
            }
            Ok(Inversion::Claw { x0: Point::Vector(x0), x1: Point::Vector(x1) })
        }
        FamilyKind::Injective => (0..2u8)
            .find_map(|b| key.search(b, y).map(|x| Inversion::Injective { b, x: Point::Vector(x) }))
            .ok_or(EntcfError::NoPreimage),
    }
}
