//! Permutation-based backend with exact claws.
//!
//! `F`: `f_0(x) = π(x)`, `f_1(x) = π(x ⊕ s)` on `w` bits.
//! `G`: `f_b(x) = π(2x + b)` on `w + 1` bits, so the branch bit is the low bit
//! of the permuted input and the two ranges are disjoint.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EntcfError, FamilyKind, Inversion, Point, PreimagePair, Result};
use crate::entcf::{Backend, Feistel};
use crate::zq::EquationVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Permutation {
    Feistel(Feistel),
    /// π = identity; only for golden-vector tests.
    #[cfg(any(test, feature = "test-vectors"))]
    Identity { width: u32 },
}

impl Permutation {
    pub fn width(&self) -> u32 {
        match self {
            Permutation::Feistel(f) => f.width(),
            #[cfg(any(test, feature = "test-vectors"))]
            Permutation::Identity { width } => *width,
        }
    }

    pub fn forward(&self, x: u64) -> u64 {
        match self {
            Permutation::Feistel(f) => f.forward(x),
            #[cfg(any(test, feature = "test-vectors"))]
            Permutation::Identity { .. } => x,
        }
    }

    pub fn inverse(&self, y: u64) -> u64 {
        match self {
            Permutation::Feistel(f) => f.inverse(y),
            #[cfg(any(test, feature = "test-vectors"))]
            Permutation::Identity { .. } => y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockKey {
    /// Domain width `w`.
    pub width: u32,
    /// The claw offset `s` (`0` for injective keys).
    pub shift: u64,
    pub permutation: Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockTrapdoor {
    pub shift: u64,
    pub permutation: Permutation,
}

impl MockTrapdoor {
    pub(crate) fn matches(&self, key: &MockKey) -> bool {
        self.shift == key.shift && self.permutation == key.permutation
    }
}

pub(crate) fn word_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn permutation_width(kind: FamilyKind, w: u32) -> Result<u32> {
    let max = match kind {
        FamilyKind::ClawFree => 64,
        FamilyKind::Injective => 63,
    };
    if w == 0 || w > max {
        return Err(EntcfError::UnsupportedParams {
            backend: Backend::Mock,
            reason: format!("width {w} outside 1..={max} for {kind:?} keys"),
        });
    }
    Ok(match kind {
        FamilyKind::ClawFree => w,
        FamilyKind::Injective => w + 1,
    })
}

/// Shifts are drawn with Hamming weight at least `⌈w/2⌉` so that the
/// differing-coordinate good set holds for all but a negligible fraction of `d`.
fn sample_shift<R: Rng + ?Sized>(w: u32, rng: &mut R) -> u64 {
    let min_weight = w.div_ceil(2);
    loop {
        let s = rng.random::<u64>() & word_mask(w);
        if s != 0 && s.count_ones() >= min_weight {
            return s;
        }
    }
}

pub(crate) fn generate<R: Rng + ?Sized>(kind: FamilyKind, w: u32, rng: &mut R) -> Result<(MockKey, MockTrapdoor)> {
    let pw = permutation_width(kind, w)?;
    let permutation = Permutation::Feistel(Feistel::new(pw, rng.random()));
    let shift = match kind {
        FamilyKind::ClawFree => sample_shift(w, rng),
        FamilyKind::Injective => 0,
    };
    Ok((MockKey { width: w, shift, permutation }, MockTrapdoor { shift, permutation }))
}

#[cfg(any(test, feature = "test-vectors"))]
pub(crate) fn transparent(kind: FamilyKind, w: u32, shift: u64) -> Result<(MockKey, MockTrapdoor)> {
    let pw = permutation_width(kind, w)?;
    let shift = match kind {
        FamilyKind::ClawFree if shift == 0 || shift & !word_mask(w) != 0 => {
            return Err(EntcfError::UnsupportedParams {
                backend: Backend::Mock,
                reason: format!("shift {shift} must be a nonzero {w}-bit word"),
            })
        }
        FamilyKind::ClawFree => shift,
        FamilyKind::Injective => 0,
    };
    let permutation = Permutation::Identity { width: pw };
    Ok((MockKey { width: w, shift, permutation }, MockTrapdoor { shift, permutation }))
}

impl MockKey {
    pub(crate) fn sample_domain<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random::<u64>() & word_mask(self.width)
    }

    pub(crate) fn eval(&self, kind: FamilyKind, b: u8, x: u64) -> Result<u64> {
        if x & !word_mask(self.width) != 0 || b > 1 {
            return Err(EntcfError::BadDomainPoint);
        }
        Ok(match kind {
            FamilyKind::ClawFree => self.permutation.forward(if b == 0 { x } else { x ^ self.shift }),
            FamilyKind::Injective => self.permutation.forward(2 * x + u64::from(b)),
        })
    }
}

pub(crate) fn preimages(key: &MockKey, kind: FamilyKind, y: u64) -> Vec<PreimagePair> {
    if y & !word_mask(key.permutation.width()) != 0 {
        return Vec::new();
    }
    let v = key.permutation.inverse(y);
    match kind {
        FamilyKind::ClawFree => vec![
            PreimagePair { b: 0, x: Point::Word(v) },
            PreimagePair { b: 1, x: Point::Word(v ^ key.shift) },
        ],
        FamilyKind::Injective => vec![PreimagePair { b: (v & 1) as u8, x: Point::Word(v >> 1) }],
    }
}

pub(crate) fn invert(td: &MockTrapdoor, key: &MockKey, kind: FamilyKind, y: &Point) -> Result<Inversion> {
    let y = y.as_word().ok_or(EntcfError::BadDomainPoint)?;
    if y & !word_mask(td.permutation.width()) != 0 {
        return Err(EntcfError::NoPreimage);
    }
    let v = td.permutation.inverse(y);
    Ok(match kind {
        FamilyKind::ClawFree => Inversion::Claw { x0: Point::Word(v), x1: Point::Word(v ^ td.shift) },
        FamilyKind::Injective => {
            debug_assert_eq!(key.width + 1, td.permutation.width());
            Inversion::Injective { b: (v & 1) as u8, x: Point::Word(v >> 1) }
        }
    })
}

/// Good-set surrogate: among the coordinates where `J(x₀)` and `J(x₁)`
/// differ, at least `w/8` entries of `d` are nonzero.
/// Since `x₀ ⊕ x₁ = s` for every claw, the predicate does not depend on `(b, x)`.
pub(crate) fn g_set(td: &MockTrapdoor, key: &MockKey, d: &EquationVector) -> bool {
    let diff = td.shift & word_mask(key.width);
    let count = d
        .entries()
        .iter()
        .enumerate()
        .filter(|&(i, &di)| di != 0 && (diff >> i) & 1 == 1)
        .count();
    8 * count >= key.width as usize
}
