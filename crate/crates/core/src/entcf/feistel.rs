//! Keyed permutation of `{0,1}^w` for `w ≤ 64`, built as a 4-round
//! unbalanced Feistel network that alternately masks the high and low halves.

use serde::{Deserialize, Serialize};

pub const ROUNDS: usize = 4;

#[inline]
fn mix(z: u64) -> u64 {
    let z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn round_fn(key: u64, half: u64) -> u64 {
    mix(key ^ mix(half.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

#[inline]
fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feistel {
    width: u32,
    keys: [u64; ROUNDS],
}

impl Feistel {
    /// # Panics
    /// If `width` is 0 or above 64.
    pub fn new(width: u32, keys: [u64; ROUNDS]) -> Self {
        assert!((1..=64).contains(&width), "Feistel width must be in 1..=64, got {width}");
        Feistel { width, keys }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn keys(&self) -> &[u64; ROUNDS] {
        &self.keys
    }

    fn split(&self) -> (u32, u32) {
        let low = self.width - self.width / 2;
        (low, self.width / 2)
    }

    fn round(&self, i: usize, x: u64) -> u64 {
        let (low_bits, high_bits) = self.split();
        let lo = x & mask(low_bits);
        let hi = if low_bits >= 64 { 0 } else { x >> low_bits };
        if i % 2 == 0 {
            let lo = lo ^ (round_fn(self.keys[i], hi) & mask(low_bits));
            lo | hi.checked_shl(low_bits).unwrap_or(0)
        } else {
            let hi = hi ^ (round_fn(self.keys[i], lo) & mask(high_bits));
            lo | hi.checked_shl(low_bits).unwrap_or(0)
        }
    }

    pub fn forward(&self, x: u64) -> u64 {
        debug_assert!(x & !mask(self.width) == 0);
        (0..ROUNDS).fold(x, |acc, i| self.round(i, acc))
    }

    /// Each round only xors one half with a function of the other, so it is
    /// its own inverse.
    pub fn inverse(&self, y: u64) -> u64 {
        debug_assert!(y & !mask(self.width) == 0);
        (0..ROUNDS).rev().fold(y, |acc, i| self.round(i, acc))
    }
}
