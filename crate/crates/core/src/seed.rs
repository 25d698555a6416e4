//! Deterministic seed splitting.
//!
//! Every random decision in a session is drawn from a generator derived from
//! one root seed by a fixed path of labels, so that independent components
//! (verifier rounds, prover rounds, final round) never share a stream and a
//! run can be replayed exactly regardless of transport or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the workspace.
pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in a tree of derived seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree(u64);

impl SeedTree {
    pub const fn new(root: u64) -> Self {
        SeedTree(root)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child node for `label`; distinct labels give unrelated streams.
    pub fn child(self, label: u64) -> SeedTree {
        SeedTree(splitmix64(self.0 ^ splitmix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    /// Child node for a string label.
    pub fn named(self, label: &str) -> SeedTree {
        // FNV-1a; only needs to be stable, not strong.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in label.bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h)
    }

    pub fn rng(self) -> SimRng {
        SimRng::seed_from_u64(self.0)
    }
}

/// Shorthand for `SeedTree::new(seed).rng()`.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SeedTree::new(seed).rng()
}
