//! Building blocks for buffered remote state preparation: modular arithmetic
//! and encodings, claw-free function families, exact simulation of the honest
//! prover's states and the measurement buffer, and rigidity numerics.

pub mod entcf;
pub mod linalg;
pub mod qsim;
pub mod rigidity;
pub mod seed;
pub mod zq;

pub use seed::{rng_from_seed, SeedTree, SimRng};

/// `1/2 + 1/(2√2)`, the optimal success probability of the 2↦1 QRAC.
pub const OPT_Q: f64 = 0.5 + std::f64::consts::FRAC_1_SQRT_2 / 2.0;
