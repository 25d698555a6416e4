//! Concentration bounds used to size a run.

use brsp_core::OPT_Q;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AzumaBound {
    /// `2·e^{−δ²R/2}`: the chance an honest-behaving average drifts more than
    /// `δ` below its mean over `R` rounds.
    pub abort_probability: f64,
    /// `3/4 + opt_Q/4`, the honest prover's expected aggregate score.
    pub honest_target: f64,
}

pub fn azuma_abort_probability(delta: f64, rounds: u64) -> AzumaBound {
    AzumaBound {
        abort_probability: 2.0 * (-delta * delta * rounds as f64 / 2.0).exp(),
        honest_target: honest_target(),
    }
}

pub fn honest_target() -> f64 {
    0.75 + OPT_Q / 4.0
}

/// `δ⁻³ ln(2/(δω))`.
pub fn regime_min_rounds(delta: f64, omega: f64) -> f64 {
    delta.powi(-3) * (2.0 / (delta * omega)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let b = azuma_abort_probability(0.1, 2000);
        assert!((b.abort_probability - 2.0 * (-10f64).exp()).abs() < 1e-15);
        assert!((b.abort_probability - 9.08e-5).abs() < 1e-7);
        assert!(azuma_abort_probability(0.1, u64::MAX).abort_probability < 1e-300);
        assert!((b.honest_target - (0.75 + 0.25 * (0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2))).abs() < 1e-15);
    }

    #[test]
    fn regime_threshold() {
        let n = regime_min_rounds(0.2, 0.5);
        assert!((n - 125.0 * 20f64.ln()).abs() < 1e-9);
        assert!((n - 374.47).abs() < 0.01);
    }
}
