//! Dense state vectors over a handful of qubits.
//!
//! Qubit `i` is bit `i` of the basis index. Angles are indices `k ∈ Z₈`
//! standing for `kπ/4`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use brsp_core::qsim::QubitState;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{DqcError, Result};

/// Largest register the engine will allocate.
pub const MAX_QUBITS: usize = 12;

/// `e^{ikπ/4}`.
pub fn phase(k: u8) -> Complex64 {
    Complex64::from_polar(1.0, f64::from(k % 8) * FRAC_PI_4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|q₀⟩ ⊗ |q₁⟩ ⊗ …` with `q₀` on bit 0.
    pub fn product(qubits: &[QubitState]) -> Result<Self> {
        if qubits.len() > MAX_QUBITS {
            return Err(DqcError::TooManyQubits { qubits: qubits.len(), limit: MAX_QUBITS });
        }
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for (i, q) in qubits.iter().enumerate() {
            let [a0, a1] = q.amplitudes();
            let mut next = vec![Complex64::new(0.0, 0.0); amps.len() * 2];
            for (x, &a) in amps.iter().enumerate() {
                next[x] = a * a0;
                next[x | (1 << i)] = a * a1;
            }
            amps = next;
        }
        Ok(StateVector { qubits: qubits.len(), amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let mask = (1 << a) | (1 << b);
        for (x, amp) in self.amps.iter_mut().enumerate() {
            if x & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Applies the 2×2 matrix `m` (row-major) to qubit `q`.
    pub fn apply(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1 << q;
        for x in (0..self.amps.len()).filter(|x| x & bit == 0) {
            let (a0, a1) = (self.amps[x], self.amps[x | bit]);
            self.amps[x] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[x | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Unnormalized projection amplitudes `⟨±_k|_q ψ` for outcome `b`.
    fn project_xy(&self, q: usize, k: u8, b: u8) -> Vec<(usize, Complex64)> {
        let bit = 1 << q;
        let coeff = phase(8 - k % 8) * if b == 0 { 1.0 } else { -1.0 };
        (0..self.amps.len())
            .filter(|x| x & bit == 0)
            .map(|x| (x, (self.amps[x] + coeff * self.amps[x | bit]) * FRAC_1_SQRT_2))
            .collect()
    }

    /// Probability of outcome `b` when qubit `q` is measured in the basis
    /// `{|+_k⟩, |−_k⟩}` (outcome 0 is `|+_k⟩`).
    pub fn xy_probability(&self, q: usize, k: u8, b: u8) -> f64 {
        self.project_xy(q, k, b).iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Measures qubit `q` in the `{|+_k⟩, |−_k⟩}` basis and collapses it.
    pub fn measure_xy<R: Rng + ?Sized>(&mut self, q: usize, k: u8, rng: &mut R) -> u8 {
        let b = u8::from(rng.random::<f64>() >= self.xy_probability(q, k, 0));
        self.project(q, k, b);
        b
    }

    /// Collapses qubit `q` onto `|+_k⟩` (`b = 0`) or `|−_k⟩` and renormalizes.
    /// The outcome must have nonzero probability.
    pub fn project(&mut self, q: usize, k: u8, b: u8) {
        let proj = self.project_xy(q, k, b);
        let norm = proj.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        let bit = 1 << q;
        let back = phase(k) * if b == 0 { 1.0 } else { -1.0 };
        for (x, a) in proj {
            let a = a / norm * FRAC_1_SQRT_2;
            self.amps[x] = a;
            self.amps[x | bit] = back * a;
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        assert_eq!(self.qubits, other.qubits, "register sizes differ");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }
}
