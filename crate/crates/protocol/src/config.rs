use std::fmt;
use std::str::FromStr;

use brsp_core::entcf::{Backend, BackendParams, LweParams};
use serde::{Deserialize, Serialize};

use crate::azuma;
use crate::error::ProtocolError;

/// The basis `W` the verifier wants the prover's final qubit prepared in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl FromStr for Basis {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            _ => Err(ProtocolError::Config(format!("unknown basis `{s}`"))),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

/// Whether step 3(b) measurements go through the measurement buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferMode {
    /// The prover declares its measurements and deposits its state; the
    /// buffer measures on the verifier's challenge.
    Buffered,
    /// The prover measures locally and reports a bit.
    Direct,
}

/// How verifier and prover exchange frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    /// Same thread: each frame is handed straight to the prover. Fastest; used
    /// for Monte Carlo sweeps.
    Local,
    /// Prover on its own thread, frames over in-process channels.
    InProc,
    /// Prover on its own thread, frames over a loopback TCP connection.
    Tcp,
}

impl FromStr for TransportMode {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(TransportMode::Local),
            "inproc" => Ok(TransportMode::InProc),
            "tcp" => Ok(TransportMode::Tcp),
            _ => Err(ProtocolError::Config(format!("unknown transport `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Security-parameter proxy: the Mock domain width. The Lwe backend uses
    /// its fixed desk parameters.
    pub lambda: u32,
    /// Maximum number of test rounds `N`.
    pub max_rounds: u64,
    pub delta: f64,
    pub basis: Basis,
    pub backend: Backend,
    pub buffer_mode: BufferMode,
    pub transport: TransportMode,
    pub seed: u64,
    /// Target `ω` used only for the soundness-regime flag.
    pub omega: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            lambda: 16,
            max_rounds: 2000,
            delta: 0.15,
            basis: Basis::X,
            backend: Backend::Mock,
            buffer_mode: BufferMode::Direct,
            transport: TransportMode::Local,
            seed: 0,
            omega: 0.5,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.max_rounds == 0 {
            return Err(ProtocolError::Config("max_rounds must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ProtocolError::Config(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(ProtocolError::Config(format!("omega = {} must lie in (0, 1]", self.omega)));
        }
        if self.backend == Backend::Mock && !(1..=63).contains(&self.lambda) {
            return Err(ProtocolError::Config(format!("Mock width lambda = {} must lie in 1..=63", self.lambda)));
        }
        Ok(())
    }

    pub fn backend_params(&self) -> BackendParams {
        match self.backend {
            Backend::Mock => BackendParams::Mock { w: self.lambda },
            Backend::Lwe => BackendParams::Lwe(LweParams::desk()),
        }
    }

    /// Whether `N ≥ δ⁻³ ln(2/(δω))`, the round count the soundness argument needs.
    pub fn in_soundness_regime(&self) -> bool {
        self.max_rounds as f64 >= azuma::regime_min_rounds(self.delta, self.omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProtocolConfig::default().validate().is_ok());
        for bad in [
            ProtocolConfig { max_rounds: 0, ..Default::default() },
            ProtocolConfig { delta: 0.0, ..Default::default() },
            ProtocolConfig { delta: 1.0, ..Default::default() },
            ProtocolConfig { lambda: 64, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
        let lwe = ProtocolConfig { backend: Backend::Lwe, lambda: 200, ..Default::default() };
        assert!(lwe.validate().is_ok());
    }

    #[test]
    fn regime_flag() {
        let cfg = ProtocolConfig { delta: 0.2, omega: 0.5, max_rounds: 375, ..Default::default() };
        assert!(cfg.in_soundness_regime());
        assert!(!ProtocolConfig { max_rounds: 374, ..cfg }.in_soundness_regime());
    }
}
