//! Per-gate depolarizing noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Every applied gate multiplies the sample amplitude by `e^{-r_n}`.
    DeterministicAttenuation,
    /// After each applied gate, with probability `1 - e^{-r_n}`, a uniformly
    /// random Pauli (identity included) hits the gate's support and the
    /// amplitude sign is flipped with probability 1/2 (dephasing of the
    /// interferometer reference). The mean amplitude damping per gate is `e^{-r_n}`.
    StochasticDepolarizing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Attenuation rate `r_n` per gate of term `n`.
    pub rates: Vec<f64>,
    pub mode: NoiseMode,
    /// Divide estimates by `q_att` (expectations) or `sqrt(q_att)` (echoes).
    pub mitigate: bool,
}

impl NoiseModel {
    pub fn new(rates: Vec<f64>, mode: NoiseMode, mitigate: bool) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("noise rate must be finite and >= 0, got {r}")));
        }
        Ok(NoiseModel { rates, mode, mitigate })
    }

    pub fn uniform(n_terms: usize, rate: f64, mode: NoiseMode, mitigate: bool) -> Result<Self> {
        Self::new(vec![rate; n_terms], mode, mitigate)
    }

    /// Probability that a gate of term `n` suffers an error event.
    pub fn error_probability(&self, n: usize) -> f64 {
        -(-self.rates[n]).exp_m1()
    }

    pub(crate) fn check_terms(&self, n_terms: usize) -> Result<()> {
        if self.rates.len() != n_terms {
            return Err(Error::InvalidArgument(format!(
                "noise model has {} rates for {n_terms} terms",
                self.rates.len()
            )));
        }
        Ok(())
    }
}
