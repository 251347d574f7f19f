//! Realizing a small rotation `e^{iτ'O}` by applying a larger one `e^{iτO}`
//! at random: `(1 - p) + p e^{iτO} = λ e^{iτ'O}` for any `O` with `O² = I`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::state::State;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingParams {
    /// Probability of applying the realized gate.
    pub p: f64,
    /// Realized angle.
    pub tau: f64,
    /// Target angle.
    pub target: f64,
    /// Amplitude attenuation `λ`.
    pub lambda: f64,
}

/// Mixing probability and attenuation for target angle `target` realized with
/// angle `tau`. Requires `0 <= |target| <= |tau| <= pi/2` with matching signs.
///
/// Uses `p = sin τ' / (sin τ' + sin(τ - τ'))` and `λ = sin τ / (sin τ' + sin(τ - τ'))`,
/// algebraically equal to the tangent form but free of the pole at `τ' = pi/2`.
pub fn mixing_params(target: f64, tau: f64) -> Result<MixingParams> {
    let bad = || Error::InvalidMixing { target, realized: tau };
    if !target.is_finite() || !tau.is_finite() {
        return Err(bad());
    }
    if target.abs() > tau.abs() || tau.abs() > FRAC_PI_2 {
        return Err(bad());
    }
    if target != 0.0 && target.signum() != tau.signum() {
        return Err(bad());
    }
    if target == 0.0 {
        return Ok(MixingParams { p: 0.0, tau, target, lambda: 1.0 });
    }
    let denom = target.sin() + (tau - target).sin();
    Ok(MixingParams { p: target.sin() / denom, tau, target, lambda: tau.sin() / denom })
}

impl MixingParams {
    /// `(1 - p) + p e^{i s τ}` on the eigenvalue branch `s = ±1`.
    pub fn mixture(&self, branch: f64) -> Complex64 {
        Complex64::new(1.0 - self.p, 0.0) + Complex64::from_polar(self.p, branch * self.tau)
    }

    /// `λ e^{i s τ'}` on the eigenvalue branch `s = ±1`.
    pub fn target_phase(&self, branch: f64) -> Complex64 {
        Complex64::from_polar(self.lambda, branch * self.target)
    }
}

pub const MAX_SUBSET_GATES: usize = 5;

/// Exhaustive check of the subset expansion for a circuit of `G` Pauli
/// rotations with target angles `τ'_g`, each realized with angle `tau`
/// (same sign as the target):
///
/// `lhs = Σ_{S,S'} w(S) w(S') <ψ_{S'}|M|ψ_S>`, `rhs = Π_g λ_g² <ψ|M|ψ>`,
///
/// where `ψ_S` deletes the gates in `S` and realizes the others with `tau`,
/// and `w(S) = Π_{g∈S}(1 - p_g) Π_{g∉S} p_g`. A test oracle, exponential in `G`.
pub fn subset_identity_check(
    gates: &[(PauliString, f64)],
    observable: &PauliString,
    initial: &State,
    tau: f64,
) -> Result<(Complex64, Complex64)> {
    let g = gates.len();
    if g > MAX_SUBSET_GATES {
        return Err(Error::TooManyGates { got: g, max: MAX_SUBSET_GATES });
    }
    let params = gates
        .iter()
        .map(|(_, target)| mixing_params(*target, if *target < 0.0 { -tau.abs() } else { tau.abs() }))
        .collect::<Result<Vec<_>>>()?;

    let mut ideal = initial.clone();
    for (pauli, target) in gates {
        ideal.apply_pauli_rotation(pauli, *target)?;
    }
    let attenuation: f64 = params.iter().map(|m| m.lambda * m.lambda).product();
    let rhs = ideal.matrix_element(observable, &ideal)? * attenuation;

    let subsets = 1usize << g;
    let mut states = Vec::with_capacity(subsets);
    let mut weights = Vec::with_capacity(subsets);
    for deleted in 0..subsets {
        let mut s = initial.clone();
        let mut w = 1.0;
        for (k, ((pauli, _), m)) in gates.iter().zip(&params).enumerate() {
            if deleted >> k & 1 == 1 {
                w *= 1.0 - m.p;
            } else {
                s.apply_pauli_rotation(pauli, m.tau)?;
                w *= m.p;
            }
        }
        states.push(s);
        weights.push(w);
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    for (ket, wk) in states.iter().zip(&weights) {
        for (bra, wb) in states.iter().zip(&weights) {
            lhs += bra.matrix_element(observable, ket)? * (wk * wb);
        }
    }
    Ok((lhs, rhs))
}
