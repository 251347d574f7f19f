//! Planning quantities: noise-optimal angles and shot budgets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::tetris::AngleAssignment;

/// Angle returned for a noiseless term, where the optimum `τ → 0` would need
/// unboundedly many gates.
pub const FLOOR_ANGLE: f64 = 1e-4;

const GOLDEN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMethod {
    /// `τ* = sqrt(2r)`.
    SmallR,
    /// Golden-section minimum of `tan(τ/2) + r / sin τ`.
    Numeric,
}

/// Per-gate cost whose minimum over `τ` maximizes `λ_att · q_att`.
pub fn attenuation_cost(tau: f64, rate: f64) -> f64 {
    (0.5 * tau).tan() + rate / tau.sin()
}

pub fn optimal_angle(rate: f64, method: AngleMethod) -> Result<f64> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise rate must be finite and >= 0, got {rate}")));
    }
    if rate == 0.0 {
        return Ok(FLOOR_ANGLE);
    }
    let tau = match method {
        AngleMethod::SmallR => (2.0 * rate).sqrt(),
        AngleMethod::Numeric => golden_section(|tau| attenuation_cost(tau, rate), 0.0, std::f64::consts::FRAC_PI_2, GOLDEN_TOL),
    };
    Ok(tau.clamp(FLOOR_ANGLE, std::f64::consts::FRAC_PI_2))
}

pub fn optimal_angles(rates: &[f64], method: AngleMethod) -> Result<AngleAssignment> {
    let angles = rates.iter().map(|&r| optimal_angle(r, method)).collect::<Result<Vec<_>>>()?;
    AngleAssignment::new(angles)
}

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise rate must be finite and >= 0, got {rate}")));
    }
    Ok(())
}

/// `Σ_n ∫_0^t |c_n(s)| ds`, equal to `t Σ|c_n|` for constant coefficients.
pub fn integrated_norm(h: &Hamiltonian, t: f64) -> Result<f64> {
    h.terms().iter().map(|term| term.schedule.z(t)).sum()
}

/// Natural log of `shots_tetris`.
pub fn log_shots_tetris(h: &Hamiltonian, t: f64, epsilon: f64, rate: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_rate(rate)?;
    Ok(4.0 * (2.0 * rate).sqrt() * integrated_norm(h, t)? - 2.0 * epsilon.ln())
}

/// `exp(4 t sqrt(2r) Σ|c_n|) / ε²`.
pub fn shots_tetris(h: &Hamiltonian, t: f64, epsilon: f64, rate: f64) -> Result<f64> {
    log_shots_tetris(h, t, epsilon, rate).map(f64::exp)
}

/// Natural log of `shots_trotter`.
pub fn log_shots_trotter(n_terms: usize, t: f64, epsilon: f64, c: f64, rate: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_rate(rate)?;
    if !(c >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidArgument("t and C must be >= 0".into()));
    }
    let n = n_terms as f64;
    Ok(2.0 * n * n * t.powi(3) * c * rate / epsilon - 2.0 * epsilon.ln())
}

/// `exp(2 N² t³ C r / ε) / ε²` for first-order Trotter.
pub fn shots_trotter(n_terms: usize, t: f64, epsilon: f64, c: f64, rate: f64) -> Result<f64> {
    log_shots_trotter(n_terms, t, epsilon, c, rate).map(f64::exp)
}

/// Precision below which the tetris shot count grows more slowly than
/// Trotter's: `t² N² C sqrt(r) / (2 sqrt(2) Σ|c_n|)`.
pub fn crossover_epsilon(h: &Hamiltonian, n_terms: usize, t: f64, c: f64, rate: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_rate(rate)?;
    let norm = integrated_norm(h, t)? / t;
    check_positive("coefficient norm", norm)?;
    let n = n_terms as f64;
    Ok(t * t * n * n * c * rate.sqrt() / (2.0 * std::f64::consts::SQRT_2 * norm))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub m_tetris: f64,
    pub m_trotter: f64,
    pub epsilon: f64,
    pub trotter_error_coefficient: f64,
}

impl ShotEstimate {
    /// Uses the Hamiltonian's own term count as `N`.
    pub fn new(h: &Hamiltonian, t: f64, epsilon: f64, c: f64, rate: f64) -> Result<Self> {
        Ok(ShotEstimate {
            m_tetris: shots_tetris(h, t, epsilon, rate)?,
            m_trotter: shots_trotter(h.n_terms(), t, epsilon, c, rate)?,
            epsilon,
            trotter_error_coefficient: c,
        })
    }
}
