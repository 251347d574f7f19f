//! Randomized "tetris" simulation of continuous-time Hamiltonian dynamics.
//!
//! Gates `e^{iτ sgn(c_n) O_n}` with a fixed, finite angle `τ` are dropped onto
//! the initial state at the times of independent Poisson processes. Averaging
//! `<ψ_T'|M|ψ_T>` over pairs of such random circuits and dividing by a known
//! attenuation factor reproduces `<ψ(t)|M|ψ(t)>` with no product-formula
//! (Trotter) error. The crate provides the samplers and estimators together
//! with a dense statevector engine and exact-evolution oracles to check them.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod clifford_t;
pub mod error;
pub mod estimator;
pub mod evolution;
pub mod fermion;
pub mod hamiltonian;
pub mod mixing;
pub mod models;
pub mod noise;
pub mod pauli;
pub mod schedule;
pub mod state;
pub mod tetris;

pub use error::{Error, Result};
pub use fermion::{jordan_wigner, FermionTermSet};
pub use hamiltonian::{Hamiltonian, Term};
pub use pauli::{PauliLetter, PauliString};
pub use schedule::{IntegratedSchedule, Interpolation, Schedule};
pub use state::State;
