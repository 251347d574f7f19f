//! Built-in model Hamiltonians.

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Term};
use crate::pauli::{PauliLetter, PauliString};
use crate::schedule::Schedule;

/// Nearest-neighbour bonds of a `rows x cols` square lattice, site index
/// `r * cols + c`. Periodic wrap-around bonds that duplicate an existing bond
/// (side length 2) or close on themselves (side length 1) are dropped.
pub fn square_lattice_bonds(rows: usize, cols: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = Vec::new();
    let mut push = |a: usize, b: usize| {
        if a == b {
            return;
        }
        let key = (a.min(b), a.max(b));
        if !bonds.contains(&key) {
            bonds.push(key);
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let site = r * cols + c;
            if c + 1 < cols {
                push(site, r * cols + c + 1);
            } else if periodic {
                push(site, r * cols);
            }
            if r + 1 < rows {
                push(site, (r + 1) * cols + c);
            } else if periodic {
                push(site, c);
            }
        }
    }
    bonds
}

/// Transverse-field Ising model `H = -Σ_<ij> Z_i Z_j - h Σ_j X_j`.
/// ZZ bonds come first, then one X term per site.
pub fn build_ising2d(rows: usize, cols: usize, h: f64, periodic: bool) -> Result<Hamiltonian> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("lattice dimensions must be positive".into()));
    }
    if !h.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite field {h}")));
    }
    let n = rows * cols;
    if n > crate::pauli::MAX_QUBITS {
        return Err(Error::TooManyQubits { got: n, max: crate::pauli::MAX_QUBITS });
    }
    let mut terms = Vec::new();
    for (a, b) in square_lattice_bonds(rows, cols, periodic) {
        let mask = (1u64 << a) | (1u64 << b);
        terms.push(Term::constant(PauliString::from_masks(n, 0, mask)?, -1.0));
    }
    if h != 0.0 {
        for q in 0..n {
            terms.push(Term::constant(PauliString::single(n, q, PauliLetter::X)?, -h));
        }
    }
    Hamiltonian::new(n, terms)
}

/// `h(t) = h_f sin(pi/2 sin(pi t / 2T_f)^2)^2`.
pub fn adiabatic_field(h_final: f64, ramp_time: f64) -> Result<Schedule> {
    if !(ramp_time > 0.0) || !h_final.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "adiabatic field needs T_f > 0 and finite h_f (got {ramp_time}, {h_final})"
        )));
    }
    Ok(Schedule::Adiabatic { amplitude: h_final, ramp_time })
}

/// Ising model whose transverse field follows [`adiabatic_field`], so every X
/// term carries the coefficient `-h(t)`.
pub fn build_ising2d_adiabatic(
    rows: usize,
    cols: usize,
    h_final: f64,
    ramp_time: f64,
    periodic: bool,
) -> Result<Hamiltonian> {
    let field = adiabatic_field(h_final, ramp_time)?;
    // Build with a unit field so the X terms are present, then swap in the ramp.
    let base = build_ising2d(rows, cols, 1.0, periodic)?;
    Ok(base.with_schedules(|t| if t.pauli.is_diagonal() { None } else { Some(field.scaled(-1.0)) }))
}

/// Site-averaged `Z` observables, one per qubit.
pub fn single_site_z(n_qubits: usize) -> Vec<PauliString> {
    (0..n_qubits)
        .map(|q| PauliString::single(n_qubits, q, PauliLetter::Z).unwrap())
        .collect()
}
