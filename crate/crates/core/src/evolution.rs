//! Reference propagators: exact `e^{itH}`, time-ordered evolution for `H(t)`,
//! and the first-order Trotter product formula.
//!
//! Sign convention throughout is `|ψ(t)> = e^{+itH}|ψ(0)>`, i.e.
//! `d|ψ>/dt = +i H(t) |ψ>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::state::State;

/// Largest register evolved with a dense matrix exponential.
pub const DENSE_LIMIT: usize = 8;
/// Largest register accepted by the exact oracles.
pub const ORACLE_LIMIT: usize = 14;
pub const KRYLOV_TOL: f64 = 1e-10;
pub const ODE_RTOL: f64 = 1e-10;

fn check_sizes(h: &Hamiltonian, s: &State) -> Result<()> {
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: s.n_qubits() });
    }
    if h.n_qubits() > ORACLE_LIMIT {
        return Err(Error::OracleLimit { n_qubits: h.n_qubits(), limit: ORACLE_LIMIT });
    }
    Ok(())
}

/// `e^{itH}|s>` for a time-independent Hamiltonian. Registers up to
/// [`DENSE_LIMIT`] qubits use a dense scaling-and-squaring exponential,
/// larger ones a Lanczos propagator.
pub fn exact_evolve(h: &Hamiltonian, t: f64, s: &State) -> Result<State> {
    let coefficients = h.constant_coefficients()?;
    check_sizes(h, s)?;
    if t == 0.0 {
        return Ok(s.clone());
    }
    if h.n_qubits() <= DENSE_LIMIT {
        dense_evolve(h, &coefficients, t, s)
    } else {
        krylov_evolve(h, &coefficients, t, s, KRYLOV_TOL)
    }
}

pub fn dense_evolve(h: &Hamiltonian, coefficients: &[f64], t: f64, s: &State) -> Result<State> {
    check_sizes(h, s)?;
    let generator = h.to_dense_with(coefficients) * Complex64::new(0.0, t);
    let propagator = generator.exp();
    let out = propagator * DVector::from_column_slice(s.amplitudes());
    State::from_amplitudes(out.iter().copied().collect())
}

/// Lanczos propagator with adaptive sub-stepping; `tol` bounds the norm error
/// of the final state.
pub fn krylov_evolve(h: &Hamiltonian, coefficients: &[f64], t: f64, s: &State, tol: f64) -> Result<State> {
    check_sizes(h, s)?;
    let mut apply = |input: &[Complex64], out: &mut [Complex64]| h.apply_with(coefficients, input, out);
    let amplitudes = krylov_propagate(&mut apply, s.amplitudes(), t, tol);
    State::from_amplitudes(amplitudes)
}

const KRYLOV_DIM: usize = 40;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{itA} v` for Hermitian `A` given as a matvec.
pub(crate) fn krylov_propagate<F>(apply: &mut F, v: &[Complex64], t: f64, tol: f64) -> Vec<Complex64>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let dim = v.len();
    let mut current = v.to_vec();
    let total = t.abs();
    if total == 0.0 {
        return current;
    }
    let direction = t.signum();
    let mut done = 0.0;
    let mut step = total;
    let mut w = vec![Complex64::default(); dim];
    while done < total {
        let beta0 = norm(&current);
        if beta0 == 0.0 {
            break;
        }
        // Lanczos with full reorthogonalization; the basis is small.
        let mut basis: Vec<Vec<Complex64>> = vec![current.iter().map(|x| x / beta0).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut breakdown = false;
        for j in 0..KRYLOV_DIM.min(dim) {
            apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for q in &basis {
                let proj = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
            let b = norm(&w);
            if b < 1e-12 * (a.abs() + 1.0) || j + 1 == dim {
                breakdown = true;
                break;
            }
            beta.push(b);
            if j + 1 < KRYLOV_DIM.min(dim) {
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            tri[(k, k)] = alpha[k];
            if k + 1 < m {
                tri[(k, k + 1)] = beta[k];
                tri[(k + 1, k)] = beta[k];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let remaining = total - done;
        step = step.min(remaining);
        loop {
            // y = e^{i dt T} e_1
            let y: Vec<Complex64> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|k| {
                            let phase = Complex64::from_polar(1.0, direction * step * eig.eigenvalues[k]);
                            phase * eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)]
                        })
                        .sum()
                })
                .collect();
            let error = if breakdown { 0.0 } else { beta0 * beta[m - 1] * y[m - 1].norm() };
            if error <= tol * step / total || step < 1e-14 * total {
                current.iter_mut().for_each(|x| *x = Complex64::default());
                for (k, q) in basis.iter().take(m).enumerate() {
                    let coeff = y[k] * beta0;
                    current.iter_mut().zip(q).for_each(|(x, b)| *x += coeff * b);
                }
                done += step;
                if error < 0.01 * tol * step / total {
                    step *= 2.0;
                }
                break;
            }
            step *= 0.5;
        }
    }
    current
}

/// Exact reference evolution, choosing the time-ordered integrator only when
/// some coefficient depends on time.
pub fn evolve_oracle(h: &Hamiltonian, t: f64, s: &State) -> Result<State> {
    if h.is_constant() {
        exact_evolve(h, t, s)
    } else {
        exact_evolve_td(h, t, s)
    }
}

/// Time-ordered evolution `T exp(i ∫₀ᵗ H(s) ds)|s>` by adaptive
/// Dormand–Prince 5(4) integration with relative tolerance [`ODE_RTOL`].
pub fn exact_evolve_td(h: &Hamiltonian, t: f64, s: &State) -> Result<State> {
    exact_evolve_td_with_tol(h, t, s, ODE_RTOL)
}

pub fn exact_evolve_td_with_tol(h: &Hamiltonian, t: f64, s: &State, rtol: f64) -> Result<State> {
    check_sizes(h, s)?;
    if !(t >= 0.0) || t > h.horizon() {
        return Err(Error::OutsideHorizon { time: t, horizon: h.horizon() });
    }
    if t == 0.0 {
        return Ok(s.clone());
    }
    let rhs = |time: f64, y: &[Complex64], out: &mut [Complex64]| {
        let c = h.coefficients_at(time);
        h.apply_with(&c, y, out);
        out.iter_mut().for_each(|v| *v = Complex64::new(-v.im, v.re));
    };
    let y = dormand_prince(rhs, s.amplitudes(), 0.0, t, rtol, rtol * 1e-2);
    State::from_amplitudes(y)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dormand_prince<F>(rhs: F, y0: &[Complex64], t0: f64, t1: f64, rtol: f64, atol: f64) -> Vec<Complex64>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); dim]; 7];
    let mut stage = vec![Complex64::default(); dim];
    let mut y_new = vec![Complex64::default(); dim];
    let mut time = t0;
    rhs(time, &y, &mut k[0]);
    let scale0 = norm(&k[0]).max(1e-12);
    let mut h = (0.01 * norm(&y).max(1e-12) / scale0).min(t1 - t0);
    let mut rejected_last = false;
    while time < t1 {
        if time + h > t1 {
            h = t1 - time;
        }
        for s in 1..7 {
            for (i, v) in stage.iter_mut().enumerate() {
                let mut acc = y[i];
                for (j, a) in A[s].iter().take(s).enumerate() {
                    if *a != 0.0 {
                        acc += k[j][i] * (h * a);
                    }
                }
                *v = acc;
            }
            rhs(time + C[s] * h, &stage, &mut k[s]);
        }
        // The last stage was evaluated at the 5th-order solution (FSAL).
        y_new.copy_from_slice(&stage);
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = Complex64::default();
            for s in 0..7 {
                let d = B5[s] - B4[s];
                if d != 0.0 {
                    e += k[s][i] * (h * d);
                }
            }
            let sc = atol + rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = (err_sq / dim as f64).sqrt();
        if err <= 1.0 {
            time += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if rejected_last { factor.min(1.0) } else { factor };
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            rejected_last = true;
        }
    }
    y
}

/// First-order product formula `(e^{iτc₁O₁}…e^{iτc_N O_N})^{t/τ}` in term
/// order. When `t` is not a multiple of `τ` one shorter final step covers the
/// remainder.
pub fn trotter_evolve(h: &Hamiltonian, t: f64, step: f64, s: &State) -> Result<State> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("Trotter step must be positive, got {step}")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time must be non-negative, got {t}")));
    }
    let coefficients = h.constant_coefficients()?;
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: s.n_qubits() });
    }
    let full = (t / step + 1e-9).floor() as usize;
    let remainder = t - full as f64 * step;
    let mut out = s.clone();
    let slice = |out: &mut State, dt: f64| {
        for (term, c) in h.terms().iter().zip(&coefficients) {
            out.rotate_unchecked(&term.pauli, dt * c);
        }
    };
    for _ in 0..full {
        slice(&mut out, step);
    }
    if remainder > 1e-12 * step {
        slice(&mut out, remainder);
    }
    Ok(out)
}

/// `<ψ|H(t)|ψ>`.
pub fn energy(h: &Hamiltonian, t: f64, s: &State) -> f64 {
    h.terms()
        .iter()
        .map(|term| term.schedule.value(t) * s.expectation(&term.pauli).unwrap())
        .sum()
}

/// Site average of `<Z_q>`.
pub fn mean_z(s: &State) -> f64 {
    let n = s.n_qubits();
    crate::models::single_site_z(n).iter().map(|p| s.expectation(p).unwrap()).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_ising2d, build_ising2d_adiabatic};
    use crate::pauli::PauliString;
    use crate::schedule::Schedule;

    fn distance(a: &State, b: &State) -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build_ising2d(1, 3, 1.0, false).unwrap();
        let s = State::zero(3).unwrap();
        assert_eq!(exact_evolve(&h, 0.0, &s).unwrap(), s);
        assert_eq!(exact_evolve_td(&h, 0.0, &s).unwrap(), s);
    }

    #[test]
    fn single_qubit_x() {
        let h = Hamiltonian::from_constant_terms(&[(1.0, "X")]).unwrap();
        let t = 0.73;
        let out = exact_evolve(&h, t, &State::zero(1).unwrap()).unwrap();
        assert!((out.amplitudes()[0] - Complex64::new(t.cos(), 0.0)).norm() < 1e-12);
        assert!((out.amplitudes()[1] - Complex64::new(0.0, t.sin())).norm() < 1e-12);
        let z = PauliString::parse("Z").unwrap();
        assert!((out.expectation(&z).unwrap() - (2.0 * t).cos()).abs() < 1e-12);
    }

    #[test]
    fn krylov_matches_dense() {
        let h = build_ising2d(2, 3, 1.3, true).unwrap();
        let c = h.constant_coefficients().unwrap();
        let mut s = State::zero(6).unwrap();
        s.apply_h(2).unwrap();
        for t in [0.1, 0.9, 2.5, -1.1] {
            let dense = dense_evolve(&h, &c, t, &s).unwrap();
            let krylov = krylov_evolve(&h, &c, t, &s, 1e-11).unwrap();
            assert!(distance(&dense, &krylov) < 1e-9, "t={t}");
        }
    }

    #[test]
    fn td_constant_matches_exact() {
        let h = build_ising2d(1, 4, 0.8, true).unwrap();
        let s = State::basis(4, "0110").unwrap();
        let a = exact_evolve(&h, 0.7, &s).unwrap();
        let b = exact_evolve_td(&h, 0.7, &s).unwrap();
        assert!(distance(&a, &b) < 1e-8);
    }

    #[test]
    fn energy_conserved() {
        let h = build_ising2d(2, 2, 2.0, true).unwrap();
        let s = State::basis(4, "1000").unwrap();
        let e0 = energy(&h, 0.0, &s);
        for t in [0.3, 1.0, 3.0] {
            let e = energy(&h, 0.0, &exact_evolve(&h, t, &s).unwrap());
            assert!((e - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn oracle_rejects() {
        let td = build_ising2d_adiabatic(1, 2, 1.0, 1.0, false).unwrap();
        assert!(matches!(exact_evolve(&td, 0.5, &State::zero(2).unwrap()), Err(Error::NotConstant { .. })));
        let big = build_ising2d(3, 5, 1.0, true).unwrap();
        assert!(matches!(
            exact_evolve(&big, 0.5, &State::zero(15).unwrap()),
            Err(Error::OracleLimit { .. })
        ));
    }

    /// Fourth-order commutator-free Magnus integrator with exact exponentials;
    /// shares no code with the Runge–Kutta path.
    fn magnus4(h: &Hamiltonian, t: f64, s: &State, steps: usize) -> State {
        let dt = t / steps as f64;
        let r3 = 3f64.sqrt() / 6.0;
        let (a1, a2) = (0.25 + r3, 0.25 - r3);
        let mut out = s.clone();
        for k in 0..steps {
            let t0 = k as f64 * dt;
            let c1 = h.coefficients_at(t0 + (0.5 - r3) * dt);
            let c2 = h.coefficients_at(t0 + (0.5 + r3) * dt);
            let first: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a1 * x + a2 * y).collect();
            let second: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a2 * x + a1 * y).collect();
            out = dense_evolve(h, &first, dt, &out).unwrap();
            out = dense_evolve(h, &second, dt, &out).unwrap();
        }
        out
    }

    #[test]
    fn td_adiabatic_matches_magnus_oracle() {
        let h = build_ising2d_adiabatic(1, 6, 2.5, 1.0, true).unwrap();
        let s = State::zero(6).unwrap();
        let rk = exact_evolve_td(&h, 1.0, &s).unwrap();
        let m1 = magnus4(&h, 1.0, &s, 200);
        let m2 = magnus4(&h, 1.0, &s, 400);
        // Richardson on a 4th-order method.
        assert!(distance(&m1, &m2) < 1e-8);
        let e_rk = energy(&h, 1.0, &rk) / 6.0;
        let e_m = energy(&h, 1.0, &m2) / 6.0;
        assert!((e_rk - e_m).abs() < 1e-9, "{e_rk} vs {e_m}");
        assert!(distance(&rk, &m2) < 1e-8);
    }

    #[test]
    fn trotter_commuting_terms_exact() {
        let h = Hamiltonian::from_constant_terms(&[(0.4, "ZZI"), (-1.1, "IZZ"), (0.3, "ZIZ")]).unwrap();
        let mut s = State::zero(3).unwrap();
        for q in 0..3 {
            s.apply_h(q).unwrap();
        }
        let exact = exact_evolve(&h, 1.3, &s).unwrap();
        for step in [0.5, 0.07, 2.0] {
            assert!(distance(&trotter_evolve(&h, 1.3, step, &s).unwrap(), &exact) < 1e-12);
        }
        assert!(trotter_evolve(&h, 1.0, 0.0, &s).is_err());
    }

    #[test]
    fn trotter_first_order_convergence() {
        let h = build_ising2d(1, 4, 1.0, true).unwrap();
        let s = State::zero(4).unwrap();
        let exact = exact_evolve(&h, 1.0, &s).unwrap();
        let steps = [0.02, 0.01, 0.005, 0.0025];
        let errors: Vec<f64> = steps.iter().map(|&dt| distance(&trotter_evolve(&h, 1.0, dt, &s).unwrap(), &exact)).collect();
        let xs: Vec<f64> = steps.iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn trotter_residual_step_keeps_time_exact() {
        // A single term commutes with itself, so any split is exact.
        let h = Hamiltonian::from_constant_terms(&[(1.0, "X")]).unwrap();
        let s = State::zero(1).unwrap();
        let out = trotter_evolve(&h, 1.0, 0.3, &s).unwrap();
        assert!(distance(&out, &exact_evolve(&h, 1.0, &s).unwrap()) < 1e-14);
    }

    #[test]
    fn schedule_scaling_used_by_td() {
        let h = Hamiltonian::new(
            1,
            vec![crate::hamiltonian::Term {
                pauli: PauliString::parse("X").unwrap(),
                schedule: Schedule::Linear { intercept: 0.0, slope: 1.0 },
            }],
        )
        .unwrap();
        // Commuting in time: phase is ∫ s ds = t²/2.
        let out = exact_evolve_td(&h, 1.2, &State::zero(1).unwrap()).unwrap();
        let angle: f64 = 0.72;
        assert!((out.amplitudes()[0] - Complex64::new(angle.cos(), 0.0)).norm() < 1e-9);
        assert!((out.amplitudes()[1] - Complex64::new(0.0, angle.sin())).norm() < 1e-9);
    }
}
