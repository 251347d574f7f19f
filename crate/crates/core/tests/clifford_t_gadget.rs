use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tetris_core::clifford_t::{gadget_attenuation, t_gadget_estimate, GadgetMode, Gate, GateCircuit};
use tetris_core::{PauliString, State};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense single-qubit gate `u` on `qubit` (qubit 0 is the low bit).
fn embed(n: usize, qubit: usize, u: [[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |r, col| {
        if (r ^ col) & !(1 << qubit) != 0 {
            return c(0.0, 0.0);
        }
        u[(r >> qubit) & 1][(col >> qubit) & 1]
    })
}

fn dense_gate(n: usize, gate: Gate) -> DMatrix<Complex64> {
    let r = FRAC_1_SQRT_2;
    match gate {
        Gate::H(q) => embed(n, q, [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]),
        Gate::S(q) => embed(n, q, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]),
        Gate::T(q) => embed(n, q, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, FRAC_PI_4)]]),
        Gate::CX(ctl, tgt) => {
            let dim = 1 << n;
            DMatrix::from_fn(dim, dim, |row, col| {
                let image = if col >> ctl & 1 == 1 { col ^ (1 << tgt) } else { col };
                if row == image { c(1.0, 0.0) } else { c(0.0, 0.0) }
            })
        }
    }
}

fn dense_circuit(circuit: &GateCircuit) -> DMatrix<Complex64> {
    let dim = 1 << circuit.n_qubits();
    circuit.gates().iter().fold(DMatrix::identity(dim, dim), |acc, &g| dense_gate(circuit.n_qubits(), g) * acc)
}

fn oracle_expectation(circuit: &GateCircuit, observable: &PauliString) -> f64 {
    let dim = 1 << circuit.n_qubits();
    let mut zero = DVector::zeros(dim);
    zero[0] = c(1.0, 0.0);
    let psi = dense_circuit(circuit) * zero;
    (psi.adjoint() * observable.to_dense() * &psi)[(0, 0)].re
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, n_t: usize, n_clifford: usize) -> GateCircuit {
    let mut gates: Vec<Gate> = (0..n_clifford)
        .map(|_| match rng.gen_range(0..3) {
            0 => Gate::H(rng.gen_range(0..n)),
            1 => Gate::S(rng.gen_range(0..n)),
            _ => {
                let a = rng.gen_range(0..n);
                Gate::CX(a, (a + rng.gen_range(1..n)) % n)
            }
        })
        .collect();
    for _ in 0..n_t {
        let at = rng.gen_range(0..=gates.len());
        gates.insert(at, Gate::T(rng.gen_range(0..n)));
    }
    // Start from a superposition so T gates act nontrivially.
    gates.insert(0, Gate::H(0));
    GateCircuit::new(n, gates).unwrap()
}

#[test]
fn exact_circuit_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let circuit = random_circuit(&mut rng, 3, 3, 8);
        let mut s = State::zero(3).unwrap();
        circuit.apply(&mut s).unwrap();
        let dim = 8;
        let mut zero = DVector::zeros(dim);
        zero[0] = c(1.0, 0.0);
        let want = dense_circuit(&circuit) * zero;
        for (a, b) in s.amplitudes().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}

#[test]
fn branch_average_reproduces_attenuated_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let circuit = random_circuit(&mut rng, 3, 3, 6);
        let g = circuit.t_count();
        let mut exact = State::zero(3).unwrap();
        circuit.apply(&mut exact).unwrap();
        let mut average = [c(0.0, 0.0); 8];
        for mask in 0..1u32 << g {
            let rotate: Vec<bool> = (0..g).map(|k| mask >> k & 1 == 1).collect();
            let mut s = State::zero(3).unwrap();
            circuit.apply_branches(&mut s, &rotate).unwrap();
            for (acc, a) in average.iter_mut().zip(s.amplitudes()) {
                *acc += a / (1u32 << g) as f64;
            }
        }
        let scale = gadget_attenuation().powi(g as i32);
        for (a, e) in average.iter().zip(exact.amplitudes()) {
            assert!((a - e * scale).norm() < 1e-14);
        }
    }
}

#[test]
fn h_then_t_converges_to_cos_pi_over_4() {
    let circuit = GateCircuit::parse("H 0\nT 0\n", None).unwrap();
    let x = PauliString::parse("X").unwrap();
    assert!((oracle_expectation(&circuit, &x) - FRAC_1_SQRT_2).abs() < 1e-14);
    let r = t_gadget_estimate(&circuit, &x, 100_000, 10, GadgetMode::TwoCopy).unwrap();
    assert!((r.mean.re - FRAC_1_SQRT_2).abs() < 3.0 * r.stderr_re, "{} ± {}", r.mean.re, r.stderr_re);
    assert!((r.report.lambda_att - gadget_attenuation().powi(2)).abs() < 1e-15);
}

#[test]
fn raw_mean_attenuation_per_t_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in 1..=3 {
        // First random circuit whose expectation is clearly nonzero.
        let (circuit, observable, want) = loop {
            let circuit = random_circuit(&mut rng, 2, g, 5);
            let observable = PauliString::parse(["XI", "YI", "ZI", "XX", "ZZ", "IX"][rng.gen_range(0..6)]).unwrap();
            let want = oracle_expectation(&circuit, &observable);
            if want.abs() > 0.3 {
                break (circuit, observable, want);
            }
        };
        let r = t_gadget_estimate(&circuit, &observable, 50_000, 30 + g as u64, GadgetMode::TwoCopy).unwrap();
        let scale = gadget_attenuation().powi(2 * g as i32);
        let raw_se = r.stderr_re * scale;
        assert!((r.raw_mean.re.abs() - scale * want.abs()).abs() < 3.0 * raw_se, "G_T={g}: {} vs {}", r.raw_mean.re, scale * want);
        assert!((r.mean.re - want).abs() < 3.0 * r.stderr_re);
    }
}

#[test]
fn corrected_spread_scales_with_t_count() {
    // H then G_T T gates on one qubit, measuring X.
    let x = PauliString::parse("X").unwrap();
    let normalized: Vec<f64> = (1..=5)
        .map(|g| {
            let text = format!("H 0\n{}", "T 0\n".repeat(g));
            let circuit = GateCircuit::parse(&text, None).unwrap();
            let r = t_gadget_estimate(&circuit, &x, 20_000, 50 + g as u64, GadgetMode::TwoCopy).unwrap();
            r.sample_std_re() * gadget_attenuation().powi(2 * g as i32)
        })
        .collect();
    let max = normalized.iter().cloned().fold(f64::MIN, f64::max);
    let min = normalized.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 2.0, "{normalized:?}");
}

#[test]
fn amplitude_mode_matches_dense_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let circuit = random_circuit(&mut rng, 2, 2, 4);
    let z = PauliString::parse("ZI").unwrap();
    let mut zero = DVector::zeros(4);
    zero[0] = c(1.0, 0.0);
    let want = (zero.adjoint() * z.to_dense() * dense_circuit(&circuit) * &zero)[(0, 0)];
    let r = t_gadget_estimate(&circuit, &z, 50_000, 9, GadgetMode::Amplitude).unwrap();
    assert!((r.mean.re - want.re).abs() < 3.0 * r.stderr_re + 1e-12, "{} vs {want}", r.mean);
    assert!((r.mean.im - want.im).abs() < 3.0 * r.stderr_im + 1e-12, "{} vs {want}", r.mean);
    assert!((r.report.lambda_att - gadget_attenuation().powi(2)).abs() < 1e-15);
}
