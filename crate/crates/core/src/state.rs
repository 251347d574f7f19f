//! Dense statevector. Qubit 0 is the least-significant bit of the amplitude
//! index, and character `k` of a bitstring sets qubit `k`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{times_i_pow, PauliString};

/// Largest register the dense engine will allocate.
pub const MAX_STATE_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl State {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis_index(n_qubits, 0)
    }

    pub fn basis_index(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_STATE_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "register size must be in 1..={MAX_STATE_QUBITS}, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, limit: dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(State { n_qubits, amplitudes })
    }

    /// Computational basis state from a bitstring over `{0,1}`.
    pub fn basis(n_qubits: usize, bits: &str) -> Result<Self> {
        let len = bits.chars().count();
        if len != n_qubits {
            return Err(Error::QubitMismatch { expected: n_qubits, got: len });
        }
        let mut index = 0usize;
        for (q, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => index |= 1 << q,
                other => {
                    return Err(Error::InvalidArgument(format!("invalid bit {other:?} at position {q}")))
                }
            }
        }
        Self::basis_index(n_qubits, index)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("amplitude count {dim} is not a power of two")));
        }
        Ok(State { n_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, got: p.n_qubits() });
        }
        Ok(())
    }

    fn check_state(&self, other: &State) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        Ok(())
    }

    /// `|s> <- e^{iθP}|s> = cos θ |s> + i sin θ P|s>`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check_pauli(p)?;
        self.rotate_unchecked(p, theta);
        Ok(())
    }

    pub(crate) fn rotate_unchecked(&mut self, p: &PauliString, theta: f64) {
        let (sin, cos) = theta.sin_cos();
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        let amps = &mut self.amplitudes;
        if x == 0 {
            let plus = Complex64::new(cos, sin);
            let minus = Complex64::new(cos, -sin);
            if z == 0 {
                amps.iter_mut().for_each(|a| *a *= plus);
            } else {
                for (b, a) in amps.iter_mut().enumerate() {
                    *a *= if (b & z).count_ones() & 1 == 0 { plus } else { minus };
                }
            }
            return;
        }
        // i sin θ · i^{|x&z|}: the part of the phase shared by every pair.
        let base = times_i_pow(Complex64::new(sin, 0.0), 1 + (x & z).count_ones());
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..amps.len() {
            if b & top != 0 {
                continue;
            }
            let partner = b ^ x;
            let (a0, a1) = (amps[b], amps[partner]);
            // P|b> = ph(b)|partner>, P|partner> = ph(partner)|b>.
            let ph_b = if (b & z).count_ones() & 1 == 0 { base } else { -base };
            let ph_p = if (partner & z).count_ones() & 1 == 0 { base } else { -base };
            amps[b] = a0 * cos + ph_p * a1;
            amps[partner] = a1 * cos + ph_b * a0;
        }
    }

    /// `|s> <- P|s>`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_pauli(p)?;
        self.apply_pauli_unchecked(p);
        Ok(())
    }

    pub(crate) fn apply_pauli_unchecked(&mut self, p: &PauliString) {
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        let base = times_i_pow(Complex64::new(1.0, 0.0), (x & z).count_ones());
        let amps = &mut self.amplitudes;
        if x == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                if (b & z).count_ones() & 1 == 1 {
                    *a = -*a;
                }
            }
            return;
        }
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..amps.len() {
            if b & top != 0 {
                continue;
            }
            let partner = b ^ x;
            let (a0, a1) = (amps[b], amps[partner]);
            let ph_b = if (b & z).count_ones() & 1 == 0 { base } else { -base };
            let ph_p = if (partner & z).count_ones() & 1 == 0 { base } else { -base };
            amps[partner] = ph_b * a0;
            amps[b] = ph_p * a1;
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// `<self|ket>`, conjugating `self`.
    pub fn inner_product(&self, ket: &State) -> Result<Complex64> {
        self.check_state(ket)?;
        Ok(self.amplitudes.iter().zip(&ket.amplitudes).map(|(b, k)| b.conj() * k).sum())
    }

    /// `<self|P|ket>` without materializing `P|ket>`.
    pub fn matrix_element(&self, p: &PauliString, ket: &State) -> Result<Complex64> {
        self.check_state(ket)?;
        self.check_pauli(p)?;
        Ok(self.matrix_element_unchecked(p, ket))
    }

    pub(crate) fn matrix_element_unchecked(&self, p: &PauliString, ket: &State) -> Complex64 {
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_neg = Complex64::new(0.0, 0.0);
        for (b, k) in ket.amplitudes.iter().enumerate() {
            let term = self.amplitudes[b ^ x].conj() * k;
            if (b & z).count_ones() & 1 == 0 {
                acc += term;
            } else {
                acc_neg += term;
            }
        }
        times_i_pow(acc - acc_neg, (x & z).count_ones())
    }

    /// `Re <s|P|s>`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        Ok(self.matrix_element(p, self)?.re)
    }

    /// Hadamard on `qubit`.
    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for b in 0..self.amplitudes.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amplitudes[b], self.amplitudes[b | bit]);
                self.amplitudes[b] = (a0 + a1) * r;
                self.amplitudes[b | bit] = (a0 - a1) * r;
            }
        }
        Ok(())
    }

    /// `diag(1, phase)` on `qubit`.
    pub fn apply_phase(&mut self, qubit: usize, phase: Complex64) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            if b & bit != 0 {
                *a *= phase;
            }
        }
        Ok(())
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidArgument("CX control equals target".into()));
        }
        let (cb, tb) = (1usize << control, 1usize << target);
        for b in 0..self.amplitudes.len() {
            if b & cb != 0 && b & tb == 0 {
                self.amplitudes.swap(b, b | tb);
            }
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::IndexOutOfRange { index: qubit, limit: self.n_qubits });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> State {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        State::from_amplitudes(vec![c(r, 0.0), c(r, 0.0)]).unwrap()
    }

    #[test]
    fn basis_states() {
        let s = State::basis(1, "0").unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        let s = State::basis(2, "10").unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        assert!(matches!(State::basis(2, "1"), Err(Error::QubitMismatch { .. })));
        assert!(State::basis(2, "1x").is_err());
    }

    #[test]
    fn rotation_examples() {
        let x = PauliString::parse("X").unwrap();
        let mut s = State::basis(1, "0").unwrap();
        s.apply_pauli_rotation(&x, 0.0).unwrap();
        assert_eq!(s, State::basis(1, "0").unwrap());
        s.apply_pauli_rotation(&x, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((s.amplitudes()[0]).norm() < 1e-16);
        assert!((s.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-15);

        let z = PauliString::parse("Z").unwrap();
        let mut s = plus();
        s.apply_pauli_rotation(&z, 0.3).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - Complex64::from_polar(r, 0.3)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::from_polar(r, -0.3)).norm() < 1e-15);
        assert!(s.apply_pauli_rotation(&PauliString::parse("ZZ").unwrap(), 0.1).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let s = plus();
        assert!((s.inner_product(&s).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let zero = State::basis(1, "0").unwrap();
        let one = State::basis(1, "1").unwrap();
        assert_eq!(zero.inner_product(&one).unwrap(), c(0.0, 0.0));
        let mut rotated = plus();
        rotated.apply_pauli_rotation(&PauliString::parse("Z").unwrap(), 0.3).unwrap();
        assert!((s.inner_product(&rotated).unwrap() - c(0.3f64.cos(), 0.0)).norm() < 1e-15);
        assert!(s.inner_product(&State::zero(2).unwrap()).is_err());
    }

    #[test]
    fn expectation_examples() {
        let zero = State::basis(1, "0").unwrap();
        assert_eq!(zero.expectation(&PauliString::parse("Z").unwrap()).unwrap(), 1.0);
        assert_eq!(zero.expectation(&PauliString::parse("X").unwrap()).unwrap(), 0.0);
        let t = 0.37;
        let mut s = zero.clone();
        s.apply_pauli_rotation(&PauliString::parse("X").unwrap(), t).unwrap();
        let z = s.expectation(&PauliString::parse("Z").unwrap()).unwrap();
        assert!((z - (2.0 * t).cos()).abs() < 1e-15);
    }

    #[test]
    fn norm_preserved_over_many_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 5;
        let mut s = State::zero(n).unwrap();
        for _ in 0..10_000 {
            let p = PauliString::from_masks(n, rng.gen_range(0..32), rng.gen_range(0..32)).unwrap();
            s.apply_pauli_rotation(&p, rng.gen_range(-4.0..4.0)).unwrap();
        }
        assert!((s.norm() - 1.0).abs() < 1e-9);
    }

    fn dense_exp(p: &PauliString, theta: f64) -> DMatrix<Complex64> {
        let dim = 1 << p.n_qubits();
        DMatrix::<Complex64>::identity(dim, dim) * c(theta.cos(), 0.0) + p.to_dense() * c(0.0, theta.sin())
    }

    fn arb_case() -> impl Strategy<Value = (PauliString, f64, Vec<(f64, f64)>)> {
        (1usize..=3).prop_flat_map(|n| {
            let dim = 1usize << n;
            (
                (0u64..(1 << n), 0u64..(1 << n)).prop_map(move |(x, z)| PauliString::from_masks(n, x, z).unwrap()),
                -6.0f64..6.0,
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim),
            )
        })
    }

    proptest! {
        #[test]
        fn rotation_matches_dense((p, theta, raw) in arb_case()) {
            let amps: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            let mut s = State::from_amplitudes(amps.clone()).unwrap();
            s.apply_pauli_rotation(&p, theta).unwrap();
            let expected = dense_exp(&p, theta) * DVector::from_vec(amps.clone());
            for (got, want) in s.amplitudes().iter().zip(expected.iter()) {
                prop_assert!((got - want).norm() < 1e-12);
            }
            let mut q = State::from_amplitudes(amps.clone()).unwrap();
            q.apply_pauli(&p).unwrap();
            let expected = p.to_dense() * DVector::from_vec(amps.clone());
            for (got, want) in q.amplitudes().iter().zip(expected.iter()) {
                prop_assert!((got - want).norm() < 1e-12);
            }
            let bra = State::from_amplitudes(raw.iter().rev().map(|&(a, b)| c(b, a)).collect()).unwrap();
            let ket = State::from_amplitudes(amps).unwrap();
            let direct = bra.matrix_element(&p, &ket).unwrap();
            let via = bra.inner_product(&q).unwrap();
            prop_assert!((direct - via).norm() < 1e-12);
        }
    }

    #[test]
    fn clifford_gates() {
        let mut s = State::zero(2).unwrap();
        s.apply_h(0).unwrap();
        s.apply_cx(0, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[3] - c(r, 0.0)).norm() < 1e-15);
        s.apply_phase(1, c(0.0, 1.0)).unwrap();
        assert!((s.amplitudes()[3] - c(0.0, r)).norm() < 1e-15);
        assert!(s.apply_cx(1, 1).is_err());
        assert!(s.apply_h(2).is_err());
    }
}
