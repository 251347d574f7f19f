//! Phase-free Hermitian Pauli strings stored as symplectic bit masks.
//!
//! Character `k` of the text form acts on qubit `k`. Internally a string is
//! the pair of masks `(x, z)` with the operator `i^{|x & z|} X^x Z^z`, so a
//! `Y` letter is exactly the Hermitian Pauli Y = iXZ.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

/// Multiplies `phase` by `i^k`.
#[inline]
pub(crate) fn times_i_pow(phase: Complex64, k: u32) -> Complex64 {
    match k & 3 {
        0 => phase,
        1 => Complex64::new(-phase.im, phase.re),
        2 => -phase,
        _ => Complex64::new(phase.im, -phase.re),
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        PauliString { n_qubits, x: 0, z: 0 }
    }

    /// Builds a string from raw masks. Bits at or above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::EmptyPauliString);
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { got: n_qubits, max: MAX_QUBITS });
        }
        let valid = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if (x | z) & !valid != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits set beyond {n_qubits} qubits"
            )));
        }
        Ok(PauliString { n_qubits, x, z })
    }

    /// A single non-trivial letter on qubit `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: PauliLetter) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::IndexOutOfRange { index: qubit, limit: n_qubits });
        }
        let (x, z) = letter.bits();
        Self::from_masks(n_qubits, (x as u64) << qubit, (z as u64) << qubit)
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        if letters.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits { got: letters.len(), max: MAX_QUBITS });
        }
        for (q, l) in letters.iter().enumerate() {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::from_masks(letters.len(), x, z)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(text.len());
        for (position, c) in text.chars().enumerate() {
            let l = match c {
                'I' => PauliLetter::I,
                'X' => PauliLetter::X,
                'Y' => PauliLetter::Y,
                'Z' => PauliLetter::Z,
                letter => return Err(Error::InvalidPauliLetter { letter, position }),
            };
            letters.push(l);
        }
        if letters.is_empty() {
            return Err(Error::EmptyPauliString);
        }
        Self::from_letters(&letters)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits on which the string acts non-trivially.
    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| self.support_mask() >> q & 1 == 1).collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string is a product of `I` and `Z` letters only.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        match (self.x >> qubit & 1, self.z >> qubit & 1) {
            (0, 0) => PauliLetter::I,
            (1, 0) => PauliLetter::X,
            (1, 1) => PauliLetter::Y,
            _ => PauliLetter::Z,
        }
    }

    pub fn letters(&self) -> Vec<PauliLetter> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        Ok(())
    }

    /// Whether the two strings commute as operators.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Operator product `self * other = i^k R`; returns `(k mod 4, R)`.
    pub fn multiply(&self, other: &PauliString) -> Result<(u32, PauliString)> {
        self.check_size(other)?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let a = (self.x & self.z).count_ones();
        let b = (other.x & other.z).count_ones();
        let c = (x & z).count_ones();
        let swap = (self.z & other.x).count_ones();
        let k = (a + b + 2 * swap + 4 * 64 - c) % 4;
        Ok((k, PauliString { n_qubits: self.n_qubits, x, z }))
    }

    /// Action on a computational basis index: `P|b> = phase |b'>`.
    #[inline]
    pub fn act_on_basis(&self, b: usize) -> (usize, Complex64) {
        let sign = if ((b as u64) & self.z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let k = (self.x & self.z).count_ones();
        (b ^ self.x as usize, times_i_pow(Complex64::new(sign, 0.0), k))
    }

    /// Dense `2^n x 2^n` matrix. Intended for small oracles only.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        assert!(self.n_qubits <= 14, "dense Pauli matrix too large");
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (row, phase) = self.act_on_basis(b);
            m[(row, b)] = phase;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse(s)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliString::parse(&s).map_err(serde::de::Error::custom)
    }
}
