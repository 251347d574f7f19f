//! Hamiltonians `H(t) = Σ_n c_n(t) O_n` over Pauli strings.

use std::collections::HashMap;
use std::io::Read;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{times_i_pow, PauliString};
use crate::schedule::Schedule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub pauli: PauliString,
    pub schedule: Schedule,
}

impl Term {
    pub fn constant(pauli: PauliString, coefficient: f64) -> Self {
        Term { pauli, schedule: Schedule::constant(coefficient) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<Term>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian, merging constant terms that share a Pauli string.
    /// Term order follows first occurrence.
    pub fn new(n_qubits: usize, terms: Vec<Term>) -> Result<Self> {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        let mut seen: HashMap<PauliString, usize> = HashMap::new();
        for term in terms {
            if term.pauli.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch { expected: n_qubits, got: term.pauli.n_qubits() });
            }
            match seen.get(&term.pauli) {
                Some(&k) => match (&mut merged[k].schedule, &term.schedule) {
                    (Schedule::Constant { value }, Schedule::Constant { value: extra }) => *value += extra,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "duplicate time-dependent term {}",
                            term.pauli
                        )))
                    }
                },
                None => {
                    seen.insert(term.pauli, merged.len());
                    merged.push(term);
                }
            }
        }
        Ok(Hamiltonian { n_qubits, terms: merged })
    }

    pub fn from_constant_terms(terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(c, s)| Ok(Term::constant(PauliString::parse(s)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map(|t| t.pauli.n_qubits()).ok_or(Error::EmptyPauliString)?;
        Hamiltonian::new(n, parsed)
    }

    /// Parses the Pauli-sum text format: one `<coefficient> <IXYZ string>` per
    /// line, `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `<coefficient> <pauli>`, got {} fields", fields.len()),
                });
            }
            let coefficient: f64 = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid coefficient {:?}", fields[0]),
            })?;
            if !coefficient.is_finite() {
                return Err(Error::NonFinite { line: line_no, value: coefficient });
            }
            let pauli = PauliString::parse(fields[1])
                .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            match n_qubits {
                None => n_qubits = Some(pauli.n_qubits()),
                Some(n) if n != pauli.n_qubits() => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("inconsistent qubit count: expected {n}, got {}", pauli.n_qubits()),
                    })
                }
                _ => {}
            }
            terms.push(Term::constant(pauli, coefficient));
        }
        let n = n_qubits.ok_or(Error::Parse { line: 0, message: "no terms".into() })?;
        Hamiltonian::new(n, terms)
    }

    pub fn read<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
        Hamiltonian::parse(&text)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> &Term {
        &self.terms[index]
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.schedule.is_constant())
    }

    /// Coefficients of a time-independent Hamiltonian.
    pub fn constant_coefficients(&self) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .enumerate()
            .map(|(index, t)| match t.schedule {
                Schedule::Constant { value } => Ok(value),
                _ => Err(Error::NotConstant { index }),
            })
            .collect()
    }

    /// Coefficients frozen at time `t`.
    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.schedule.value(t)).collect()
    }

    /// `Σ_n |c_n(t)|`.
    pub fn one_norm_at(&self, t: f64) -> f64 {
        self.coefficients_at(t).iter().map(|c| c.abs()).sum()
    }

    /// Latest time at which every coefficient is defined.
    pub fn horizon(&self) -> f64 {
        self.terms.iter().map(|t| t.schedule.horizon()).fold(f64::INFINITY, f64::min)
    }

    /// Replaces the schedule of every term for which `select` holds.
    pub fn with_schedules<F: Fn(&Term) -> Option<Schedule>>(&self, select: F) -> Hamiltonian {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { pauli: t.pauli, schedule: select(t).unwrap_or_else(|| t.schedule.clone()) })
            .collect();
        Hamiltonian { n_qubits: self.n_qubits, terms }
    }

    /// Restricts to the terms with the given indices (in that order).
    pub fn subset(&self, indices: &[usize]) -> Hamiltonian {
        Hamiltonian { n_qubits: self.n_qubits, terms: indices.iter().map(|&k| self.terms[k].clone()).collect() }
    }

    /// `out = Σ_n coefficients[n] O_n |input>`.
    pub fn apply_with(&self, coefficients: &[f64], input: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(input.len(), 1 << self.n_qubits);
        assert_eq!(out.len(), input.len());
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (term, &c) in self.terms.iter().zip(coefficients) {
            if c == 0.0 {
                continue;
            }
            let flip = term.pauli.x_mask() as usize;
            let zmask = term.pauli.z_mask() as usize;
            let y_phase = times_i_pow(Complex64::new(c, 0.0), (term.pauli.x_mask() & term.pauli.z_mask()).count_ones());
            for (b, amp) in input.iter().enumerate() {
                // O|b> = y_phase (-1)^{|b & z|} |b ^ x>
                let v = if (b & zmask).count_ones() & 1 == 0 { *amp } else { -*amp };
                out[b ^ flip] += y_phase * v;
            }
        }
    }

    pub fn to_dense_with(&self, coefficients: &[f64]) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (term, &c) in self.terms.iter().zip(coefficients) {
            m += term.pauli.to_dense() * Complex64::new(c, 0.0);
        }
        m
    }

    pub fn to_dense_at(&self, t: f64) -> DMatrix<Complex64> {
        self.to_dense_with(&self.coefficients_at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic() {
        let h = Hamiltonian::parse("-1.0 ZZ\n-3.0 XI\n-3.0 IX").unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.n_terms(), 3);
        assert_eq!(h.constant_coefficients().unwrap(), vec![-1.0, -3.0, -3.0]);
        assert_eq!(h.term(1).pauli.to_string(), "XI");
    }

    #[test]
    fn parse_merges_duplicates() {
        let h = Hamiltonian::parse("1.0 ZZ\n2.0 ZZ").unwrap();
        assert_eq!(h.n_terms(), 1);
        assert_eq!(h.constant_coefficients().unwrap(), vec![3.0]);
    }

    #[test]
    fn parse_errors() {
        match Hamiltonian::parse("1.0 ZZ\n1.0 XYZ") {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("inconsistent")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Hamiltonian::parse("# c\n\nfoo ZZ"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(Hamiltonian::parse("1.0 ZQ"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Hamiltonian::parse("inf ZZ"), Err(Error::NonFinite { line: 1, .. })));
        assert!(matches!(Hamiltonian::parse("1.0 ZZ 3"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let h = Hamiltonian::parse("# header\n\n 0.5 XY  # trailing\n").unwrap();
        assert_eq!(h.n_terms(), 1);
        assert_eq!(h.constant_coefficients().unwrap(), vec![0.5]);
    }

    #[test]
    fn apply_matches_dense() {
        let h = Hamiltonian::parse("0.3 XYZ\n-1.2 ZIZ\n0.7 IYI\n0.1 III").unwrap();
        let c = h.constant_coefficients().unwrap();
        let dense = h.to_dense_with(&c);
        let input: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let mut out = vec![Complex64::default(); 8];
        h.apply_with(&c, &input, &mut out);
        let expected = &dense * nalgebra::DVector::from_vec(input.clone());
        for k in 0..8 {
            assert!((out[k] - expected[k]).norm() < 1e-14);
        }
    }
}
