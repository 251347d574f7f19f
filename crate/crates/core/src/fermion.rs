//! Second-quantized fermionic Hamiltonians and their Jordan–Wigner image.
//!
//! Convention: qubit `q` hosts spin-orbital `q`, an occupied orbital is the
//! basis state `|1>`, and `c_j = (∏_{k<j} Z_k) (X_j + iY_j) / 2`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Term};
use crate::pauli::{times_i_pow, PauliLetter, PauliString};

/// Coefficients below this magnitude are dropped from the mapped Hamiltonian.
const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FermionTermSet {
    pub n_orbitals: usize,
    /// `(i, j, h_ij)` for `h_ij c†_i c_j`.
    pub one_body: Vec<(usize, usize, f64)>,
    /// `(i, j, k, l, h_ijkl)` for `h_ijkl c†_i c†_j c_k c_l`.
    pub two_body: Vec<(usize, usize, usize, usize, f64)>,
}

impl FermionTermSet {
    pub fn new(n_orbitals: usize) -> Self {
        FermionTermSet { n_orbitals, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_orbitals == 0 || self.n_orbitals > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("invalid orbital count {}", self.n_orbitals)));
        }
        let limit = self.n_orbitals;
        let check = |index: usize| {
            if index >= limit {
                Err(Error::IndexOutOfRange { index, limit })
            } else {
                Ok(())
            }
        };
        for &(i, j, h) in &self.one_body {
            check(i)?;
            check(j)?;
            if !h.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite one-body coefficient {h}")));
            }
        }
        for &(i, j, k, l, h) in &self.two_body {
            for idx in [i, j, k, l] {
                check(idx)?;
            }
            if !h.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite two-body coefficient {h}")));
            }
        }
        Ok(())
    }

    /// Parses the fermion text format: `norb <N>` followed by
    /// `ob <i> <j> <value>` and `tb <i> <j> <k> <l> <value>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set: Option<FermionTermSet> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| Error::Parse { line: line_no, message };
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("invalid index {s:?}")));
            let real = |s: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| err(format!("invalid value {s:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { line: line_no, value: v })
                }
            };
            match (fields[0], set.as_mut()) {
                ("norb", None) if fields.len() == 2 => set = Some(FermionTermSet::new(int(fields[1])?)),
                ("norb", _) => return Err(err("malformed or repeated `norb` header".into())),
                (_, None) => return Err(err("missing `norb` header".into())),
                ("ob", Some(s)) if fields.len() == 4 => {
                    s.one_body.push((int(fields[1])?, int(fields[2])?, real(fields[3])?))
                }
                ("tb", Some(s)) if fields.len() == 6 => s.two_body.push((
                    int(fields[1])?,
                    int(fields[2])?,
                    int(fields[3])?,
                    int(fields[4])?,
                    real(fields[5])?,
                )),
                (tag, _) => return Err(err(format!("unrecognized or malformed `{tag}` line"))),
            }
        }
        let set = set.ok_or(Error::Parse { line: 0, message: "missing `norb` header".into() })?;
        set.validate()?;
        Ok(set)
    }
}

/// Pauli polynomial with complex coefficients, preserving first-insertion order.
#[derive(Clone, Debug, Default)]
struct PauliPoly {
    order: Vec<PauliString>,
    coeffs: HashMap<PauliString, Complex64>,
}

impl PauliPoly {
    fn add(&mut self, p: PauliString, c: Complex64) {
        match self.coeffs.get_mut(&p) {
            Some(v) => *v += c,
            None => {
                self.order.push(p);
                self.coeffs.insert(p, c);
            }
        }
    }

    fn mul(&self, other: &PauliPoly) -> PauliPoly {
        let mut out = PauliPoly::default();
        for p in &self.order {
            for q in &other.order {
                let (k, r) = p.multiply(q).expect("equal sizes");
                out.add(r, times_i_pow(self.coeffs[p] * other.coeffs[q], k));
            }
        }
        out
    }
}

fn ladder(n: usize, j: usize, dagger: bool) -> PauliPoly {
    let mut letters = vec![PauliLetter::I; n];
    letters[..j].iter_mut().for_each(|l| *l = PauliLetter::Z);
    letters[j] = PauliLetter::X;
    let x = PauliString::from_letters(&letters).unwrap();
    letters[j] = PauliLetter::Y;
    let y = PauliString::from_letters(&letters).unwrap();
    let mut poly = PauliPoly::default();
    poly.add(x, Complex64::new(0.5, 0.0));
    poly.add(y, Complex64::new(0.0, if dagger { -0.5 } else { 0.5 }));
    poly
}

/// Maps a fermionic Hamiltonian onto qubits. The Hermitian part `(H + H†)/2`
/// of the input is what gets mapped, which amounts to keeping the real part
/// of every Pauli coefficient. The identity component is always emitted as
/// the first term.
pub fn jordan_wigner(set: &FermionTermSet) -> Result<Hamiltonian> {
    set.validate()?;
    let n = set.n_orbitals;
    let create: Vec<PauliPoly> = (0..n).map(|j| ladder(n, j, true)).collect();
    let annihilate: Vec<PauliPoly> = (0..n).map(|j| ladder(n, j, false)).collect();

    let mut total = PauliPoly::default();
    total.add(PauliString::identity(n), Complex64::new(0.0, 0.0));
    let mut accumulate = |poly: PauliPoly, h: f64| {
        for p in &poly.order {
            total.add(*p, poly.coeffs[p] * h);
        }
    };
    for &(i, j, h) in &set.one_body {
        accumulate(create[i].mul(&annihilate[j]), h);
    }
    for &(i, j, k, l, h) in &set.two_body {
        let op = create[i].mul(&create[j]).mul(&annihilate[k]).mul(&annihilate[l]);
        accumulate(op, h);
    }

    let terms = total
        .order
        .iter()
        .filter_map(|p| {
            let re = total.coeffs[p].re;
            (p.is_identity() || re.abs() > DROP_TOL).then(|| Term::constant(*p, re))
        })
        .collect();
    Hamiltonian::new(n, terms)
}
