//! Sampling Clifford+T circuits by randomly dropping T gates.
//!
//! `T = diag(1, e^{iπ/4}) = e^{iπ/8} e^{-iπ/8 Z}`. Replacing it by
//! `e^{iπ/8}` times either the identity or `e^{-iπ/4 Z}` (an S gate up to a
//! phase), each with probability 1/2, gives `cos(π/8) T` on average.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{reduce, sample_rng, EstimatorResult, Sample};
use crate::pauli::PauliString;
use crate::state::State;
use crate::tetris::AttenuationReport;

/// Mean of the two gadget branches relative to `T`.
pub fn gadget_attenuation() -> f64 {
    FRAC_PI_8.cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    T(usize),
    CX(usize, usize),
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::T(q) => vec![q],
            Gate::CX(c, t) => vec![c, t],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::T(q) => write!(f, "T {q}"),
            Gate::CX(c, t) => write!(f, "CX {c} {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

/// Which quantity the gadget estimator targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetMode {
    /// `<0|C† M C|0>` from independent bra and ket copies, divided by `cos(π/8)^{2 G_T}`.
    #[default]
    TwoCopy,
    /// `<0|M C|0>` from a single copy, divided by `cos(π/8)^{G_T}`.
    Amplitude,
}

impl GateCircuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::state::MAX_STATE_QUBITS {
            return Err(Error::InvalidArgument(format!("register size must be in 1..={}, got {n_qubits}", crate::state::MAX_STATE_QUBITS)));
        }
        for gate in &gates {
            for q in gate.qubits() {
                if q >= n_qubits {
                    return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
                }
            }
            if let Gate::CX(c, t) = gate {
                if c == t {
                    return Err(Error::InvalidArgument(format!("CX control equals target ({c})")));
                }
            }
        }
        Ok(GateCircuit { n_qubits, gates })
    }

    /// One gate per line: `H q`, `S q`, `T q` or `CX q1 q2`. Blank lines and
    /// `#` comments are skipped. The register size is one more than the
    /// largest qubit index unless `n_qubits` is given.
    pub fn parse(text: &str, n_qubits: Option<usize>) -> Result<Self> {
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let qubit = |s: &str| s.parse::<usize>().map_err(|_| err(format!("invalid qubit index '{s}'")));
            let gate = match (fields[0].to_ascii_uppercase().as_str(), fields.len()) {
                ("H", 2) => Gate::H(qubit(fields[1])?),
                ("S", 2) => Gate::S(qubit(fields[1])?),
                ("T", 2) => Gate::T(qubit(fields[1])?),
                ("CX", 3) | ("CNOT", 3) => Gate::CX(qubit(fields[1])?, qubit(fields[2])?),
                _ => return Err(err(format!("unrecognized gate '{line}'"))),
            };
            gates.push(gate);
        }
        let needed = gates.iter().flat_map(|g| g.qubits()).max().map_or(1, |q| q + 1);
        GateCircuit::new(n_qubits.unwrap_or(needed), gates)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::T(_))).count()
    }

    /// Runs the exact circuit.
    pub fn apply(&self, state: &mut State) -> Result<()> {
        self.check_state(state)?;
        let t_phase = Complex64::from_polar(1.0, FRAC_PI_4);
        for gate in &self.gates {
            match *gate {
                Gate::T(q) => state.apply_phase(q, t_phase)?,
                _ => apply_clifford(state, gate)?,
            }
        }
        Ok(())
    }

    /// Runs the circuit with the `k`-th T gate replaced by the identity branch
    /// when `rotate[k]` is false and by `e^{-iπ/4 Z}` when true. Global phases
    /// `e^{iπ/8}` per T gate are included.
    pub fn apply_branches(&self, state: &mut State, rotate: &[bool]) -> Result<()> {
        self.check_state(state)?;
        if rotate.len() != self.t_count() {
            return Err(Error::InvalidArgument(format!("{} branch choices for {} T gates", rotate.len(), self.t_count())));
        }
        let mut choices = rotate.iter();
        for gate in &self.gates {
            match *gate {
                Gate::T(q) => {
                    if *choices.next().unwrap() {
                        state.rotate_unchecked(&PauliString::single(self.n_qubits, q, crate::PauliLetter::Z)?, -FRAC_PI_4);
                    }
                }
                _ => apply_clifford(state, gate)?,
            }
        }
        state.scale(Complex64::from_polar(1.0, FRAC_PI_8 * self.t_count() as f64));
        Ok(())
    }

    fn check_state(&self, state: &State) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, got: state.n_qubits() });
        }
        Ok(())
    }

    fn sample_branch<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<State> {
        let rotate: Vec<bool> = (0..self.t_count()).map(|_| rng.gen::<bool>()).collect();
        let mut state = State::zero(self.n_qubits)?;
        self.apply_branches(&mut state, &rotate)?;
        Ok(state)
    }
}

impl FromStr for GateCircuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateCircuit::parse(s, None)
    }
}

fn apply_clifford(state: &mut State, gate: &Gate) -> Result<()> {
    match *gate {
        Gate::H(q) => state.apply_h(q),
        Gate::S(q) => state.apply_phase(q, Complex64::i()),
        Gate::CX(c, t) => state.apply_cx(c, t),
        Gate::T(_) => unreachable!("T gates are handled by the caller"),
    }
}

/// Estimates `<0|C† M C|0>` (or `<0|M C|0>` in amplitude mode) for a circuit
/// acting on `|0...0>`.
pub fn t_gadget_estimate(
    circuit: &GateCircuit,
    observable: &PauliString,
    n_samples: usize,
    master_seed: u64,
    mode: GadgetMode,
) -> Result<EstimatorResult> {
    if observable.n_qubits() != circuit.n_qubits() {
        return Err(Error::QubitMismatch { expected: circuit.n_qubits(), got: observable.n_qubits() });
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let g = circuit.t_count();
    let copies = match mode {
        GadgetMode::TwoCopy => 2,
        GadgetMode::Amplitude => 1,
    };
    let attenuation = gadget_attenuation().powi((copies * g) as i32);
    let zero = State::zero(circuit.n_qubits())?;

    let samples = (0..n_samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(master_seed, index);
            let ket = circuit.sample_branch(&mut rng)?;
            let value = match mode {
                GadgetMode::TwoCopy => circuit.sample_branch(&mut rng)?.matrix_element_unchecked(observable, &ket),
                GadgetMode::Amplitude => zero.matrix_element_unchecked(observable, &ket),
            };
            Ok(Sample { value, gates: copies * g })
        })
        .collect::<Result<Vec<_>>>()?;

    let report = AttenuationReport {
        lambda_att: attenuation,
        q_att: 1.0,
        expected_gates: 0.5 * g as f64,
        z_values: Vec::new(),
    };
    Ok(reduce(&samples, attenuation, report))
}
