use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pauli letter {letter:?} at position {position}")]
    InvalidPauliLetter { letter: char, position: usize },
    #[error("empty Pauli string")]
    EmptyPauliString,
    #[error("Pauli strings longer than {max} qubits are not supported (got {got})")]
    TooManyQubits { got: usize, max: usize },
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-finite coefficient {value} on line {line}")]
    NonFinite { line: usize, value: f64 },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("time {time} outside schedule horizon [0, {horizon}]")]
    OutsideHorizon { time: f64, horizon: f64 },
    #[error("integrated weight {value} outside [0, {max}]")]
    WeightOutOfRange { value: f64, max: f64 },
    #[error("term {index} has a time-dependent coefficient; a constant Hamiltonian is required")]
    NotConstant { index: usize },
    #[error("{n_qubits} qubits exceeds the exact-evolution limit of {limit}")]
    OracleLimit { n_qubits: usize, limit: usize },
    #[error("invalid angle {angle} for term {index}; angles must lie in (0, pi/2]")]
    InvalidAngle { index: usize, angle: f64 },
    #[error("invalid mixing angles: target {target}, realized {realized}")]
    InvalidMixing { target: f64, realized: f64 },
    #[error("background terms {a} and {b} do not commute")]
    NonCommutingBackground { a: usize, b: usize },
    #[error("background term {index} must have a constant coefficient")]
    TimeDependentBackground { index: usize },
    #[error("too many gates for exhaustive enumeration: {got} > {max}")]
    TooManyGates { got: usize, max: usize },
    #[error("ratio undefined: real part {re} is within {floor} of zero")]
    RatioUndefined { re: f64, floor: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
