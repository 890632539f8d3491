use thiserror::Error;

pub type Result<T> = std::result::Result<T, QbmError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QbmError {
    #[error("line {line}: malformed coefficient `{token}`")]
    MalformedCoefficient { line: usize, token: String },

    #[error("line {line}: illegal Pauli symbol `{symbol}` (expected one of I, X, Y, Z)")]
    IllegalSymbol { line: usize, symbol: char },

    #[error("line {line}: Pauli string has length {found}, expected {expected}")]
    InconsistentLength {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: expected `<coefficient> <pauli string>`")]
    MalformedLine { line: usize },

    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{qubits} qubits exceeds the configured cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },

    #[error("power iteration did not converge after {iterations} iterations (estimate {energy})")]
    NotConverged { iterations: usize, energy: f64 },

    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("gate acts on qubit {0} more than once")]
    RepeatedQubit(usize),

    #[error("non-finite rotation angle {0}")]
    NonFiniteAngle(f64),

    #[error("post-selection impossible: outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    PostSelectionImpossible {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("reset of qubit {0} in exact mode requires a definite qubit state")]
    NonPureReset(usize),

    #[error("no shot passed post-selection ({rejected} of {shots} rejected)")]
    EmptySample { shots: u64, rejected: u64 },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("non-finite parameter value {0}")]
    NonFiniteParameter(f64),

    #[error("parameter shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("regulator must be at least 1, got {0}")]
    InvalidRegulator(f64),

    #[error("phase node is degenerate (complex tanh pole)")]
    DegenerateNode,

    #[error("trial wave function has no nonzero amplitude")]
    DegenerateWaveFunction,

    #[error("visible distribution is empty")]
    EmptyDistribution,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("analytic gradients require sign-node mode")]
    AnalyticGradientUnavailable,
}
