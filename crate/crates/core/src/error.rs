use thiserror::Error;

/// Errors shared across the simulator, circuit builders, and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..=14")]
    QubitCountOutOfRange(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("gate target {0} also listed as a control")]
    TargetIsControl(usize),
    #[error("circuit width {circuit} does not match state width {state}")]
    WidthMismatch { circuit: usize, state: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("register layout error: {0}")]
    Layout(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("shift by {delta} moves probability mass outside price range 0..=31")]
    ShiftOutOfRange { delta: i32 },
}

pub type Result<T> = std::result::Result<T, Error>;
