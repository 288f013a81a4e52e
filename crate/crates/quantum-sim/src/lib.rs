//! Dense statevector simulator for the RX/CNOT circuit family.
//!
//! Wire 0 is the most significant amplitude-index bit, so amplitude index
//! b_0 b_1 ... b_{d-1} (binary) corresponds to basis state |b_0 b_1 ...⟩.
//! Gates act in O(2^d) per application; nothing in the main path builds a
//! dense 2^d x 2^d matrix (the test oracles do).

mod grad;
mod pqc;
mod state;

pub use grad::{param_shift_grad, param_shift_input_grad};
pub use pqc::{angle_encode, quantum_layer_forward, run_pqc, Observable, PqcConfig};
pub use state::StateVector;

use thiserror::Error;

/// Desk-scale cap on simulated qubits.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Error)]
pub enum QsimError {
    #[error("{got} qubits exceed the simulator cap of {max}")]
    TooManyQubits { got: usize, max: usize },
    #[error("wire {wire} out of range for {qubits} qubits")]
    WireOutOfRange { wire: usize, qubits: usize },
    #[error("control and target wires must differ (both {0})")]
    ControlEqualsTarget(usize),
    #[error("angle grid is {got} entries, expected layers*qubits = {expected}")]
    AngleShape { got: usize, expected: usize },
    #[error("input has {got} features, circuit has {expected} qubits")]
    InputLength { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, QsimError>;
