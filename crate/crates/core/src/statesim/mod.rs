//! Dense statevector simulation of the gate alphabet used by every ansatz.
//!
//! Qubit ordering is little-endian: bit `i` of a basis index is qubit `i`.
//! Circuits always start from `|+>^n`; the diagonal encoding block would only
//! add a global phase to `|0...0>`.

mod circuit;
mod gate;
mod observable;
mod state;

pub use circuit::{
    adjoint_gradient, gradient, run_circuit, AngleSource, BoundGate, CircuitTemplate, LayerInfo,
};
pub use gate::{Gate, GateKind};
pub use observable::{Observable, Pauli, PauliString, PauliTerm};
pub use state::{bitstring, init_plus_state, StateVector, MAX_QUBITS};
