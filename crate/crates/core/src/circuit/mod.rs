//! Circuit grid IR, a QASM subset reader/writer, and a dense simulator.

mod gate;
mod grid;
mod qasm;
mod sim;

pub use gate::{Gate, GateKind, GroupKind};
pub use grid::{
    broken_group, column_gates, fits, repair_column, write_gate, Circuit, CircuitBuilder, Column,
    GateInstance,
};
pub use qasm::{emit_qasm, emit_qasm_with_barriers, parse_qasm};
pub use sim::{
    equivalent_up_to_phase, outcome_distribution, simulate_statevector, simulate_unitary,
    single_qubit_matrix, UnitaryMatrix, MAX_STATEVECTOR_QUBITS, MAX_UNITARY_QUBITS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} used twice in one gate")]
    DuplicateOperand(usize),
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("{qubits} qubits exceeds the simulator limit of {max}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error("matrix dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("column {column} has {found} cells, expected {expected}")]
    ColumnHeight {
        column: usize,
        expected: usize,
        found: usize,
    },
    #[error("column {column} holds an incomplete or ambiguous {group:?} group")]
    IncompleteGroup { column: usize, group: GroupKind },
}
