#![allow(dead_code)]

use qtag::circuit::{fits, write_gate, Circuit, CircuitBuilder, Column, Gate, GateKind};
use rand::Rng;

/// A random gate on `nq` qubits with distinct operands.
pub fn random_gate<R: Rng>(rng: &mut R, nq: usize) -> Gate {
    let mut qubits: Vec<usize> = (0..nq).collect();
    for i in 0..nq.min(3) {
        let j = rng.random_range(i..nq);
        qubits.swap(i, j);
    }
    let pick = if nq >= 3 {
        5
    } else if nq == 2 {
        4
    } else {
        2
    };
    match rng.random_range(0..pick) {
        0 | 1 => Gate::Single(GateKind::SINGLE_QUBIT[rng.random_range(0..8)], qubits[0]),
        2 => Gate::Cx {
            control: qubits[0],
            target: qubits[1],
        },
        3 => Gate::Swap(qubits[0], qubits[1]),
        _ => Gate::Ccx {
            control1: qubits[0],
            control2: qubits[1],
            target: qubits[2],
        },
    }
}

/// Gates placed greedily, as the parser would.
pub fn random_circuit<R: Rng>(rng: &mut R, nq: usize, gates: usize) -> Circuit {
    let mut b = CircuitBuilder::new(nq).unwrap();
    for _ in 0..gates {
        b.place(random_gate(rng, nq)).unwrap();
    }
    b.finish()
}

/// `cols` columns filled cell by cell, with empty columns allowed.
pub fn random_grid<R: Rng>(rng: &mut R, nq: usize, cols: usize) -> Circuit {
    let columns: Vec<Column> = (0..cols)
        .map(|_| {
            let mut col = vec![GateKind::Ident; nq];
            let attempts = rng.random_range(0..=nq);
            for _ in 0..attempts {
                let gate = random_gate(rng, nq);
                if fits(&col, &gate) {
                    write_gate(&mut col, &gate);
                }
            }
            col
        })
        .collect();
    Circuit::from_columns(nq, columns).unwrap()
}

/// `c` with IDENT columns appended up to `width`.
pub fn padded(c: &Circuit, width: usize) -> Circuit {
    let mut columns = c.columns().to_vec();
    columns.resize(
        width.max(columns.len()),
        vec![GateKind::Ident; c.num_qubits()],
    );
    Circuit::from_columns(c.num_qubits(), columns).unwrap()
}
