use super::gate::{Gate, GateKind, GroupKind};
use super::CircuitError;

/// One time step: a token per qubit.
pub type Column = Vec<GateKind>;

/// A quantum circuit laid out on a (qubit, column) grid.
///
/// Column 0 acts first. Every column holds at most one complete group per
/// multi-qubit family, so partner tokens pair up unambiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    num_qubits: usize,
    columns: Vec<Column>,
}

/// A gate together with the column it sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateInstance {
    pub column: usize,
    pub gate: Gate,
}

impl Circuit {
    pub fn empty(num_qubits: usize) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Circuit {
            num_qubits,
            columns: Vec::new(),
        })
    }

    /// Builds a circuit from explicit columns, validating partner groups.
    pub fn from_columns(num_qubits: usize, columns: Vec<Column>) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != num_qubits {
                return Err(CircuitError::ColumnHeight {
                    column: i,
                    expected: num_qubits,
                    found: col.len(),
                });
            }
            if let Some(group) = broken_group(col) {
                return Err(CircuitError::IncompleteGroup { column: i, group });
            }
        }
        Ok(Circuit {
            num_qubits,
            columns,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn get(&self, qubit: usize, column: usize) -> GateKind {
        self.columns[column][qubit]
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    /// Gate instances in column order, ordered by anchor qubit within a
    /// column. The anchor is the single-qubit operand or the first partner
    /// token (`CxControl`, `CcxControl1`, `SwapA`).
    pub fn instances(&self) -> Vec<GateInstance> {
        let mut out = Vec::new();
        for (t, col) in self.columns.iter().enumerate() {
            out.extend(
                column_gates(col)
                    .into_iter()
                    .map(|gate| GateInstance { column: t, gate }),
            );
        }
        out
    }

    pub fn gate_count(&self) -> usize {
        self.columns.iter().map(|c| column_gates(c).len()).sum()
    }

    /// Drops every all-identity column, keeping the order of the rest.
    pub fn compact_columns(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            columns: self
                .columns
                .iter()
                .filter(|c| c.iter().any(|g| !g.is_ident()))
                .cloned()
                .collect(),
        }
    }

    /// Re-places every gate with the greedy earliest-column rule. This is the
    /// layout `parse_qasm(emit_qasm(c))` produces.
    pub fn canonical(&self) -> Circuit {
        let mut b = CircuitBuilder::new(self.num_qubits).expect("num_qubits >= 1");
        for inst in self.instances() {
            b.place(inst.gate).expect("gate taken from a valid circuit");
        }
        b.finish()
    }
}

/// Gates present in one (valid) column, in anchor-qubit order.
pub fn column_gates(col: &[GateKind]) -> Vec<Gate> {
    let find = |kind: GateKind| col.iter().position(|&g| g == kind);
    let mut out = Vec::new();
    for (q, &g) in col.iter().enumerate() {
        match g {
            GateKind::Ident => {}
            k if k.is_single_qubit() => out.push(Gate::Single(k, q)),
            GateKind::CxControl => {
                if let Some(target) = find(GateKind::CxTarget) {
                    out.push(Gate::Cx { control: q, target });
                }
            }
            GateKind::CcxControl1 => {
                if let (Some(control2), Some(target)) =
                    (find(GateKind::CcxControl2), find(GateKind::CcxTarget))
                {
                    out.push(Gate::Ccx {
                        control1: q,
                        control2,
                        target,
                    });
                }
            }
            GateKind::SwapA => {
                if let Some(b) = find(GateKind::SwapB) {
                    out.push(Gate::Swap(q, b));
                }
            }
            _ => {}
        }
    }
    out
}

/// First multi-qubit family whose tokens in `col` do not form exactly zero
/// or one complete group.
pub fn broken_group(col: &[GateKind]) -> Option<GroupKind> {
    GroupKind::ALL.into_iter().find(|group| {
        let counts: Vec<usize> = group
            .tokens()
            .iter()
            .map(|t| col.iter().filter(|g| *g == t).count())
            .collect();
        let first = counts[0];
        !(first <= 1 && counts.iter().all(|&c| c == first))
    })
}

/// Replaces every token of an incomplete partner group with `Ident`.
/// Returns the number of cells changed.
pub fn repair_column(col: &mut [GateKind]) -> usize {
    let mut changed = 0;
    for group in GroupKind::ALL {
        let counts: Vec<usize> = group
            .tokens()
            .iter()
            .map(|t| col.iter().filter(|g| *g == t).count())
            .collect();
        let first = counts[0];
        let complete = first <= 1 && counts.iter().all(|&c| c == first);
        if !complete {
            for cell in col.iter_mut() {
                if cell.group() == Some(group) {
                    *cell = GateKind::Ident;
                    changed += 1;
                }
            }
        }
    }
    changed
}

/// Whether `gate` may be written into `col` without clashing.
pub fn fits(col: &[GateKind], gate: &Gate) -> bool {
    if !gate.qubits().iter().all(|&q| col[q].is_ident()) {
        return false;
    }
    match gate.group() {
        None => true,
        Some(group) => !col.iter().any(|g| g.group() == Some(group)),
    }
}

pub fn write_gate(col: &mut [GateKind], gate: &Gate) {
    for (q, kind) in gate.cells() {
        col[q] = kind;
    }
}

/// Incremental greedy placement: each gate goes into the earliest column
/// after the last gate on any of its operands (and after the latest barrier)
/// whose operand cells are free and which holds no other group of the same
/// family.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    num_qubits: usize,
    columns: Vec<Column>,
    frontier: Vec<usize>,
    floor: usize,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(CircuitBuilder {
            num_qubits,
            columns: Vec::new(),
            frontier: vec![0; num_qubits],
            floor: 0,
        })
    }

    pub fn place(&mut self, gate: Gate) -> Result<usize, CircuitError> {
        let qubits = gate.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(CircuitError::DuplicateOperand(q));
            }
        }
        let mut col = qubits
            .iter()
            .map(|&q| self.frontier[q])
            .max()
            .unwrap_or(0)
            .max(self.floor);
        while col < self.columns.len() && !fits(&self.columns[col], &gate) {
            col += 1;
        }
        while self.columns.len() <= col {
            self.columns.push(vec![GateKind::Ident; self.num_qubits]);
        }
        write_gate(&mut self.columns[col], &gate);
        for &q in &qubits {
            self.frontier[q] = col + 1;
        }
        Ok(col)
    }

    /// Closes the current layer: later gates land strictly after every
    /// column placed so far. Two barriers in a row leave an empty column.
    pub fn barrier(&mut self) {
        self.floor = self.columns.len().max(self.floor + 1);
    }

    pub fn finish(mut self) -> Circuit {
        while self.columns.len() < self.floor {
            self.columns.push(vec![GateKind::Ident; self.num_qubits]);
        }
        Circuit {
            num_qubits: self.num_qubits,
            columns: self.columns,
        }
    }
}
