//! Structural watermark-removal attacks on circuits.
//!
//! Every attack is a pure function of the circuit and its [`AttackSpec`];
//! randomness comes from a generator seeded with `spec.seed`.

use crate::circuit::{fits, write_gate, Circuit, Column, Gate, GateKind};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("{kind:?} needs {needed} targets but the circuit has {available}")]
    InsufficientTargets {
        kind: AttackKind,
        needed: usize,
        available: usize,
    },
    #[error("invalid attack parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// No-op, used for clean baselines.
    None,
    /// Swap Pauli gates for equivalent three-gate sequences.
    Replace,
    /// Add single-qubit gates after the last gate of a line.
    Append,
    /// Insert self-inverse pairs.
    Insert,
    /// Remove gate instances, then drop emptied columns.
    Delete,
    /// Remove whole contiguous columns.
    DeleteColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppendMode {
    /// Diagonal gates only, which leave measurement statistics unchanged.
    #[default]
    Strict,
    Aggressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: AppendMode,
    /// For `delete_columns`: the first removed column is drawn uniformly from
    /// the leading `window` fraction of valid start positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, count: usize, seed: u64) -> Self {
        AttackSpec {
            kind,
            count,
            seed,
            mode: AppendMode::Strict,
            window: None,
        }
    }

    pub fn none() -> Self {
        AttackSpec::new(AttackKind::None, 0, 0)
    }

    pub fn with_mode(self, mode: AppendMode) -> Self {
        AttackSpec { mode, ..self }
    }

    pub fn with_window(self, window: f64) -> Self {
        AttackSpec {
            window: Some(window),
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        AttackSpec { seed, ..self }
    }

    /// Whether `count` lies in the range the robustness sweeps use.
    pub fn in_sweep_range(&self) -> bool {
        match self.kind {
            AttackKind::None => true,
            AttackKind::Replace | AttackKind::Append => (1..=5).contains(&self.count),
            AttackKind::Insert => (1..=2).contains(&self.count),
            AttackKind::Delete | AttackKind::DeleteColumns => (1..=3).contains(&self.count),
        }
    }

    /// Short label such as `replace`, `append_aggressive`.
    pub fn label(&self) -> String {
        let base = serde_json::to_value(self.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        match (self.kind, self.mode) {
            (AttackKind::Append, AppendMode::Aggressive) => format!("{base}_aggressive"),
            _ => base,
        }
    }
}

pub fn apply_attack(c: &Circuit, spec: &AttackSpec) -> Result<Circuit, AttackError> {
    match spec.kind {
        AttackKind::None => Ok(c.clone()),
        AttackKind::Replace => apply_replacement(c, spec),
        AttackKind::Append => Ok(apply_append(c, spec)),
        AttackKind::Insert => Ok(apply_insertion(c, spec)),
        AttackKind::Delete => apply_deletion(c, spec),
        AttackKind::DeleteColumns => apply_column_deletion(c, spec),
    }
}

/// Equivalent sequence, in circuit order, for a replaceable gate.
pub fn replacement_rule(kind: GateKind) -> Option<[GateKind; 3]> {
    use GateKind::*;
    match kind {
        X => Some([H, Z, H]),
        Z => Some([H, X, H]),
        Y => Some([Sdg, X, S]),
        _ => None,
    }
}

/// Self-inverse pairs the insertion attack draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionPair {
    Single(GateKind),
    Cx,
}

impl InsertionPair {
    pub const ALL: [InsertionPair; 5] = [
        InsertionPair::Single(GateKind::H),
        InsertionPair::Single(GateKind::X),
        InsertionPair::Single(GateKind::Y),
        InsertionPair::Single(GateKind::Z),
        InsertionPair::Cx,
    ];
}

/// Replaces `count` distinct X/Y/Z gates, latest column first.
pub fn apply_replacement(c: &Circuit, spec: &AttackSpec) -> Result<Circuit, AttackError> {
    let targets: Vec<(usize, usize, GateKind)> = c
        .instances()
        .into_iter()
        .filter_map(|inst| match inst.gate {
            Gate::Single(kind, q) if replacement_rule(kind).is_some() => {
                Some((inst.column, q, kind))
            }
            _ => None,
        })
        .collect();
    if targets.len() < spec.count {
        return Err(AttackError::InsufficientTargets {
            kind: AttackKind::Replace,
            needed: spec.count,
            available: targets.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen: Vec<_> = sample(&mut rng, targets.len(), spec.count)
        .into_iter()
        .map(|i| targets[i])
        .collect();
    // Splices only happen after the target column, so earlier picks keep
    // their coordinates.
    chosen.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut columns = c.clone().into_columns();
    for (col, q, kind) in chosen {
        let [first, rest @ ..] = replacement_rule(kind).expect("filtered above");
        columns[col][q] = first;
        let gates: Vec<Gate> = rest.iter().map(|&g| Gate::Single(g, q)).collect();
        place_run(&mut columns, c.num_qubits(), &gates, col + 1);
    }
    Ok(Circuit::from_columns(c.num_qubits(), columns).expect("attack keeps groups complete"))
}

/// Appends `count` single-qubit gates, each right after the last gate on a
/// uniformly chosen qubit line.
pub fn apply_append(c: &Circuit, spec: &AttackSpec) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocabulary: &[GateKind] = match spec.mode {
        AppendMode::Strict => &GateKind::DIAGONAL,
        AppendMode::Aggressive => &GateKind::SINGLE_QUBIT,
    };
    let nq = c.num_qubits();
    let mut columns = c.clone().into_columns();
    for _ in 0..spec.count {
        let q = rng.random_range(0..nq);
        let kind = vocabulary[rng.random_range(0..vocabulary.len())];
        let col = columns
            .iter()
            .rposition(|column| !column[q].is_ident())
            .map_or(0, |last| last + 1);
        if col == columns.len() {
            columns.push(vec![GateKind::Ident; nq]);
        }
        columns[col][q] = kind;
    }
    Circuit::from_columns(nq, columns).expect("single-qubit cells keep groups complete")
}

/// Inserts `count` adjacent self-inverse pairs at uniformly chosen gaps.
pub fn apply_insertion(c: &Circuit, spec: &AttackSpec) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nq = c.num_qubits();
    let mut columns = c.clone().into_columns();
    for _ in 0..spec.count {
        let candidates: &[InsertionPair] = if nq >= 2 {
            &InsertionPair::ALL
        } else {
            &InsertionPair::ALL[..4]
        };
        let pair = candidates[rng.random_range(0..candidates.len())];
        let gate = match pair {
            InsertionPair::Single(kind) => Gate::Single(kind, rng.random_range(0..nq)),
            InsertionPair::Cx => {
                let picked = sample(&mut rng, nq, 2);
                Gate::Cx {
                    control: picked.index(0),
                    target: picked.index(1),
                }
            }
        };
        let position = rng.random_range(0..=columns.len());
        insert_pair(&mut columns, nq, gate, position);
    }
    Circuit::from_columns(nq, columns).expect("attack keeps groups complete")
}

/// Places `gate` twice in a row at gap `position`, between the operand lines'
/// last gate before the gap and first gate after it.
pub fn insert_pair(columns: &mut Vec<Column>, nq: usize, gate: Gate, position: usize) {
    let qubits = gate.qubits();
    let busy = |col: &Column| qubits.iter().any(|&q| !col[q].is_ident());
    let prev = columns[..position].iter().rposition(busy);
    let start = prev.map_or(0, |p| p + 1);
    place_run(columns, nq, &[gate, gate], start);
}

/// Writes `gates` in order into the earliest fitting columns from `start`
/// on that precede the next column where an operand line is busy. When there are too few, all-identity columns are
/// spliced in front of that next busy column.
fn place_run(columns: &mut Vec<Column>, nq: usize, gates: &[Gate], start: usize) {
    let qubits: Vec<usize> = gates.iter().flat_map(|g| g.qubits()).collect();
    let next = (start..columns.len())
        .find(|&i| qubits.iter().any(|&q| !columns[i][q].is_ident()))
        .unwrap_or(columns.len());

    let mut slots = Vec::with_capacity(gates.len());
    let mut col = start;
    for gate in gates {
        while col < next && !fits(&columns[col], gate) {
            col += 1;
        }
        if col >= next {
            break;
        }
        slots.push(col);
        col += 1;
    }
    let missing = gates.len() - slots.len();
    for k in 0..missing {
        columns.insert(next, vec![GateKind::Ident; nq]);
        slots.push(next + k);
    }
    for (gate, &slot) in gates.iter().zip(&slots) {
        write_gate(&mut columns[slot], gate);
    }
}

/// Clears `count` uniformly chosen gate instances, then compacts.
pub fn apply_deletion(c: &Circuit, spec: &AttackSpec) -> Result<Circuit, AttackError> {
    let instances = c.instances();
    if instances.len() < spec.count {
        return Err(AttackError::InsufficientTargets {
            kind: AttackKind::Delete,
            needed: spec.count,
            available: instances.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns = c.clone().into_columns();
    for i in sample(&mut rng, instances.len(), spec.count) {
        let inst = instances[i];
        for q in inst.gate.qubits() {
            columns[inst.column][q] = GateKind::Ident;
        }
    }
    Ok(Circuit::from_columns(c.num_qubits(), columns)
        .expect("whole groups removed")
        .compact_columns())
}

/// Removes `count` contiguous columns. No other column moves except by the
/// resulting left shift.
pub fn apply_column_deletion(c: &Circuit, spec: &AttackSpec) -> Result<Circuit, AttackError> {
    let cols = c.num_columns();
    if cols < spec.count {
        return Err(AttackError::InsufficientTargets {
            kind: AttackKind::DeleteColumns,
            needed: spec.count,
            available: cols,
        });
    }
    let window = spec.window.unwrap_or(1.0);
    if !(window > 0.0 && window <= 1.0) {
        return Err(AttackError::InvalidParameter(format!(
            "window must lie in (0, 1], got {window}"
        )));
    }
    let starts = cols - spec.count + 1;
    let span = ((starts as f64 * window).ceil() as usize).clamp(1, starts);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = rng.random_range(0..span);
    let mut columns = c.clone().into_columns();
    columns.drain(start..start + spec.count);
    Ok(Circuit::from_columns(c.num_qubits(), columns).expect("whole columns removed"))
}
