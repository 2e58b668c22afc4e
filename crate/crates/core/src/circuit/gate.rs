//! Gate vocabulary shared by the circuit grid and the latent codebook.

use serde::{Deserialize, Serialize};
use std::fmt;

/// One cell of the circuit grid.
///
/// The discriminant is the token id used by the codec. Multi-qubit gates are
/// spread over several cells of the same column as partner tokens
/// (`CxControl`/`CxTarget`, the three `Ccx*` tokens, `SwapA`/`SwapB`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum GateKind {
    Ident = 0,
    H = 1,
    X = 2,
    Y = 3,
    Z = 4,
    S = 5,
    Sdg = 6,
    T = 7,
    Tdg = 8,
    CxControl = 9,
    CxTarget = 10,
    CcxControl1 = 11,
    CcxControl2 = 12,
    CcxTarget = 13,
    SwapA = 14,
    SwapB = 15,
}

impl GateKind {
    pub const COUNT: usize = 16;

    pub const ALL: [GateKind; 16] = [
        GateKind::Ident,
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::CxControl,
        GateKind::CxTarget,
        GateKind::CcxControl1,
        GateKind::CcxControl2,
        GateKind::CcxTarget,
        GateKind::SwapA,
        GateKind::SwapB,
    ];

    /// Single-qubit gates, in token order.
    pub const SINGLE_QUBIT: [GateKind; 8] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
    ];

    /// Gates diagonal in the computational basis.
    pub const DIAGONAL: [GateKind; 5] = [
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
    ];

    pub fn token_id(self) -> u8 {
        self as u8
    }

    pub fn from_token_id(id: u8) -> Option<GateKind> {
        GateKind::ALL.get(id as usize).copied()
    }

    pub fn is_ident(self) -> bool {
        self == GateKind::Ident
    }

    pub fn is_single_qubit(self) -> bool {
        (1..=8).contains(&(self as u8))
    }

    pub fn is_partner(self) -> bool {
        (self as u8) >= 9
    }

    /// The multi-qubit family a partner token belongs to.
    pub fn group(self) -> Option<GroupKind> {
        match self {
            GateKind::CxControl | GateKind::CxTarget => Some(GroupKind::Cx),
            GateKind::CcxControl1 | GateKind::CcxControl2 | GateKind::CcxTarget => {
                Some(GroupKind::Ccx)
            }
            GateKind::SwapA | GateKind::SwapB => Some(GroupKind::Swap),
            _ => None,
        }
    }

    /// Lower-case QASM mnemonic for single-qubit gates.
    pub fn mnemonic(self) -> Option<&'static str> {
        Some(match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            _ => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GateKind::Ident => "I",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::CxControl => "CX.c",
            GateKind::CxTarget => "CX.t",
            GateKind::CcxControl1 => "CCX.c1",
            GateKind::CcxControl2 => "CCX.c2",
            GateKind::CcxTarget => "CCX.t",
            GateKind::SwapA => "SWAP.a",
            GateKind::SwapB => "SWAP.b",
        };
        f.write_str(name)
    }
}

/// Multi-qubit gate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Cx,
    Ccx,
    Swap,
}

impl GroupKind {
    /// Partner tokens of the family, in operand order.
    pub fn tokens(self) -> &'static [GateKind] {
        match self {
            GroupKind::Cx => &[GateKind::CxControl, GateKind::CxTarget],
            GroupKind::Ccx => &[
                GateKind::CcxControl1,
                GateKind::CcxControl2,
                GateKind::CcxTarget,
            ],
            GroupKind::Swap => &[GateKind::SwapA, GateKind::SwapB],
        }
    }

    pub const ALL: [GroupKind; 3] = [GroupKind::Cx, GroupKind::Ccx, GroupKind::Swap];
}

/// A gate instance with its operand qubits, independent of grid position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Single(GateKind, usize),
    Cx {
        control: usize,
        target: usize,
    },
    Ccx {
        control1: usize,
        control2: usize,
        target: usize,
    },
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Single(_, q) => vec![q],
            Gate::Cx { control, target } => vec![control, target],
            Gate::Ccx {
                control1,
                control2,
                target,
            } => vec![control1, control2, target],
            Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn group(&self) -> Option<GroupKind> {
        match self {
            Gate::Single(..) => None,
            Gate::Cx { .. } => Some(GroupKind::Cx),
            Gate::Ccx { .. } => Some(GroupKind::Ccx),
            Gate::Swap(..) => Some(GroupKind::Swap),
        }
    }

    /// `(qubit, token)` cells this gate occupies in its column.
    pub fn cells(&self) -> Vec<(usize, GateKind)> {
        match *self {
            Gate::Single(kind, q) => vec![(q, kind)],
            Gate::Cx { control, target } => {
                vec![(control, GateKind::CxControl), (target, GateKind::CxTarget)]
            }
            Gate::Ccx {
                control1,
                control2,
                target,
            } => vec![
                (control1, GateKind::CcxControl1),
                (control2, GateKind::CcxControl2),
                (target, GateKind::CcxTarget),
            ],
            Gate::Swap(a, b) => vec![(a, GateKind::SwapA), (b, GateKind::SwapB)],
        }
    }
}
