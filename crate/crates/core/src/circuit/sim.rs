//! Dense statevector and unitary simulation.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 least significant).

use super::gate::{Gate, GateKind};
use super::grid::{column_gates, Circuit};
use super::CircuitError;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Largest register [`simulate_unitary`] accepts.
pub const MAX_UNITARY_QUBITS: usize = 10;
/// Largest register [`simulate_statevector`] accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

/// Row-major `dim × dim` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix { dim, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        UnitaryMatrix {
            dim,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        UnitaryMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self · other`.
    pub fn matmul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix, CircuitError> {
        if self.dim != other.dim {
            return Err(CircuitError::DimensionMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(UnitaryMatrix { dim: n, data })
    }

    /// Largest entry of `|U·U† − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.data[i * n + k] * self.data[j * n + k].conj();
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Whether `u1 = e^{iφ}·u2` entry-wise within `tol`. The phase is read off the
/// first entry (row-major) where both matrices exceed `tol` in magnitude.
pub fn equivalent_up_to_phase(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    tol: f64,
) -> Result<bool, CircuitError> {
    if u1.dim != u2.dim {
        return Err(CircuitError::DimensionMismatch(u1.dim, u2.dim));
    }
    let phase = u1
        .data
        .iter()
        .zip(&u2.data)
        .find(|(a, b)| a.norm() > tol && b.norm() > tol)
        .map(|(a, b)| {
            let r = a / b;
            r / r.norm()
        })
        .unwrap_or(Complex64::new(1.0, 0.0));
    Ok(u1
        .data
        .iter()
        .zip(&u2.data)
        .all(|(a, b)| (a - phase * b).norm() <= tol))
}

/// Unitary of the whole circuit; column 0 is applied first.
pub fn simulate_unitary(c: &Circuit) -> Result<UnitaryMatrix, CircuitError> {
    let q = c.num_qubits();
    if q > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooManyQubits {
            qubits: q,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << q;
    // Column j of U is the image of basis state |j>.
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[j] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    for column in c.columns() {
        for gate in column_gates(column) {
            for v in cols.iter_mut() {
                apply_gate(v, &gate);
            }
        }
    }
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (j, v) in cols.iter().enumerate() {
        for (i, amp) in v.iter().enumerate() {
            data[i * dim + j] = *amp;
        }
    }
    Ok(UnitaryMatrix { dim, data })
}

/// Final state starting from |0…0⟩.
pub fn simulate_statevector(c: &Circuit) -> Result<Vec<Complex64>, CircuitError> {
    let q = c.num_qubits();
    if q > MAX_STATEVECTOR_QUBITS {
        return Err(CircuitError::TooManyQubits {
            qubits: q,
            max: MAX_STATEVECTOR_QUBITS,
        });
    }
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << q];
    state[0] = Complex64::new(1.0, 0.0);
    for column in c.columns() {
        for gate in column_gates(column) {
            apply_gate(&mut state, &gate);
        }
    }
    Ok(state)
}

/// Computational-basis outcome probabilities from |0…0⟩.
pub fn outcome_distribution(c: &Circuit) -> Result<Vec<f64>, CircuitError> {
    Ok(simulate_statevector(c)?
        .iter()
        .map(|a| a.norm_sqr())
        .collect())
}

/// 2×2 matrix `[[a, b], [c, d]]` of a single-qubit gate.
pub fn single_qubit_matrix(kind: GateKind) -> Option<[[Complex64; 2]; 2]> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let h = FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::X => [[o, l], [l, o]],
        GateKind::Y => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
        GateKind::Z => [[l, o], [o, c(-1.0, 0.0)]],
        GateKind::S => [[l, o], [o, c(0.0, 1.0)]],
        GateKind::Sdg => [[l, o], [o, c(0.0, -1.0)]],
        GateKind::T => [[l, o], [o, c(h, h)]],
        GateKind::Tdg => [[l, o], [o, c(h, -h)]],
        _ => return None,
    })
}

fn apply_gate(state: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::Single(kind, q) => {
            let m = single_qubit_matrix(kind).expect("single-qubit gate");
            let bit = 1usize << q;
            for i in 0..state.len() {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    state[i] = m[0][0] * a + m[0][1] * b;
                    state[i | bit] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
        Gate::Cx { control, target } => {
            let (cb, tb) = (1usize << control, 1usize << target);
            for i in 0..state.len() {
                if i & cb != 0 && i & tb == 0 {
                    state.swap(i, i | tb);
                }
            }
        }
        Gate::Ccx {
            control1,
            control2,
            target,
        } => {
            let cb = (1usize << control1) | (1usize << control2);
            let tb = 1usize << target;
            for i in 0..state.len() {
                if i & cb == cb && i & tb == 0 {
                    state.swap(i, i | tb);
                }
            }
        }
        Gate::Swap(a, b) => {
            let (ab, bb) = (1usize << a, 1usize << b);
            for i in 0..state.len() {
                if i & ab != 0 && i & bb == 0 {
                    state.swap(i, (i & !ab) | bb);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;

    fn u(text: &str) -> UnitaryMatrix {
        simulate_unitary(&parse_qasm(text).unwrap()).unwrap()
    }

    fn assert_close(a: &UnitaryMatrix, b: &UnitaryMatrix) {
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert!((a.get(i, j) - b.get(i, j)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn empty_is_identity() {
        assert_close(&u("qreg q[1];"), &UnitaryMatrix::identity(2));
    }

    #[test]
    fn hadamard_matrix() {
        let h = FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        let expected = UnitaryMatrix::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]);
        assert_close(&u("qreg q[1]; h q[0];"), &expected);
    }

    #[test]
    fn hzh_is_x() {
        let c = |re: f64| Complex64::new(re, 0.0);
        let x = UnitaryMatrix::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]);
        assert_close(&u("qreg q[1]; h q[0]; z q[0]; h q[0];"), &x);
    }

    #[test]
    fn phase_equivalence() {
        let x = u("qreg q[1]; x q[0];");
        let z = u("qreg q[1]; z q[0];");
        let hzh = u("qreg q[1]; h q[0]; z q[0]; h q[0];");
        let rotated = x.scale(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4));
        assert!(equivalent_up_to_phase(&x, &rotated, 1e-12).unwrap());
        assert!(equivalent_up_to_phase(&x, &hzh, 1e-10).unwrap());
        assert!(!equivalent_up_to_phase(&x, &z, 1e-10).unwrap());
        let two = u("qreg q[2];");
        assert!(matches!(
            equivalent_up_to_phase(&x, &two, 1e-10),
            Err(CircuitError::DimensionMismatch(2, 4))
        ));
    }

    #[test]
    fn column_order_is_application_order() {
        // X then H on |0>: H|1> = (|0> - |1>)/√2.
        let state =
            simulate_statevector(&parse_qasm("qreg q[1]; x q[0]; h q[0];").unwrap()).unwrap();
        assert!((state[1].re + FRAC_1_SQRT_2).abs() < 1e-12);
        // cx with control q0: |01> (q0 = 1) -> |11>.
        let state =
            simulate_statevector(&parse_qasm("qreg q[2]; x q[0]; cx q[0],q[1];").unwrap()).unwrap();
        assert!((state[3].re - 1.0).abs() < 1e-12);
        let state =
            simulate_statevector(&parse_qasm("qreg q[3]; x q[0]; swap q[0],q[2];").unwrap())
                .unwrap();
        assert!((state[4].re - 1.0).abs() < 1e-12);
        let state = simulate_statevector(
            &parse_qasm("qreg q[3]; x q[0]; x q[1]; ccx q[0],q[1],q[2];").unwrap(),
        )
        .unwrap();
        assert!((state[7].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matmul_and_unitarity() {
        let hh = u("qreg q[1]; h q[0];")
            .matmul(&u("qreg q[1]; h q[0];"))
            .unwrap();
        assert_close(&hh, &UnitaryMatrix::identity(2));
        assert!(
            u("qreg q[3]; h q[0]; ccx q[0],q[1],q[2]; t q[1]; swap q[1],q[2];").unitarity_error()
                < 1e-12
        );
    }

    #[test]
    fn too_many_qubits() {
        let c = Circuit::empty(11).unwrap();
        assert!(matches!(
            simulate_unitary(&c),
            Err(CircuitError::TooManyQubits { .. })
        ));
    }
}
