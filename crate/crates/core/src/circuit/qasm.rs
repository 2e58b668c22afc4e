//! A small QASM subset: one register, the fixed gate vocabulary, `//`
//! comments. `barrier q;` is accepted as a layer separator so that a grid
//! layout can be written out and read back column-for-column.

use super::gate::{Gate, GateKind};
use super::grid::{column_gates, Circuit, CircuitBuilder};
use super::CircuitError;
use std::fmt::Write as _;

/// Parses QASM-subset text. Gates are placed greedily in the earliest free
/// column; see [`CircuitBuilder`].
pub fn parse_qasm(text: &str) -> Result<Circuit, CircuitError> {
    let mut register: Option<(String, CircuitBuilder)> = None;
    for (line, stmt) in statements(text)? {
        let (name, rest) = match stmt.split_once(char::is_whitespace) {
            Some((n, r)) => (n, r.split_whitespace().collect::<String>()),
            None => (stmt.as_str(), String::new()),
        };
        let syntax = |message: String| CircuitError::Syntax { line, message };

        match name {
            "OPENQASM" | "include" => continue,
            "qreg" => {
                if register.is_some() {
                    return Err(syntax("second qreg declaration".into()));
                }
                let (reg, size) =
                    operand(&rest).ok_or_else(|| syntax(format!("bad qreg `{rest}`")))?;
                if size == 0 {
                    return Err(syntax("register must hold at least one qubit".into()));
                }
                register = Some((reg.to_string(), CircuitBuilder::new(size)?));
                continue;
            }
            _ => {}
        }

        let Some((reg, builder)) = register.as_mut() else {
            return Err(syntax(format!("`{name}` before qreg declaration")));
        };

        if name == "barrier" {
            if rest != *reg {
                return Err(syntax(format!(
                    "barrier must name the whole register `{reg}`"
                )));
            }
            builder.barrier();
            continue;
        }

        let mut qubits = Vec::new();
        for arg in rest.split(',') {
            let (r, idx) = operand(arg).ok_or_else(|| syntax(format!("bad operand `{arg}`")))?;
            if r != reg {
                return Err(syntax(format!("unknown register `{r}`")));
            }
            qubits.push(idx);
        }
        let arity = |n: usize| {
            if qubits.len() == n {
                Ok(())
            } else {
                Err(syntax(format!(
                    "`{name}` takes {n} operand(s), got {}",
                    qubits.len()
                )))
            }
        };
        let gate = match name {
            "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" => {
                arity(1)?;
                let kind = GateKind::SINGLE_QUBIT
                    .into_iter()
                    .find(|g| g.mnemonic() == Some(name))
                    .expect("mnemonic listed above");
                Gate::Single(kind, qubits[0])
            }
            "cx" => {
                arity(2)?;
                Gate::Cx {
                    control: qubits[0],
                    target: qubits[1],
                }
            }
            "ccx" => {
                arity(3)?;
                Gate::Ccx {
                    control1: qubits[0],
                    control2: qubits[1],
                    target: qubits[2],
                }
            }
            "swap" => {
                arity(2)?;
                Gate::Swap(qubits[0], qubits[1])
            }
            other => return Err(CircuitError::UnsupportedGate(other.to_string())),
        };
        builder.place(gate)?;
    }
    match register {
        Some((_, builder)) => Ok(builder.finish()),
        None => Err(CircuitError::Syntax {
            line: 0,
            message: "missing qreg declaration".into(),
        }),
    }
}

/// Canonical text: register declaration, then one statement per gate in
/// column order. Column boundaries are not recorded, so reading the text back
/// yields [`Circuit::canonical`].
pub fn emit_qasm(c: &Circuit) -> String {
    emit(c, false)
}

/// Like [`emit_qasm`] but closes every column with `barrier q;`, so
/// `parse_qasm` reproduces the exact grid, empty columns included.
pub fn emit_qasm_with_barriers(c: &Circuit) -> String {
    emit(c, true)
}

fn emit(c: &Circuit, barriers: bool) -> String {
    let mut out = format!("qreg q[{}];\n", c.num_qubits());
    for col in c.columns() {
        for gate in column_gates(col) {
            let _ = match gate {
                Gate::Single(kind, q) => {
                    writeln!(
                        out,
                        "{} q[{q}];",
                        kind.mnemonic().expect("single-qubit gate")
                    )
                }
                Gate::Cx { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
                Gate::Ccx {
                    control1,
                    control2,
                    target,
                } => writeln!(out, "ccx q[{control1}],q[{control2}],q[{target}];"),
                Gate::Swap(a, b) => writeln!(out, "swap q[{a}],q[{b}];"),
            };
        }
        if barriers {
            out.push_str("barrier q;\n");
        }
    }
    out
}

/// Splits on `;` after stripping comments, keeping the 1-based line where
/// each statement starts.
fn statements(text: &str) -> Result<Vec<(usize, String)>, CircuitError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let code = raw.split("//").next().unwrap_or("");
        for ch in code.chars() {
            if ch == ';' {
                let stmt = current.trim().to_string();
                if !stmt.is_empty() {
                    out.push((start_line, stmt));
                }
                current.clear();
            } else {
                if current.trim().is_empty() && !ch.is_whitespace() {
                    start_line = i + 1;
                }
                current.push(ch);
            }
        }
        current.push(' ');
    }
    let tail = current.trim();
    if !tail.is_empty() {
        return Err(CircuitError::Syntax {
            line: start_line,
            message: format!("missing `;` after `{tail}`"),
        });
    }
    Ok(out)
}

/// `name[index]` with whitespace already removed.
fn operand(s: &str) -> Option<(&str, usize)> {
    let open = s.find('[')?;
    let inner = s.strip_suffix(']')?.get(open + 1..)?;
    let name = &s[..open];
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((name, inner.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use GateKind::*;

    #[test]
    fn parses_h_then_cx() {
        let c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        assert_eq!(c.num_qubits(), 2);
        assert_eq!(c.columns(), &[vec![H, Ident], vec![CxControl, CxTarget]]);
    }

    #[test]
    fn empty_body() {
        let c = parse_qasm("qreg q[3];").unwrap();
        assert_eq!((c.num_qubits(), c.num_columns()), (3, 0));
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            parse_qasm("qreg q[2]; cx q[0],q[0];"),
            Err(CircuitError::DuplicateOperand(0))
        );
        assert!(matches!(
            parse_qasm("qreg q[2]; h q[2];"),
            Err(CircuitError::QubitOutOfRange { qubit: 2, .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; rx(0.1) q[0];"),
            Err(CircuitError::UnsupportedGate(_))
        ));
        assert!(matches!(
            parse_qasm("h q[0];"),
            Err(CircuitError::Syntax { .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2];\nh q[0]\n"),
            Err(CircuitError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; cx q[0];"),
            Err(CircuitError::Syntax { .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2]; h r[0];"),
            Err(CircuitError::Syntax { .. })
        ));
        assert!(matches!(parse_qasm(""), Err(CircuitError::Syntax { .. })));
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "// header\nOPENQASM 2.0;\nqreg q [ 3 ] ; // three\n  cx  q[2] , q[0];\nswap q[1],q[2];";
        let c = parse_qasm(text).unwrap();
        assert_eq!(
            c.columns(),
            &[vec![CxTarget, Ident, CxControl], vec![Ident, SwapA, SwapB]]
        );
    }

    #[test]
    fn emit_examples() {
        let idle = Circuit::from_columns(8, vec![vec![Ident; 8]; 4]).unwrap();
        assert_eq!(emit_qasm(&idle), "qreg q[8];\n");
        let one = Circuit::from_columns(2, vec![vec![H, Ident]]).unwrap();
        assert_eq!(emit_qasm(&one), "qreg q[2];\nh q[0];\n");
    }

    #[test]
    fn barriers_preserve_layout() {
        let c = Circuit::from_columns(
            2,
            vec![
                vec![Ident, Ident],
                vec![Ident, X],
                vec![Ident, Ident],
                vec![H, Ident],
            ],
        )
        .unwrap();
        let text = emit_qasm_with_barriers(&c);
        assert_eq!(parse_qasm(&text).unwrap(), c);
        // Without barriers the same gates pack into one column.
        assert_eq!(parse_qasm(&emit_qasm(&c)).unwrap().num_columns(), 1);
    }
}
