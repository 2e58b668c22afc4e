//! Parse a QASM program into the column grid, print the grid, and check that
//! the emitted text reads back to the same circuit.

use qtag::circuit::{emit_qasm, outcome_distribution, parse_qasm, GateKind};

const PROGRAM: &str = "
OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[4];
h q[0];
cx q[0],q[1];
t q[2];
ccx q[0],q[1],q[3];
swap q[2],q[3];
x q[0];
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = parse_qasm(PROGRAM)?;
    println!(
        "{} qubits, {} columns, {} gates",
        c.num_qubits(),
        c.num_columns(),
        c.gate_count()
    );
    for q in 0..c.num_qubits() {
        let row: Vec<String> = (0..c.num_columns())
            .map(|t| match c.get(q, t) {
                GateKind::Ident => "  .".to_string(),
                g => format!("{:>3}", g.token_id()),
            })
            .collect();
        println!("q{q}: {}", row.join(""));
    }

    let text = emit_qasm(&c);
    print!("\n{text}");
    assert_eq!(parse_qasm(&text)?, c);

    let probs = outcome_distribution(&c)?;
    println!("\nnon-zero outcome probabilities:");
    for (i, p) in probs.iter().enumerate().filter(|(_, p)| **p > 1e-12) {
        println!("  |{i:04b}> {p:.4}");
    }
    Ok(())
}
