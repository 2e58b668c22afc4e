//! The attacks rewrite a circuit without changing what it computes. Apply
//! each one to a small random circuit and compare unitaries (or, for strict
//! appends, measurement statistics). Deletion is the exception: it removes
//! a gate outright.

use qtag::attacks::{apply_attack, AttackKind, AttackSpec};
use qtag::circuit::{
    equivalent_up_to_phase, outcome_distribution, simulate_unitary, Circuit, CircuitBuilder, Gate,
    GateKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(rng: &mut ChaCha8Rng, nq: usize, gates: usize) -> Circuit {
    let mut b = CircuitBuilder::new(nq).unwrap();
    for _ in 0..gates {
        let q = rng.random_range(0..nq);
        let other = (q + rng.random_range(1..nq)) % nq;
        let gate = match rng.random_range(0..4) {
            0 => Gate::Cx {
                control: q,
                target: other,
            },
            1 => Gate::Swap(q, other),
            _ => Gate::Single(GateKind::SINGLE_QUBIT[rng.random_range(0..8)], q),
        };
        b.place(gate).unwrap();
    }
    b.finish()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = random_circuit(&mut rng, 5, 24);
    let u = simulate_unitary(&c)?;
    let probs = outcome_distribution(&c)?;
    println!(
        "original: {} gates, {} columns",
        c.gate_count(),
        c.num_columns()
    );

    for (kind, count) in [
        (AttackKind::Replace, 3),
        (AttackKind::Insert, 2),
        (AttackKind::Append, 4),
        (AttackKind::Delete, 1),
    ] {
        let attacked = apply_attack(&c, &AttackSpec::new(kind, count, 5))?;
        let same_unitary = equivalent_up_to_phase(&simulate_unitary(&attacked)?, &u, 1e-10)?;
        let same_stats = outcome_distribution(&attacked)?
            .iter()
            .zip(&probs)
            .all(|(a, b)| (a - b).abs() < 1e-10);
        println!(
            "{:>8} x{count}: {:>2} gates, {:>2} columns, unitary preserved={same_unitary}, |0..0> statistics preserved={same_stats}",
            AttackSpec::new(kind, count, 0).label(),
            attacked.gate_count(),
            attacked.num_columns(),
        );
    }
    Ok(())
}
