//! Mixed-unitary test of qubit channels from their Choi states.

use rankhier::applications::{choi_state, mixed_unitary_check};
use rankhier::matrix::{Field, FieldMatrix, C64};
use rankhier::solver::SolverConfig;

fn pauli(i: usize) -> FieldMatrix {
    let c = |re: f64, im: f64| C64::new(re, im);
    let z = c(0.0, 0.0);
    let entries = match i {
        0 => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        1 => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        2 => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        _ => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
    };
    FieldMatrix::from_complex(2, 2, entries.to_vec()).expect("2x2")
}

fn main() -> rankhier::Result<()> {
    let p: f64 = 0.3;
    let dephasing = vec![pauli(0).scale((1.0 - p).sqrt()), pauli(3).scale(p.sqrt())];
    let gamma: f64 = 0.3;
    let damping = vec![
        FieldMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?.promote(Field::Complex)?,
        FieldMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?.promote(Field::Complex)?,
    ];
    let cfg = SolverConfig::default();
    for (name, kraus) in [("dephasing", dephasing), ("amplitude damping", damping)] {
        let r = mixed_unitary_check(&choi_state(&kraus)?, &cfg)?;
        println!("{name}: {:?} (margin {:.3e})", r.verdict, r.margin.certified.unwrap_or(r.margin.margin));
    }
    Ok(())
}
