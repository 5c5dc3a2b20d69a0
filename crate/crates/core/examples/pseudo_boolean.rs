//! Quadratic pseudo-Boolean maximization `max xᵀQx + cᵀx`, x ∈ {±1}ᵐ.

use rankhier::applications::{pseudo_boolean_bound, pseudo_boolean_bruteforce};
use rankhier::hierarchy::LevelSpec;
use rankhier::matrix::FieldMatrix;
use rankhier::problem::Sense;
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let m = 7;
    // frustrated ring with a field on the first spin
    let q = FieldMatrix::real_fn(m, m, |i, j| if (i + 1) % m == j || (j + 1) % m == i { -1.0 } else { 0.0 });
    let mut c = vec![0.0; m];
    c[0] = 0.5;
    let cfg = SolverConfig::default();
    for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
        let b = pseudo_boolean_bound(&q, &c, &spec, Sense::Max, &cfg)?;
        println!("level {}: {:.6} (certified {:?})", b.level, b.value, b.certified);
    }
    let exact = pseudo_boolean_bruteforce(&q, &c, Sense::Max)?;
    println!("exact: {:.6} at {:?}", exact.value, exact.witness);
    Ok(())
}
