//! Largest expectation of an observable over pure qutrit states matching
//! two measured expectation values, bounded by the hierarchy and
//! approached from below by sampling.

use rankhier::applications::pure_state_opt;
use rankhier::hierarchy::LevelSpec;
use rankhier::matrix::{Field, FieldMatrix, C64};
use rankhier::oracles::{sample_pure_states, SampleConfig};
use rankhier::problem::{LinearFunctional, RankSdp, Sense};
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let x = FieldMatrix::diag_real(&[1.0, 0.0, -1.0]);
    let m1 = FieldMatrix::real_fn(3, 3, |i, j| if i != j { 1.0 } else { 0.0 });
    let m2 = FieldMatrix::from_fn(Field::Complex, 3, 3, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    });
    let data = vec![(m1.clone(), 0.6), (m2.clone(), 0.2)];
    let cfg = SolverConfig::default();
    for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
        let b = pure_state_opt(&x, &data, &spec, &cfg)?;
        println!("level {}: {:.6} (certified {:?})", b.level, b.value, b.certified);
    }
    let mut p = RankSdp::new(Field::Complex, x.promote(Field::Complex)?, Sense::Max)?;
    p.push(LinearFunctional::eq(m1.promote(Field::Complex)?, 0.6))?;
    p.push(LinearFunctional::eq(m2, 0.2))?;
    let s = sample_pure_states(&p, &SampleConfig::default())?;
    println!("best sampled pure state: {:.6}", s.value);
    Ok(())
}
