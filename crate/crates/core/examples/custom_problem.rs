//! A rank-constrained problem written from scratch: pure states of two
//! qubits maximizing an observable under a marginal constraint. Shows the
//! JSON form, the hierarchy levels and certification.

use rankhier::hierarchy::{build, BuildOptions, LevelSpec};
use rankhier::matrix::{kron, Field, FieldMatrix};
use rankhier::problem::{LinearFunctional, RankSdp, Sense};
use rankhier::solver::{certify_upper_bound, SolverConfig};

fn main() -> rankhier::Result<()> {
    let z = FieldMatrix::diag_real(&[1.0, -1.0]);
    let x = FieldMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?;
    let id = FieldMatrix::identity(Field::Real, 2);
    let objective = kron(&x, &x)?.try_add(&kron(&z, &z)?)?;
    let p = RankSdp::new(Field::Real, objective, Sense::Max)?
        .with_constraint(LinearFunctional::eq(kron(&z, &id)?, 0.4))?;
    let text = p.to_json()?;
    println!("problem JSON: {} bytes", text.len());
    let p = RankSdp::from_json(&text)?;
    let cfg = SolverConfig::default();
    for spec in [LevelSpec::level1(), LevelSpec::reduced(), LevelSpec::level_n(3)] {
        let relax = build(&p, &spec, &BuildOptions::default())?;
        let sol = relax.solve(&cfg)?;
        let cert = certify_upper_bound(&relax.program, &sol)?;
        println!("level {:>2}: {:.6} certified ≤ {cert:.6} ({:?}, {} iterations)", spec.label(), sol.primal_value, sol.status, sol.iterations);
    }
    Ok(())
}
