//! Objectives quadratic in ρ, lifted to two copies: the smallest variance
//! of σ_z over qubit states with ⟨σ_x⟩ = 0.6.

use rankhier::applications::quadratic_opt;
use rankhier::hierarchy::LevelSpec;
use rankhier::matrix::{Field, FieldMatrix};
use rankhier::problem::{LinearFunctional, PairKind, PairTerm, QuadraticObjective, RankSdp, Sense};
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let z = FieldMatrix::diag_real(&[1.0, -1.0]);
    let x = FieldMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?;
    let id = FieldMatrix::identity(Field::Real, 2);
    // Var(σ_z) = Tr(σ_z²ρ)·Tr ρ − Tr(σ_zρ)²
    let variance = QuadraticObjective {
        terms: vec![
            PairTerm { x: z.matmul(&z)?, y: id, kind: PairKind::ProductOfTraces, weight: 1.0 },
            PairTerm { x: z.clone(), y: z, kind: PairKind::ProductOfTraces, weight: -1.0 },
        ],
    };
    let zero = FieldMatrix::zeros(Field::Real, 2, 2);
    let cfg = SolverConfig::default();
    for k in [1.0, 2.0] {
        let base = RankSdp::new(Field::Real, zero.clone(), Sense::Min)?
            .with_rank_bound(k)?
            .with_constraint(LinearFunctional::eq(x.clone(), 0.6))?;
        let b = quadratic_opt(&variance, &base, &LevelSpec::reduced(), &cfg)?;
        println!("rank ≤ {k}: min variance {:.6} (certified {:?})", b.value, b.certified);
    }
    // ⟨σ_x⟩² + ⟨σ_z⟩² ≤ 1 caps ⟨σ_z⟩ at 0.8
    println!("analytic minimum 1 − 0.8² = {:.6}", 1.0 - 0.64);
    Ok(())
}
