//! Problems over quantum states: pure-state estimation, quadratic
//! objectives, mixtures of maximally entangled states (mixed-unitary
//! channels and fidelity-based entanglement detection).

use super::{solve_level, Bound, Exclusion};
use crate::error::{Error, Result};
use crate::hierarchy::{build, BuildOptions, LevelSpec, PhaseSymmetry};
use crate::matrix::{hermitian_basis, kron, partial_trace, Field, FieldMatrix, TensorLayout, C64};
use crate::oracles::{sample_maximally_entangled, SampleConfig};
use crate::problem::{lift_quadratic, LinearFunctional, QuadraticObjective, RankSdp, Sense};
use crate::solver::{feasibility_margin, MarginReport, SolverConfig};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Tolerance for validating input states and Choi matrices.
pub const STATE_TOL: f64 = 1e-8;

/// `max ⟨φ|X|φ⟩` over unit vectors with `⟨φ|M_i|φ⟩ = m_i`.
pub fn pure_state_opt(x: &FieldMatrix, measurements: &[(FieldMatrix, f64)], spec: &LevelSpec, cfg: &SolverConfig) -> Result<Bound> {
    let field = measurements.iter().fold(x.field(), |f, (m, _)| f.join(m.field()));
    let mut p = RankSdp::new(field, x.clone(), Sense::Max)?;
    for (m, v) in measurements {
        if !m.is_hermitian() {
            return Err(Error::Invalid("measurement operators must be Hermitian".into()));
        }
        p.push(LinearFunctional::eq(m.clone(), *v))?;
    }
    Ok(solve_level(&p, spec, &BuildOptions::default(), cfg)?.0)
}

/// Bound on a quadratic objective `Σ w·f(ρ)` over the feasible set and rank
/// bound of `base`, in the direction of `base.sense`; `base.objective` is
/// ignored. Needs level 2 or higher.
pub fn quadratic_opt(q: &QuadraticObjective, base: &RankSdp, spec: &LevelSpec, cfg: &SolverConfig) -> Result<Bound> {
    if !base.normalized {
        return Err(Error::Invalid("quadratic objectives need a trace-normalized base problem".into()));
    }
    let pair = lift_quadratic(q, base)?;
    let field = spec.field.unwrap_or(base.field).join(pair.field());
    let spec = LevelSpec { field: Some(field), ..spec.clone() };
    let opts = BuildOptions { pair_objective: Some(pair), ..Default::default() };
    Ok(solve_level(base, &spec, &opts, cfg)?.0)
}

fn local_dim(total: usize) -> Result<usize> {
    let n = (total as f64).sqrt().round() as usize;
    if n * n != total || n == 0 {
        return Err(Error::Dimension(format!("{total} is not the dimension of ℂⁿ ⊗ ℂⁿ")));
    }
    Ok(n)
}

fn check_state(m: &FieldMatrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} is not square")));
    }
    let n = local_dim(m.nrows())?;
    if m.hermitian_defect() > STATE_TOL {
        return Err(Error::Invalid(format!("{what} is not Hermitian")));
    }
    if (m.trace().re - 1.0).abs() > STATE_TOL {
        return Err(Error::Invalid(format!("{what} does not have unit trace")));
    }
    if m.min_eigenvalue() < -STATE_TOL {
        return Err(Error::Invalid(format!("{what} is not positive semidefinite")));
    }
    Ok(n)
}

/// Rank-one problem over `σ = |φ⟩⟨φ|` on `ℂⁿ ⊗ ℂⁿ` with both reduced states
/// equal to `𝟙/n`: the extreme points of the mixtures of maximally
/// entangled states.
pub fn maximally_entangled_problem(objective: &FieldMatrix, n: usize, sense: Sense) -> Result<RankSdp> {
    let mut p = RankSdp::new(Field::Complex, objective.to_complex(), sense)?;
    if p.dim_n != n * n {
        return Err(Error::Dimension(format!("objective must be {0}x{0}", n * n)));
    }
    let id = FieldMatrix::identity(Field::Complex, n);
    for g in hermitian_basis(n, Field::Complex) {
        let t = g.trace().re / n as f64;
        p.push(LinearFunctional::eq(kron(&g, &id)?, t))?;
        p.push(LinearFunctional::eq(kron(&id, &g)?, t))?;
    }
    p.notes.push("pure states with maximally mixed marginals".into());
    Ok(p)
}

/// Charges `e_a − e_b` of `|ab⟩`: the symmetry `U ⊗ Ū` with diagonal `U`.
fn local_phase_symmetry(n: usize) -> PhaseSymmetry {
    let charges = (0..n * n)
        .map(|ab| (0..n).map(|c| i64::from(ab / n == c) - i64::from(ab % n == c)).collect())
        .collect();
    PhaseSymmetry { charges, modulus: None }
}

/// The phase symmetry, if the objective respects it.
fn symmetry_for(p: &RankSdp, n: usize) -> Option<PhaseSymmetry> {
    let s = local_phase_symmetry(n);
    s.verify(p).is_ok().then_some(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Certified: no fidelity-based witness detects the state.
    Unfaithful,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfaithfulnessVerdict {
    /// Certified upper bound on `max Tr(σρ)` over mixtures of maximally
    /// entangled `σ` (NaN if certification failed).
    pub xi2t: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Best overlap found by sampling maximally entangled states.
    pub lower_bound: Option<f64>,
    pub bound: Bound,
}

/// Bound on `max Tr(σρ)` over mixtures of maximally entangled states at
/// any level.
pub fn unfaithfulness_bound(rho: &FieldMatrix, spec: &LevelSpec, cfg: &SolverConfig) -> Result<Bound> {
    let n = check_state(rho, "state")?;
    let p = maximally_entangled_problem(rho, n, Sense::Max)?;
    let opts = BuildOptions { symmetry: symmetry_for(&p, n), ..Default::default() };
    Ok(solve_level(&p, &spec.clone().with_field(Field::Complex), &opts, cfg)?.0)
}

/// Certifies unfaithfulness when the level-2 bound with partial transposes
/// is at most `1/n`.
pub fn unfaithfulness_check(rho: &FieldMatrix, cfg: &SolverConfig, sample: Option<&SampleConfig>) -> Result<UnfaithfulnessVerdict> {
    let n = check_state(rho, "state")?;
    let bound = unfaithfulness_bound(rho, &LevelSpec::reduced(), cfg)?;
    let threshold = 1.0 / n as f64;
    let xi2t = bound.certified.unwrap_or(f64::NAN);
    let lower_bound = sample.map(|s| sample_maximally_entangled(&rho.to_complex(), n, s)).transpose()?.map(|r| r.value);
    let verdict = if xi2t <= threshold { Verdict::Unfaithful } else { Verdict::Inconclusive };
    if verdict == Verdict::Unfaithful && lower_bound.is_some_and(|l| l > threshold + 1e-6) {
        return Err(Error::Numerical(format!("sampled overlap {lower_bound:?} contradicts the certified bound {xi2t}")));
    }
    Ok(UnfaithfulnessVerdict { xi2t, threshold, verdict, lower_bound, bound })
}

/// The two-ququart state `p𝟙/16 + (1−p)/2 (|x⟩⟨x| + |y⟩⟨y|)` with
/// `|x⟩ = Σ_α √α |αα⟩/√10` and `|y⟩ = Σ_α β^α √(5−α) |αα⟩/√10`, α = 1..4.
pub fn fidelity_state(p: f64, beta: C64) -> FieldMatrix {
    let n = 4;
    let mut x = vec![C64::new(0.0, 0.0); n * n];
    let mut y = x.clone();
    for a in 1..=n {
        let i = (a - 1) * n + (a - 1);
        x[i] = C64::new((a as f64 / 10.0).sqrt(), 0.0);
        y[i] = beta.powu(a as u32) * ((5 - a) as f64 / 10.0).sqrt();
    }
    let mix = FieldMatrix::identity(Field::Complex, n * n).scale(p / 16.0);
    let px = FieldMatrix::outer(Field::Complex, &x).scale((1.0 - p) / 2.0);
    let py = FieldMatrix::outer(Field::Complex, &y).scale((1.0 - p) / 2.0);
    mix.try_add(&px).and_then(|m| m.try_add(&py)).expect("same shapes")
}

/// [`fidelity_state`] at `p = 23/40` with `β = i`, a state that is
/// entangled but undetectable by fidelity witnesses.
pub fn fidelity_fixture_state() -> FieldMatrix {
    fidelity_state(23.0 / 40.0, C64::new(0.0, 1.0))
}

/// Choi state `Σ_i (𝟙 ⊗ K_i)|φ⁺⟩⟨φ⁺|(𝟙 ⊗ K_i)†` of a channel given by Kraus
/// operators on `ℂⁿ`.
pub fn choi_state(kraus: &[FieldMatrix]) -> Result<FieldMatrix> {
    let n = kraus.first().map(FieldMatrix::nrows).ok_or_else(|| Error::Invalid("no Kraus operators".into()))?;
    let mut sum = FieldMatrix::zeros(Field::Complex, n, n);
    let mut j = FieldMatrix::zeros(Field::Complex, n * n, n * n);
    let amp = 1.0 / (n as f64).sqrt();
    for k in kraus {
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::Dimension("Kraus operators must be square and of equal size".into()));
        }
        sum = sum.try_add(&k.adjoint().matmul(k)?)?;
        let v: Vec<C64> = (0..n * n).map(|ab| k.get(ab % n, ab / n) * amp).collect();
        j = j.try_add(&FieldMatrix::outer(Field::Complex, &v))?;
    }
    if sum.distance(&FieldMatrix::identity(Field::Complex, n)) > STATE_TOL {
        return Err(Error::Invalid("Kraus operators are not trace preserving".into()));
    }
    Ok(j)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedUnitaryReport {
    pub verdict: Exclusion,
    pub margin: MarginReport,
    pub seconds: f64,
}

/// Tests whether a Choi state can be a mixture of maximally entangled
/// states with the level-2 relaxation (partial transposes included). A
/// certified negative margin proves the channel is not mixed-unitary.
pub fn mixed_unitary_check(j: &FieldMatrix, cfg: &SolverConfig) -> Result<MixedUnitaryReport> {
    let start = Instant::now();
    let n = check_state(j, "Choi state")?;
    let out_marginal = partial_trace(&j.to_complex(), &TensorLayout::new(vec![n, n])?, &[0])?;
    if out_marginal.distance(&FieldMatrix::identity(Field::Complex, n).scale(1.0 / n as f64)) > STATE_TOL {
        return Err(Error::Invalid("Choi state must have a maximally mixed input marginal".into()));
    }
    let zero = FieldMatrix::zeros(Field::Complex, n * n, n * n);
    let p = maximally_entangled_problem(&zero, n, Sense::Max)?;
    let opts = BuildOptions { fixed_marginal: Some(j.to_complex()), ..Default::default() };
    let relax = build(&p, &LevelSpec::reduced().with_field(Field::Complex), &opts)?;
    let margin = feasibility_margin(&relax.program, cfg)?;
    let verdict = if margin.infeasible { Exclusion::ExcludedAtLevel2 } else { Exclusion::Inconclusive };
    Ok(MixedUnitaryReport { verdict, margin, seconds: start.elapsed().as_secs_f64() })
}
