//! PSD embedding of rectangular variables, normalization of problems without
//! a trace constraint, and the lift of quadratic objectives to ρ⊗ρ.

use super::{LinearFunctional, LmiLeq, RankSdp, Relation, Sense};
use crate::error::{Error, Result};
use crate::matrix::{kron, swap_operator, Field, FieldMatrix, C64};
use serde::{Deserialize, Serialize};

/// Constraint `Re Tr(coeff·ω) (= or ≤) target` on a rectangular m×n variable
/// ω; `coeff` is n×m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerFunctional {
    pub coeff: FieldMatrix,
    pub target: f64,
    pub relation: Relation,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Block matrix [[0, c†], [c, 0]] of size (m+n) for an n×m matrix `c`.
fn off_diagonal_hermitian(c: &FieldMatrix, m: usize, n: usize) -> FieldMatrix {
    FieldMatrix::from_fn(c.field(), m + n, m + n, |i, j| match (i < m, j < m) {
        (true, false) => c.get(j - m, i).conj(),
        (false, true) => c.get(i - m, j),
        _ => C64::new(0.0, 0.0),
    })
}

/// Rank-constrained problem over a bounded rectangular variable, rewritten
/// over Ω = [[A, ω], [ω†, B]] ⪰ 0 with Tr Ω = 2R and rank Ω ≤ k.
///
/// The objective `Tr(Xω) + Tr(X†ω†) = Tr(LΩ)` with L = [[0, X†], [X, 0]]
/// keeps its value; the variable is normalized to Ω/(2R), so every
/// constraint target is divided by 2R.
pub fn psd_embed(
    omega_dims: (usize, usize),
    objective_x: &FieldMatrix,
    constraints: &[CornerFunctional],
    trace_bound_r: f64,
    rank_bound: f64,
    sense: Sense,
) -> Result<RankSdp> {
    if !(trace_bound_r > 0.0) {
        return Err(Error::Invalid(format!("trace-norm bound must be positive, got {trace_bound_r}")));
    }
    let (m, n) = omega_dims;
    let shape_ok = |c: &FieldMatrix| c.nrows() == n && c.ncols() == m;
    if !shape_ok(objective_x) || constraints.iter().any(|c| !shape_ok(&c.coeff)) {
        return Err(Error::Dimension(format!("coefficients must be {n}x{m}")));
    }
    let field = constraints.iter().fold(objective_x.field(), |f, c| f.join(c.coeff.field()));
    let two_r = 2.0 * trace_bound_r;
    let l = off_diagonal_hermitian(&objective_x.in_field(field)?, m, n).scale(two_r);
    let mut p = RankSdp::new(field, l, sense)?.with_rank_bound(rank_bound.min((m + n) as f64))?;
    for c in constraints {
        let coeff = off_diagonal_hermitian(&c.coeff.in_field(field)?, m, n).scale(0.5);
        p.push(LinearFunctional { coeff, target: c.target / two_r, relation: c.relation })?;
    }
    p.notes.push(format!("embedded {m}x{n} variable with trace-norm bound {trace_bound_r}"));
    Ok(p)
}

/// Problem over PSD ρ with Tr ρ ≤ R and no trace normalization, rewritten
/// over Ω = [[A, ρ], [ρ, B]] with the corner kept Hermitian and PSD.
pub fn trace_bound_embed(p: &RankSdp, r: f64) -> Result<RankSdp> {
    let n = p.dim_n;
    let field = p.field;
    // Re Tr(Cω) = Tr(Cρ) when the corner is Hermitian; halving the objective
    // undoes the doubling in Tr(LΩ)
    let cons: Vec<CornerFunctional> = p
        .constraints
        .iter()
        .map(|c| CornerFunctional { coeff: c.coeff.clone(), target: c.target, relation: c.relation })
        .collect();
    let mut out = psd_embed((n, n), &p.objective.scale(0.5), &cons, r, p.rank_bound, p.sense)?;
    let two_r = 2.0 * r;
    let big = 2 * n;
    let unit = |i: usize, j: usize| {
        let mut m = FieldMatrix::zeros(field, big, big);
        m.set(i, j, one());
        m
    };
    // ω = ω†: Ω[p, n+q] = Ω[n+p, q] for p < q (real and imaginary parts) and
    // Im Ω[p, n+p] = 0 over ℂ
    for a in 0..n {
        for b in a..n {
            let lhs = unit(n + b, a); // Tr(|n+b⟩⟨a| Ω) = Ω[a, n+b]
            let rhs = unit(b, n + a); // Ω[n+a, b]
            let diff = lhs.try_sub(&rhs)?;
            if b > a {
                let re = diff.try_add(&diff.adjoint())?.scale(0.5);
                out.push(LinearFunctional::eq(re, 0.0))?;
            }
            if field == Field::Complex {
                let im = diff.try_sub(&diff.adjoint())?.scale_complex(C64::new(0.0, -0.5));
                if im.max_abs() > 0.0 {
                    out.push(LinearFunctional::eq(im, 0.0))?;
                }
            }
        }
    }
    // ω ⪰ 0 as the matrix inequality −(ω + ω†)/2 ⪯ 0
    let maps: Vec<Vec<FieldMatrix>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let h = unit(n + b, a).try_add(&unit(b, n + a)).expect("same shape");
                    h.scale(-0.5)
                })
                .collect()
        })
        .collect();
    out.push_lmi(LmiLeq { maps, bound: FieldMatrix::zeros(field, n, n) })?;
    // Tr(N Ω) = Tr(Mρ) for N = ([[0, M], [0, 0]] + [[0, 0], [M, 0]])/2 on a
    // Hermitian corner; the normalized variable divides the bound by 2R
    for l in &p.lmi {
        let mut maps = Vec::with_capacity(l.out_dim());
        for row in &l.maps {
            let mut out_row = Vec::with_capacity(row.len());
            for m in row {
                let m = m.in_field(field)?;
                out_row.push(FieldMatrix::from_fn(field, big, big, |i, j| match (i < n, j < n) {
                    (true, false) => m.get(i, j - n) * 0.5,
                    (false, true) => m.get(i - n, j) * 0.5,
                    _ => C64::new(0.0, 0.0),
                }));
            }
            maps.push(out_row);
        }
        out.push_lmi(LmiLeq { maps, bound: l.bound.scale(1.0 / two_r) })?;
    }
    out.notes.push(format!("trace bound R = {r}; conclusions hold for the bounded variant"));
    Ok(out)
}

/// Strategy for [`normalize_unconstrained`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    /// Weights `C` on the constraint list with `W = Σ C_i coeff_i ≻ 0`; only
    /// equality constraints may carry nonzero weight.
    DualWitness(Vec<f64>),
    /// Bound `Tr ρ ≤ R` supplied by the caller.
    TraceBound(f64),
}

/// How to map a solution of the normalized problem back.
#[derive(Clone, Debug, PartialEq)]
pub enum Recovery {
    Identity,
    /// ρ = T ρ̃ T with T = √w · W^{-1/2}.
    Congruence(FieldMatrix),
    /// ρ is the Hermitian upper-right corner of 2R·Ω.
    Corner { dim: usize, scale: f64 },
}

impl Recovery {
    pub fn recover(&self, x: &FieldMatrix) -> FieldMatrix {
        match self {
            Recovery::Identity => x.clone(),
            Recovery::Congruence(t) => t.matmul(x).and_then(|m| m.matmul(t)).expect("square"),
            Recovery::Corner { dim, scale } => {
                let n = *dim;
                FieldMatrix::from_fn(x.field(), n, n, |i, j| x.get(i, n + j) * *scale)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalizedProblem {
    pub problem: RankSdp,
    /// original value = value_scale · value + value_offset
    pub value_scale: f64,
    pub value_offset: f64,
    pub recovery: Recovery,
}

impl NormalizedProblem {
    pub fn original_value(&self, v: f64) -> f64 {
        self.value_scale * v + self.value_offset
    }
}

/// Bring a problem without `Tr ρ = 1` into normalized form.
pub fn normalize_unconstrained(p: &RankSdp, strategy: &Normalization) -> Result<NormalizedProblem> {
    if p.normalized {
        return Ok(NormalizedProblem { problem: p.clone(), value_scale: 1.0, value_offset: 0.0, recovery: Recovery::Identity });
    }
    match strategy {
        Normalization::TraceBound(r) => {
            let problem = trace_bound_embed(p, *r)?;
            Ok(NormalizedProblem {
                problem,
                value_scale: 1.0,
                value_offset: 0.0,
                recovery: Recovery::Corner { dim: p.dim_n, scale: 2.0 * r },
            })
        }
        Normalization::DualWitness(weights) => {
            if weights.len() != p.constraints.len() {
                return Err(Error::Dimension(format!(
                    "{} weights for {} constraints",
                    weights.len(),
                    p.constraints.len()
                )));
            }
            let mut w = FieldMatrix::zeros(p.field, p.dim_n, p.dim_n);
            let mut target = 0.0;
            for (c, &wt) in p.constraints.iter().zip(weights) {
                if wt == 0.0 {
                    continue;
                }
                if c.relation != Relation::Eq {
                    return Err(Error::Invalid("dual witness may only weight equality constraints".into()));
                }
                w = w.try_add(&c.coeff.scale(wt))?;
                target += wt * c.target;
            }
            let (vals, vecs) = w.eigh();
            if vals.first().copied().unwrap_or(0.0) <= 1e-8 {
                return Err(Error::Invalid(format!(
                    "dual witness is not positive definite (min eigenvalue {:e})",
                    vals.first().copied().unwrap_or(0.0)
                )));
            }
            if target <= 0.0 {
                return Err(Error::Invalid(format!(
                    "witness target {target} is not positive; only ρ = 0 or nothing is feasible"
                )));
            }
            let n = p.dim_n;
            let inv_sqrt = FieldMatrix::from_fn(p.field, n, n, |i, j| {
                (0..n).map(|k| vecs.get(i, k) * (1.0 / vals[k].sqrt()) * vecs.get(j, k).conj()).sum()
            });
            let t = inv_sqrt.scale(target.sqrt());
            let conj = |m: &FieldMatrix| -> Result<FieldMatrix> { Ok(t.matmul(m)?.matmul(&t)?.hermitian_part()) };
            // Tr(Aρ) = Tr(T A T ρ̃), ρ̃ = T⁻¹ρT⁻¹ has unit trace
            let mut q = RankSdp::new(p.field, conj(&p.objective)?, p.sense)?.with_rank_bound(p.rank_bound)?;
            for c in &p.constraints {
                q.push(LinearFunctional { coeff: conj(&c.coeff)?, ..c.clone() })?;
            }
            for l in &p.lmi {
                let maps = l
                    .maps
                    .iter()
                    .map(|row| row.iter().map(|m| t.matmul(m).and_then(|x| x.matmul(&t))).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                q.push_lmi(LmiLeq { maps, bound: l.bound.clone() })?;
            }
            q.notes.extend(p.notes.iter().cloned());
            q.notes.push(format!("normalized by a dual witness with target {target}"));
            Ok(NormalizedProblem { problem: q, value_scale: 1.0, value_offset: 0.0, recovery: Recovery::Congruence(t) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    /// Tr(XρYρ)
    Sandwich,
    /// Tr(Xρ)·Tr(Yρ)
    ProductOfTraces,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub x: FieldMatrix,
    pub y: FieldMatrix,
    pub kind: PairKind,
    pub weight: f64,
}

/// Weighted sum of quadratic terms in ρ.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadraticObjective {
    pub terms: Vec<PairTerm>,
}

impl QuadraticObjective {
    pub fn value(&self, rho: &FieldMatrix) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let v = match t.kind {
                    PairKind::Sandwich => {
                        let xr = t.x.matmul(rho).expect("dims");
                        let yr = t.y.matmul(rho).expect("dims");
                        xr.trace_product(&yr).re
                    }
                    PairKind::ProductOfTraces => t.x.trace_product(rho).re * t.y.trace_product(rho).re,
                };
                t.weight * v
            })
            .sum()
    }
}

/// Hermitian operator on ℂⁿ⊗ℂⁿ whose expectation in ρ⊗ρ equals the
/// quadratic objective.
pub fn lift_quadratic(q: &QuadraticObjective, base: &RankSdp) -> Result<FieldMatrix> {
    let n = base.dim_n;
    let field = q.terms.iter().fold(base.field, |f, t| f.join(t.x.field()).join(t.y.field()));
    let mut out = FieldMatrix::zeros(field, n * n, n * n);
    let v = swap_operator(n).in_field(field)?;
    for t in &q.terms {
        for m in [&t.x, &t.y] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!("pair term is {}x{}, problem dimension is {n}", m.nrows(), m.ncols())));
            }
        }
        let xy = kron(&t.x.in_field(field)?, &t.y.in_field(field)?)?;
        let term = match t.kind {
            PairKind::Sandwich => v.matmul(&xy)?.try_add(&xy.matmul(&v)?)?.scale(0.5),
            PairKind::ProductOfTraces => xy,
        };
        out = out.try_add(&term.scale(t.weight))?;
    }
    out.into_hermitian()
}
