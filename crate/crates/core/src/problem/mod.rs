//! Rank-constrained semidefinite problems
//!
//! ```text
//!     max/min  Tr(Xρ)   s.t.  Tr(C_i ρ) = t_i  (or ≤ t_i),  Λ_j(ρ) ⪯ Y_j,
//!              Tr ρ = 1,  ρ ⪰ 0,  rank ρ ≤ k,
//! ```
//!
//! and the transformations that bring more general problems into this form.

mod transform;

pub use transform::{
    lift_quadratic, normalize_unconstrained, psd_embed, trace_bound_embed, CornerFunctional, Normalization,
    NormalizedProblem, PairKind, PairTerm, QuadraticObjective, Recovery,
};

use crate::error::{Error, Result};
use crate::matrix::{Field, FieldMatrix, C64};
use serde::{Deserialize, Serialize};

/// Optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    /// +1 for maximization, −1 for minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Max => 1.0,
            Sense::Min => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Leq,
}

/// Scalar constraint `Tr(coeff·ρ) = target` or `≤ target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub coeff: FieldMatrix,
    pub target: f64,
    pub relation: Relation,
}

impl LinearFunctional {
    pub fn eq(coeff: FieldMatrix, target: f64) -> Self {
        LinearFunctional { coeff, target, relation: Relation::Eq }
    }

    pub fn leq(coeff: FieldMatrix, target: f64) -> Self {
        LinearFunctional { coeff, target, relation: Relation::Leq }
    }

    pub fn value(&self, rho: &FieldMatrix) -> f64 {
        self.coeff.trace_product(rho).re
    }

    /// Signed violation: |value − target| for equalities, max(0, value − target)
    /// for inequalities.
    pub fn violation(&self, rho: &FieldMatrix) -> f64 {
        let v = self.value(rho) - self.target;
        match self.relation {
            Relation::Eq => v.abs(),
            Relation::Leq => v.max(0.0),
        }
    }
}

/// Matrix inequality `Λ(ρ) ⪯ Y` with `Λ(ρ)_pq = Tr(maps[p][q]·ρ)`.
///
/// `maps[q][p]` must equal `maps[p][q]†` so that `Λ(ρ)` is Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmiLeq {
    pub maps: Vec<Vec<FieldMatrix>>,
    pub bound: FieldMatrix,
}

impl LmiLeq {
    pub fn out_dim(&self) -> usize {
        self.maps.len()
    }

    /// Λ(ρ) as a matrix.
    pub fn apply(&self, rho: &FieldMatrix) -> FieldMatrix {
        let m = self.out_dim();
        let field = self.bound.field().join(rho.field());
        FieldMatrix::from_fn(field, m, m, |p, q| self.maps[p][q].trace_product(rho))
    }

    /// Most negative eigenvalue of `Y − Λ(ρ)`, clipped at zero.
    pub fn violation(&self, rho: &FieldMatrix) -> f64 {
        let slack = self.bound.try_sub(&self.apply(rho)).expect("shapes agree");
        (-slack.min_eigenvalue()).max(0.0)
    }
}

/// Full description of a rank-constrained problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankSdp {
    pub field: Field,
    pub dim_n: usize,
    pub objective: FieldMatrix,
    #[serde(default)]
    pub constraints: Vec<LinearFunctional>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lmi: Vec<LmiLeq>,
    pub normalized: bool,
    pub rank_bound: f64,
    pub sense: Sense,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Kind of problem reported by [`RankSdp::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    Dimension,
    Field,
    Symmetry,
    Duplicate,
    Contradiction,
    RankBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl RankSdp {
    /// Normalized problem with rank bound 1 and no constraints.
    pub fn new(field: Field, objective: FieldMatrix, sense: Sense) -> Result<Self> {
        if !objective.is_square() {
            return Err(Error::Dimension("objective must be square".into()));
        }
        let objective = objective.in_field(field)?.into_hermitian()?;
        Ok(RankSdp {
            field,
            dim_n: objective.nrows(),
            objective,
            constraints: Vec::new(),
            lmi: Vec::new(),
            normalized: true,
            rank_bound: 1.0,
            sense,
            notes: Vec::new(),
        })
    }

    /// Set the rank bound. Values above `dim_n` are clamped with a note.
    pub fn with_rank_bound(mut self, k: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::Invalid(format!("rank bound must be a finite real ≥ 1, got {k}")));
        }
        if k > self.dim_n as f64 {
            self.notes.push(format!("rank bound {k} clamped to dimension {}", self.dim_n));
            self.rank_bound = self.dim_n as f64;
        } else {
            self.rank_bound = k;
        }
        Ok(self)
    }

    pub fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn push(&mut self, f: LinearFunctional) -> Result<()> {
        self.check_operand(&f.coeff)?;
        let coeff = f.coeff.in_field(self.field)?.into_hermitian()?;
        self.constraints.push(LinearFunctional { coeff, ..f });
        Ok(())
    }

    pub fn with_constraint(mut self, f: LinearFunctional) -> Result<Self> {
        self.push(f)?;
        Ok(self)
    }

    pub fn push_lmi(&mut self, l: LmiLeq) -> Result<()> {
        let m = l.out_dim();
        if l.maps.iter().any(|row| row.len() != m) || l.bound.nrows() != m || !l.bound.is_square() {
            return Err(Error::Dimension("LMI maps and bound disagree in size".into()));
        }
        for row in &l.maps {
            for mm in row {
                self.check_operand(mm)?;
            }
        }
        for p in 0..m {
            for q in 0..m {
                if l.maps[p][q].distance(&l.maps[q][p].adjoint()) > 1e-12 * (1.0 + l.maps[p][q].max_abs()) {
                    return Err(Error::Invalid(format!("LMI map ({p},{q}) is not the adjoint of ({q},{p})")));
                }
            }
        }
        let bound = l.bound.clone().into_hermitian()?;
        self.lmi.push(LmiLeq { maps: l.maps, bound });
        Ok(())
    }

    /// Expand `Λ(ρ) = Y` with `Λ(ρ)_pq = Tr(maps[p][q]·ρ)` into scalar
    /// equalities: real parts of the upper triangle and, over ℂ, imaginary
    /// parts of the strict upper triangle.
    pub fn push_matrix_equality(&mut self, maps: &[Vec<FieldMatrix>], y: &FieldMatrix) -> Result<()> {
        let m = maps.len();
        if maps.iter().any(|r| r.len() != m) || y.nrows() != m || y.ncols() != m {
            return Err(Error::Dimension("matrix equality maps and target disagree in size".into()));
        }
        for p in 0..m {
            for q in p..m {
                let mpq = maps[p][q].promote(Field::Complex)?;
                let re_part = mpq.try_add(&mpq.adjoint())?.scale(0.5);
                self.push(LinearFunctional::eq(re_part, y.get(p, q).re))?;
                if q > p && self.field == Field::Complex {
                    let im_part = mpq.try_sub(&mpq.adjoint())?.scale_complex(C64::new(0.0, -0.5));
                    self.push(LinearFunctional::eq(im_part, y.get(p, q).im))?;
                }
            }
        }
        Ok(())
    }

    fn check_operand(&self, m: &FieldMatrix) -> Result<()> {
        if m.nrows() != self.dim_n || m.ncols() != self.dim_n {
            return Err(Error::Dimension(format!(
                "operand is {}x{}, problem dimension is {}",
                m.nrows(),
                m.ncols(),
                self.dim_n
            )));
        }
        m.in_field(self.field).map(|_| ())
    }

    /// Integer rank bound, if the bound is integral.
    pub fn integer_rank(&self) -> Option<usize> {
        let k = self.rank_bound.round();
        ((self.rank_bound - k).abs() < 1e-12).then_some(k as usize)
    }

    pub fn objective_value(&self, rho: &FieldMatrix) -> f64 {
        self.objective.trace_product(rho).re
    }

    /// Largest constraint violation of a candidate point (trace and PSD
    /// conditions included).
    pub fn max_violation(&self, rho: &FieldMatrix) -> f64 {
        let mut worst = 0.0f64;
        if self.normalized {
            worst = worst.max((rho.trace().re - 1.0).abs());
        }
        worst = worst.max((-rho.min_eigenvalue()).max(0.0));
        for f in &self.constraints {
            worst = worst.max(f.violation(rho));
        }
        for l in &self.lmi {
            worst = worst.max(l.violation(rho));
        }
        worst
    }

    /// Structural diagnostics; never fails.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |kind, message: String| out.push(Diagnostic { kind, message });
        let n = self.dim_n;
        let check = |name: &str, m: &FieldMatrix, push: &mut dyn FnMut(DiagnosticKind, String)| {
            if m.nrows() != n || m.ncols() != n {
                push(DiagnosticKind::Dimension, format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols()));
                return;
            }
            if !m.is_hermitian() {
                push(DiagnosticKind::Symmetry, format!("{name} is not Hermitian (defect {:e})", m.hermitian_defect()));
            }
            if self.field == Field::Real && m.field() == Field::Complex && m.to_real(1e-12).is_err() {
                push(DiagnosticKind::Field, format!("{name} has imaginary entries in a real problem"));
            }
        };
        check("objective", &self.objective, &mut push);
        for (i, f) in self.constraints.iter().enumerate() {
            check(&format!("constraint {i}"), &f.coeff, &mut push);
        }
        for (i, l) in self.lmi.iter().enumerate() {
            for row in &l.maps {
                for m in row {
                    check(&format!("LMI {i} map"), m, &mut push);
                }
            }
        }
        if !(self.rank_bound >= 1.0) || self.rank_bound > n as f64 {
            push(DiagnosticKind::RankBound, format!("rank bound {} outside [1, {n}]", self.rank_bound));
        }
        for i in 0..self.constraints.len() {
            for j in i + 1..self.constraints.len() {
                let (a, b) = (&self.constraints[i], &self.constraints[j]);
                if a.coeff.nrows() != b.coeff.nrows() || a.coeff.ncols() != b.coeff.ncols() {
                    continue;
                }
                let scale = 1.0 + a.coeff.max_abs();
                if a.coeff.distance(&b.coeff) > 1e-12 * scale {
                    continue;
                }
                let gap = (a.target - b.target).abs();
                match (a.relation, b.relation) {
                    (Relation::Eq, Relation::Eq) if gap > 1e-9 => push(
                        DiagnosticKind::Contradiction,
                        format!("constraints {i} and {j} share a coefficient but targets {} and {}", a.target, b.target),
                    ),
                    _ => push(DiagnosticKind::Duplicate, format!("constraints {i} and {j} share a coefficient")),
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse a problem file; operands are checked and symmetrized.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RankSdp = serde_json::from_str(s)?;
        let mut p = RankSdp::new(raw.field, raw.objective, raw.sense)?;
        if p.dim_n != raw.dim_n {
            return Err(Error::Dimension(format!("objective is {}x{}, dim_n is {}", p.dim_n, p.dim_n, raw.dim_n)));
        }
        p.normalized = raw.normalized;
        p = p.with_rank_bound(raw.rank_bound)?;
        for f in raw.constraints {
            p.push(f)?;
        }
        for l in raw.lmi {
            p.push_lmi(l)?;
        }
        p.notes.extend(raw.notes);
        Ok(p)
    }
}

/// Maps `M_pq` with `Tr(M_pq ρ) = (Tr_{traced} ρ)_pq` for a bipartite space
/// `dims[0] ⊗ dims[1]`; `traced` is 0 or 1.
pub fn partial_trace_maps(dims: [usize; 2], traced: usize, field: Field) -> Vec<Vec<FieldMatrix>> {
    let [d0, d1] = dims;
    let kept = if traced == 0 { d1 } else { d0 };
    let other = if traced == 0 { d0 } else { d1 };
    let idx = |t: usize, k: usize| if traced == 0 { t * d1 + k } else { k * d1 + t };
    (0..kept)
        .map(|p| {
            (0..kept)
                .map(|q| {
                    let mut m = FieldMatrix::zeros(field, d0 * d1, d0 * d1);
                    for t in 0..other {
                        // Tr(|b⟩⟨a| ρ) = ρ_ab
                        m.set(idx(t, q), idx(t, p), C64::new(1.0, 0.0));
                    }
                    m
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{partial_trace, TensorLayout};

    fn sz() -> FieldMatrix {
        FieldMatrix::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn rank_bound_is_clamped_with_note() {
        let p = RankSdp::new(Field::Real, sz(), Sense::Max).unwrap().with_rank_bound(5.0).unwrap();
        assert_eq!(p.rank_bound, 2.0);
        assert_eq!(p.notes.len(), 1);
        assert!(RankSdp::new(Field::Real, sz(), Sense::Max).unwrap().with_rank_bound(0.5).is_err());
    }

    #[test]
    fn well_formed_problem_has_no_diagnostics() {
        let p = RankSdp::new(Field::Real, sz(), Sense::Max)
            .unwrap()
            .with_constraint(LinearFunctional::eq(FieldMatrix::diag_real(&[1.0, 0.0]), 0.5))
            .unwrap();
        assert!(p.validate().is_empty());
    }

    #[test]
    fn dimension_and_contradiction_are_flagged() {
        let mut p = RankSdp::new(Field::Real, sz(), Sense::Max).unwrap();
        assert!(p.push(LinearFunctional::eq(FieldMatrix::identity(Field::Real, 3), 1.0)).is_err());
        p.constraints.push(LinearFunctional::eq(FieldMatrix::identity(Field::Real, 3), 1.0));
        let d = p.validate();
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::Dimension));

        let e = FieldMatrix::diag_real(&[1.0, 0.0]);
        let mut q = RankSdp::new(Field::Real, sz(), Sense::Max).unwrap();
        q.push(LinearFunctional::eq(e.clone(), 1.0)).unwrap();
        q.push(LinearFunctional::eq(e, 2.0)).unwrap();
        assert!(q.validate().iter().any(|d| d.kind == DiagnosticKind::Contradiction));
    }

    #[test]
    fn json_round_trip_matches_documented_shape() {
        let p = RankSdp::new(Field::Complex, sz(), Sense::Min)
            .unwrap()
            .with_constraint(LinearFunctional::leq(FieldMatrix::identity(Field::Real, 2), 1.0))
            .unwrap();
        let s = p.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for key in ["field", "dim_n", "objective", "constraints", "normalized", "rank_bound", "sense"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["constraints"][0]["relation"], "leq");
        assert_eq!(v["sense"], "min");
        let back = RankSdp::from_json(&s).unwrap();
        assert_eq!(back.dim_n, 2);
        assert_eq!(back.constraints.len(), 1);
    }

    #[test]
    fn partial_trace_maps_reproduce_partial_trace() {
        let rho = FieldMatrix::from_fn(Field::Complex, 6, 6, |i, j| C64::new((i * 7 + j) as f64, (i as f64) - (j as f64)));
        let layout = TensorLayout::new(vec![2, 3]).unwrap();
        for traced in 0..2 {
            let keep = [1 - traced];
            let pt = partial_trace(&rho, &layout, &keep).unwrap();
            let maps = partial_trace_maps([2, 3], traced, Field::Complex);
            for p in 0..maps.len() {
                for q in 0..maps.len() {
                    let v = maps[p][q].trace_product(&rho);
                    assert!((v - pt.get(p, q)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matrix_equality_expands_real_and_imaginary_parts() {
        let mut p = RankSdp::new(Field::Complex, FieldMatrix::identity(Field::Complex, 4), Sense::Max).unwrap();
        let maps = partial_trace_maps([2, 2], 0, Field::Complex);
        let y = FieldMatrix::identity(Field::Complex, 2).scale(0.5);
        p.push_matrix_equality(&maps, &y).unwrap();
        assert_eq!(p.constraints.len(), 4);
        let rho = FieldMatrix::identity(Field::Complex, 4).scale(0.25);
        assert!(p.max_violation(&rho) < 1e-12);
    }
}
