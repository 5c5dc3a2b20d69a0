//! Relaxation hierarchy: lowers a [`RankSdp`] into conic programs whose
//! optima bound the rank-constrained optimum.
//!
//! * level 1 drops the rank constraint;
//! * the reduced level 2 works with the symmetry-reduced blocks of a
//!   two-copy extension and accepts a continuous rank parameter;
//! * level N uses an N-party symmetric extension on the symmetric subspace,
//!   optionally with partial-transpose constraints.
//!
//! Every builder returns a [`Relaxation`]: the program plus the information
//! needed to map solver parameters back to matrices.

mod level1;
mod level_n;
mod linmat;
mod model;
mod reduced;
mod sweep;
mod symmetry;

pub use sweep::{rank_parameter_sweep, ReducedPoint, SweepPoint, MONOTONE_TOL};
pub use symmetry::PhaseSymmetry;

use crate::conic::{ConicProgram, ProgramMeta};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_basis_sparse, Field, FieldMatrix, C64};
use crate::problem::{RankSdp, Relation};
use crate::solver::{self, Solution, SolverConfig};
use linmat::{Acc, LinMat};
use model::Model;
use serde::{Deserialize, Serialize};

/// Hierarchy level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2Reduced,
    LN(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level: Level,
    /// Add partial-transpose constraints (complex relaxations; real ones
    /// carry transpose invariance by construction).
    pub ppt: bool,
    /// Field of the relaxation variables; defaults to the problem's field.
    pub field: Option<Field>,
}

impl LevelSpec {
    pub fn level1() -> Self {
        LevelSpec { level: Level::L1, ppt: false, field: None }
    }

    pub fn reduced() -> Self {
        LevelSpec { level: Level::L2Reduced, ppt: true, field: None }
    }

    pub fn level_n(n: usize) -> Self {
        LevelSpec { level: Level::LN(n), ppt: true, field: None }
    }

    pub fn with_ppt(mut self, ppt: bool) -> Self {
        self.ppt = ppt;
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = Some(field);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.level {
            Level::LN(n) if n < 2 => Err(Error::Invalid(format!("level {n} needs N ≥ 2"))),
            _ => Ok(()),
        }
    }

    /// `1`, `2` (reduced), or `N` for the unreduced level N ≥ 2 written as
    /// `Nx` (e.g. `2x`, `3x`); plain integers above 2 also select level N.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, unreduced) = match t.strip_suffix('x') {
            Some(rest) => (rest, true),
            None => (t, false),
        };
        let n: usize = num.parse().map_err(|_| Error::Parse(format!("bad level {s:?}")))?;
        match (n, unreduced) {
            (1, false) => Ok(Self::level1()),
            (2, false) => Ok(Self::reduced()),
            (n, _) if n >= 2 => Ok(Self::level_n(n)),
            _ => Err(Error::Parse(format!("bad level {s:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self.level {
            Level::L1 => "1".into(),
            Level::L2Reduced => "2".into(),
            Level::LN(2) => "2x".into(),
            Level::LN(n) => n.to_string(),
        }
    }
}

/// Optional inputs shared by the builders.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    /// Phase symmetry of the problem; restricts variables to
    /// charge-conserving entries. Verified before use.
    pub symmetry: Option<PhaseSymmetry>,
    /// Objective `Tr(O·Φ_AB)` on two copies instead of `Tr(Xρ)`.
    pub pair_objective: Option<FieldMatrix>,
    /// Build level-N programs on the symmetric subspace (default) or on the
    /// full tensor space.
    pub compress: bool,
    /// Require the relaxed state `ρ` itself (the mixture, not each
    /// component) to equal this matrix.
    pub fixed_marginal: Option<FieldMatrix>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { symmetry: None, pair_objective: None, compress: true, fixed_marginal: None }
    }
}

#[derive(Clone, Debug)]
enum Layout {
    Level1 { rho: LinMat },
    Reduced { k: f64, phi_i: LinMat, phi_v: LinMat, phi_phi: Option<LinMat>, rho: LinMat },
    LevelN { rho: LinMat },
}

/// A lowered relaxation.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub program: ConicProgram,
    pub field: Field,
    pub dim_n: usize,
    layout: Layout,
}

impl Relaxation {
    pub fn solve(&self, cfg: &SolverConfig) -> Result<Solution> {
        solver::solve(&self.program, cfg)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.program.nrows {
            return Err(Error::Dimension(format!("{} parameters for a program with {}", params.len(), self.program.nrows)));
        }
        Ok(())
    }

    /// The relaxed single-copy state `ρ` at the given parameters.
    pub fn marginal_state(&self, params: &[f64]) -> Result<FieldMatrix> {
        self.check_params(params)?;
        let rho = match &self.layout {
            Layout::Level1 { rho } | Layout::Reduced { rho, .. } | Layout::LevelN { rho } => rho,
        };
        Ok(rho.eval(params, self.field))
    }

    /// Blocks of a reduced level-2 point, if this is a reduced relaxation.
    pub fn reduced_point(&self, params: &[f64]) -> Result<Option<ReducedPoint>> {
        self.check_params(params)?;
        Ok(match &self.layout {
            Layout::Reduced { k, phi_i, phi_v, phi_phi, .. } => Some(ReducedPoint {
                k: *k,
                field: self.field,
                n: self.dim_n,
                phi_i: phi_i.eval(params, self.field),
                phi_v: phi_v.eval(params, self.field),
                phi_phi: phi_phi.as_ref().map(|m| m.eval(params, self.field)),
            }),
            _ => None,
        })
    }
}

/// Lowers `p` at the requested level.
pub fn build(p: &RankSdp, spec: &LevelSpec, opts: &BuildOptions) -> Result<Relaxation> {
    spec.validate()?;
    let field = spec.field.unwrap_or(p.field);
    if p.field == Field::Complex && field == Field::Real {
        return Err(Error::Field("a complex problem needs a complex relaxation".into()));
    }
    if let Some(s) = &opts.symmetry {
        s.verify(p)?;
    }
    if let Some(o) = &opts.pair_objective {
        let nn = p.dim_n * p.dim_n;
        if o.nrows() != nn || o.ncols() != nn {
            return Err(Error::Dimension(format!("pair objective must be {nn}x{nn}")));
        }
        if field == Field::Real && o.field() == Field::Complex {
            return Err(Error::Field("complex pair objective in a real relaxation".into()));
        }
    }
    if let Some(j) = &opts.fixed_marginal {
        if j.nrows() != p.dim_n || j.ncols() != p.dim_n {
            return Err(Error::Dimension(format!("fixed marginal must be {0}x{0}", p.dim_n)));
        }
    }
    match spec.level {
        Level::L1 => level1::build(p, field, opts),
        Level::L2Reduced => reduced::build(p, field, spec.ppt, opts),
        Level::LN(n) => level_n::build(p, field, n, spec.ppt, opts),
    }
}

/// Level 1: the rank constraint is dropped.
pub fn build_level1(p: &RankSdp) -> Result<ConicProgram> {
    Ok(build(p, &LevelSpec::level1(), &BuildOptions::default())?.program)
}

/// Reduced level 2 over ℂ, with partial-transpose blocks.
pub fn build_level2_reduced_complex(p: &RankSdp) -> Result<ConicProgram> {
    Ok(build(p, &LevelSpec::reduced().with_field(Field::Complex), &BuildOptions::default())?.program)
}

/// Reduced level 2 over ℝ.
pub fn build_level2_reduced_real(p: &RankSdp) -> Result<ConicProgram> {
    if p.field == Field::Complex {
        return Err(Error::Field("the real reduced relaxation needs a real problem".into()));
    }
    Ok(build(p, &LevelSpec::reduced().with_field(Field::Real), &BuildOptions::default())?.program)
}

/// Level N on the symmetric subspace.
pub fn build_level_n(p: &RankSdp, spec: &LevelSpec) -> Result<ConicProgram> {
    if !matches!(spec.level, Level::LN(_)) {
        return Err(Error::Invalid("build_level_n needs a level-N spec".into()));
    }
    Ok(build(p, spec, &BuildOptions::default())?.program)
}

fn meta(level: &str, k: f64, field: Field, ppt: bool) -> ProgramMeta {
    ProgramMeta { level: level.into(), k, field: Some(field), ppt, ..Default::default() }
}

fn require_normalized(p: &RankSdp) -> Result<()> {
    if !p.normalized {
        return Err(Error::Invalid("extension relaxations need a trace-normalized problem".into()));
    }
    Ok(())
}

/// `Σ_B ⟨G_B, L⟩ = 0` for an orthogonal Hermitian operator basis `{G_B}`.
fn scalarize(m: &mut Model, l: &LinMat, field: Field) {
    let mut acc = Acc::default();
    for g in hermitian_basis_sparse(l.dim, field) {
        for (i, j, v) in g {
            acc.add(l.at(j, i), v);
        }
        m.equal_zero(acc.take().re());
    }
}

/// `ρ = J` entrywise, when requested.
fn fix_marginal(m: &mut Model, rho: &LinMat, opts: &BuildOptions, field: Field) {
    if let Some(j) = &opts.fixed_marginal {
        let mut acc = Acc::default();
        let diff = LinMat::from_fn(rho.dim, |a, b| {
            acc.add(rho.at(a, b), C64::new(1.0, 0.0));
            acc.add_const(-j.get(a, b));
            acc.take()
        });
        scalarize(m, &diff, field);
    }
}

/// Constraints and objective of an extension relaxation, written through
/// `side(O) = Tr_A[(O ⊗ 𝟙)Φ]` restricted to the remaining parties.
fn extension_constraints(m: &mut Model, p: &RankSdp, field: Field, side: &dyn Fn(&FieldMatrix) -> LinMat) -> Result<()> {
    let n = p.dim_n;
    let id = FieldMatrix::identity(Field::Complex, n);
    for (i, c) in p.constraints.iter().enumerate() {
        let shifted = c.coeff.to_complex().try_sub(&id.scale(c.target))?;
        let l = side(&shifted);
        match c.relation {
            Relation::Eq => scalarize(m, &l, field),
            Relation::Leq => {
                let bound = c.target.abs() + c.coeff.operator_norm();
                m.block(format!("inequality {i}"), l.scaled(-1.0), Some(bound));
            }
        }
    }
    if !p.lmi.is_empty() {
        let t = side(&id);
        let r = t.dim;
        for (li, l) in p.lmi.iter().enumerate() {
            let md = l.out_dim();
            let parts: Vec<Vec<LinMat>> = l.maps.iter().map(|row| row.iter().map(side).collect()).collect();
            let mut acc = Acc::default();
            let blk = LinMat::from_fn(md * r, |i, j| {
                let (a, b) = (i / r, i % r);
                let (a2, b2) = (j / r, j % r);
                acc.add(t.at(b, b2), l.bound.get(a, a2));
                acc.add(parts[a][a2].at(b, b2), C64::new(-1.0, 0.0));
                acc.take()
            });
            let bound: f64 = (0..md).map(|a| l.bound.get(a, a).re.abs() + l.maps[a][a].operator_norm()).sum();
            m.block(format!("matrix inequality {li}"), blk, Some(bound));
        }
    }
    m.objective = side(&p.objective.to_complex()).trace().re();
    Ok(())
}
