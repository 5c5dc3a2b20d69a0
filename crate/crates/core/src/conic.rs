//! Solver-ready conic programs.
//!
//! A [`ConicProgram`] is stored in standard form
//!
//! ```text
//!     minimize  c·x   subject to  A x = b,  x ∈ K,
//! ```
//!
//! with `K` a product of PSD cones (scaled lower-triangle vectorization),
//! nonnegative orthants and free variables. The relaxation that the builders
//! model is the conic dual of this form,
//!
//! ```text
//!     maximize  b·y   subject to  c − Aᵀy ∈ K*,
//! ```
//!
//! so the rows of `A` index the free parameters `y` of the relaxation, each
//! PSD block is a matrix inequality in `y`, and each free column is a linear
//! equality on `y`. For a minimization the roles of the bound and the value
//! flip, and the witness satisfies `A x = −b`.

use crate::error::{Error, Result};
use crate::matrix::Field;
use crate::problem::Sense;
use faer::linalg::solvers::ColPivQr;
use faer::Mat;
use serde::{Deserialize, Serialize};

/// One cone of the product `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cone", content = "dim", rename_all = "lowercase")]
pub enum Cone {
    Psd(usize),
    Nonneg(usize),
    Free(usize),
}

impl Cone {
    /// Number of scalar coordinates the cone occupies in `x`.
    pub fn width(&self) -> usize {
        match *self {
            Cone::Psd(d) => d * (d + 1) / 2,
            Cone::Nonneg(m) | Cone::Free(m) => m,
        }
    }
}

/// Position of entry (i, j), i ≥ j, in the scaled vectorization of a d×d
/// symmetric matrix (lower triangle, column by column).
#[inline]
pub fn svec_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * d - j * (j + 1) / 2 + i
}

/// Linear identity Σ coef·Tr(slack block) = rhs that holds on the whole
/// feasible set of the relaxation; used to bound slack traces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentity {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Bookkeeping attached to a program by its builder.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub level: String,
    pub k: f64,
    pub field: Option<Field>,
    pub ppt: bool,
    /// Upper bound on the trace of each block's slack over the feasible set
    /// (for nonnegative blocks: on the sum of its entries).
    pub trace_bounds: Vec<Option<f64>>,
    pub trace_identities: Vec<TraceIdentity>,
    pub block_labels: Vec<String>,
    /// Equality columns removed by presolve (indices into the pre-presolve
    /// free coordinates).
    pub dropped_equalities: usize,
    pub notes: Vec<String>,
}

/// Standard-form conic program; see the module documentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub blocks: Vec<Cone>,
    /// Number of rows of `A` (free parameters of the relaxation).
    pub nrows: usize,
    /// Triplets (row, column, value).
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub sense: Sense,
    /// Constant added to every reported objective value.
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub meta: ProgramMeta,
}

impl ConicProgram {
    pub fn ncols(&self) -> usize {
        self.blocks.iter().map(Cone::width).sum()
    }

    /// Starting column of every block.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.width();
        }
        off
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ncols();
        if self.c.len() != n {
            return Err(Error::Dimension(format!("c has {} entries, cones need {n}", self.c.len())));
        }
        if self.b.len() != self.nrows {
            return Err(Error::Dimension(format!("b has {} entries for {} rows", self.b.len(), self.nrows)));
        }
        for b in &self.blocks {
            if let Cone::Psd(0) = b {
                return Err(Error::Invalid("PSD block of dimension 0".into()));
            }
        }
        for &(r, col, v) in &self.a {
            if r >= self.nrows || col >= n || !v.is_finite() {
                return Err(Error::Invalid(format!("bad triplet ({r}, {col}, {v})")));
            }
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite data".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cp: ConicProgram = serde_json::from_str(s)?;
        cp.validate()?;
        Ok(cp)
    }

    /// The same program with every slack multiplied by `s > 0`: parameters
    /// and objective values scale by `s`, the feasible set is unchanged up
    /// to that scaling.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Invalid(format!("scale {s} must be positive")));
        }
        let mut out = self.clone();
        out.c.iter_mut().for_each(|v| *v *= s);
        out.offset *= s;
        out.meta.trace_bounds.iter_mut().flatten().for_each(|v| *v *= s);
        out.meta.trace_identities.iter_mut().for_each(|id| id.rhs *= s);
        Ok(out)
    }

    /// Sign that turns the program into a maximization of `sign·b·y`.
    pub(crate) fn sense_sign(&self) -> f64 {
        match self.sense {
            Sense::Max => 1.0,
            Sense::Min => -1.0,
        }
    }

    /// Total PSD/nonnegative "degree" (sum of PSD dimensions plus orthant sizes).
    pub fn cone_degree(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match *b {
                Cone::Psd(d) => d,
                Cone::Nonneg(m) => m,
                Cone::Free(_) => 0,
            })
            .sum()
    }

    /// Remove linearly dependent equality columns (free coordinates) by a
    /// column-pivoted QR with relative threshold 1e-10. Dependent columns
    /// whose right-hand side is inconsistent make the relaxation infeasible.
    pub fn presolve(&self) -> Result<PresolveOutcome> {
        self.validate()?;
        let offsets = self.block_offsets();
        let mut free_cols = Vec::new();
        for (bi, blk) in self.blocks.iter().enumerate() {
            if let Cone::Free(m) = *blk {
                free_cols.extend(offsets[bi]..offsets[bi] + m);
            }
        }
        if free_cols.is_empty() {
            return Ok(PresolveOutcome::unchanged(self));
        }
        let mut col_pos = vec![usize::MAX; self.ncols()];
        for (k, &c) in free_cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let nf = free_cols.len();
        let mut e = Mat::<f64>::zeros(self.nrows, nf);
        for &(r, c, v) in &self.a {
            if col_pos[c] != usize::MAX {
                e[(r, col_pos[c])] += v;
            }
        }
        let norms: Vec<f64> = (0..nf).map(|j| (0..self.nrows).map(|i| e[(i, j)].powi(2)).sum::<f64>().sqrt()).collect();
        let rhs: Vec<f64> = free_cols.iter().map(|&c| self.c[c]).collect();

        // zero columns: consistent only with a zero right-hand side
        let mut keep = vec![true; nf];
        for j in 0..nf {
            if norms[j] == 0.0 {
                if rhs[j].abs() > 1e-9 {
                    return Ok(PresolveOutcome::Infeasible(format!(
                        "equality {j} reads 0 = {}",
                        rhs[j]
                    )));
                }
                keep[j] = false;
            }
        }
        let live: Vec<usize> = (0..nf).filter(|&j| keep[j]).collect();
        let mut dropped = nf - live.len();
        if !live.is_empty() {
            let sub = Mat::<f64>::from_fn(self.nrows, live.len(), |i, j| e[(i, live[j])] / norms[live[j]]);
            let qr: ColPivQr<f64> = sub.col_piv_qr();
            let r = qr.R();
            let perm = qr.P();
            let fwd = perm.arrays().0;
            let rank_cap = self.nrows.min(live.len());
            let mut rank = 0;
            for kk in 0..rank_cap {
                if r[(kk, kk)].abs() > 1e-10 {
                    rank += 1;
                } else {
                    break;
                }
            }
            let independent: Vec<usize> = fwd[..rank].iter().map(|&p| live[p]).collect();
            let dependent: Vec<usize> = fwd[rank..].iter().map(|&p| live[p]).collect();
            if !dependent.is_empty() {
                // consistency: each dependent column is a combination of the
                // independent ones, and its right-hand side must follow suit
                let basis = Mat::<f64>::from_fn(self.nrows, independent.len(), |i, j| e[(i, independent[j])]);
                let gram = basis.transpose() * &basis;
                let llt = gram
                    .llt(faer::Side::Lower)
                    .map_err(|_| Error::Numerical("presolve basis is singular".into()))?;
                let rhs_ind: Vec<f64> = independent.iter().map(|&j| rhs[j]).collect();
                for &j in &dependent {
                    let col = Mat::<f64>::from_fn(self.nrows, 1, |i, _| e[(i, j)]);
                    let proj = basis.transpose() * &col;
                    let coef = faer::linalg::solvers::Solve::solve(&llt, &proj);
                    let predicted: f64 = (0..independent.len()).map(|t| coef[(t, 0)] * rhs_ind[t]).sum();
                    let scale = 1.0 + rhs[j].abs() + predicted.abs();
                    if (predicted - rhs[j]).abs() > 1e-8 * scale {
                        return Ok(PresolveOutcome::Infeasible(format!(
                            "equality {j} is dependent but its target {} differs from the implied {}",
                            rhs[j], predicted
                        )));
                    }
                    keep[j] = false;
                    dropped += 1;
                }
            }
        }
        if dropped == 0 {
            return Ok(PresolveOutcome::unchanged(self));
        }
        Ok(self.without_free_columns(&free_cols, &keep, dropped))
    }

    fn without_free_columns(&self, free_cols: &[usize], keep: &[bool], dropped: usize) -> PresolveOutcome {
        let n = self.ncols();
        let mut remove = vec![false; n];
        for (k, &c) in free_cols.iter().enumerate() {
            if !keep[k] {
                remove[c] = true;
            }
        }
        let mut new_index = vec![usize::MAX; n];
        let mut next = 0;
        for c in 0..n {
            if !remove[c] {
                new_index[c] = next;
                next += 1;
            }
        }
        let offsets = self.block_offsets();
        let mut blocks = Vec::new();
        for (bi, blk) in self.blocks.iter().enumerate() {
            match *blk {
                Cone::Free(m) => {
                    let kept = (offsets[bi]..offsets[bi] + m).filter(|&c| !remove[c]).count();
                    if kept > 0 {
                        blocks.push(Cone::Free(kept));
                    }
                }
                other => blocks.push(other),
            }
        }
        // free blocks that vanish shift block indices; keep metadata aligned
        let mut meta = self.meta.clone();
        let mut map = Vec::new();
        let mut nb = 0;
        for (bi, blk) in self.blocks.iter().enumerate() {
            let survives = match *blk {
                Cone::Free(m) => (offsets[bi]..offsets[bi] + m).any(|c| !remove[c]),
                _ => true,
            };
            map.push(survives.then_some(nb));
            if survives {
                nb += 1;
            }
        }
        if meta.trace_bounds.len() == self.blocks.len() {
            meta.trace_bounds = (0..self.blocks.len()).filter(|&i| map[i].is_some()).map(|i| meta.trace_bounds[i]).collect();
        }
        if meta.block_labels.len() == self.blocks.len() {
            meta.block_labels = (0..self.blocks.len())
                .filter(|&i| map[i].is_some())
                .map(|i| meta.block_labels[i].clone())
                .collect();
        }
        for id in &mut meta.trace_identities {
            id.terms = id.terms.iter().filter_map(|&(b, c)| map.get(b).copied().flatten().map(|nb| (nb, c))).collect();
        }
        meta.dropped_equalities += dropped;
        let program = ConicProgram {
            blocks,
            nrows: self.nrows,
            a: self
                .a
                .iter()
                .filter(|t| !remove[t.1])
                .map(|&(r, c, v)| (r, new_index[c], v))
                .collect(),
            b: self.b.clone(),
            c: (0..n).filter(|&c| !remove[c]).map(|c| self.c[c]).collect(),
            sense: self.sense,
            offset: self.offset,
            meta,
        };
        PresolveOutcome::Reduced { program, columns: (0..n).filter(|&c| !remove[c]).collect() }
    }
}

/// Result of [`ConicProgram::presolve`].
#[derive(Clone, Debug)]
pub enum PresolveOutcome {
    /// Reduced program; `columns[k]` is the original index of column `k`.
    Reduced { program: ConicProgram, columns: Vec<usize> },
    Infeasible(String),
}

impl PresolveOutcome {
    fn unchanged(cp: &ConicProgram) -> PresolveOutcome {
        PresolveOutcome::Reduced { program: cp.clone(), columns: (0..cp.ncols()).collect() }
    }
}
