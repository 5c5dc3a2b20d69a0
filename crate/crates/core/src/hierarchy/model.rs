//! Relaxations as linear matrix inequalities in real parameters, and their
//! lowering to [`ConicProgram`] standard form.

use super::linmat::{LinMat, RealAffine, DROP};
use crate::conic::{svec_index, Cone, ConicProgram, ProgramMeta, TraceIdentity};
use crate::problem::Sense;
use std::f64::consts::SQRT_2;

pub(crate) struct Block {
    pub label: String,
    pub mat: LinMat,
    pub trace_bound: Option<f64>,
}

/// `opt objective(y)` subject to every block being positive semidefinite
/// and every equality vanishing.
pub(crate) struct Model {
    pub nparams: usize,
    pub blocks: Vec<Block>,
    pub equalities: Vec<RealAffine>,
    pub objective: RealAffine,
    pub sense: Sense,
    /// `Σ coef·Tr(block) = rhs` over model blocks.
    pub identities: Vec<(Vec<(usize, f64)>, f64)>,
    pub meta: ProgramMeta,
}

impl Model {
    pub fn new(sense: Sense, meta: ProgramMeta) -> Self {
        Model {
            nparams: 0,
            blocks: Vec::new(),
            equalities: Vec::new(),
            objective: RealAffine::default(),
            sense,
            identities: Vec::new(),
            meta,
        }
    }

    pub fn block(&mut self, label: impl Into<String>, mat: LinMat, trace_bound: Option<f64>) -> usize {
        self.blocks.push(Block { label: label.into(), mat, trace_bound });
        self.blocks.len() - 1
    }

    /// Adds `a = 0`; identically vanishing rows are skipped.
    pub fn equal_zero(&mut self, a: RealAffine) {
        if a.terms.is_empty() && a.c.abs() <= 1e-12 {
            return;
        }
        self.equalities.push(a);
    }

    pub fn lower(&self) -> ConicProgram {
        let mut blocks = Vec::new();
        let mut a = Vec::new();
        let mut c = Vec::new();
        let mut bounds = Vec::new();
        let mut labels = Vec::new();
        // lowered pieces of each model block with their trace factor
        let mut pieces: Vec<Vec<(usize, f64)>> = Vec::new();

        for blk in &self.blocks {
            let mut mine = Vec::new();
            let complex = blk.mat.has_imaginary();
            let comps = components(&blk.mat);
            let mut diag = Vec::new();
            let many = comps.len() > 1;
            for (ci, idx) in comps.iter().enumerate() {
                if idx.len() == 1 {
                    diag.push(idx[0]);
                    continue;
                }
                let sub = blk.mat.sub(idx);
                let s = idx.len();
                let d = if complex { 2 * s } else { s };
                let off = c.len();
                c.resize(off + d * (d + 1) / 2, 0.0);
                for j in 0..d {
                    for i in j..d {
                        let entry = embedded_entry(&sub, s, complex, i, j);
                        let f = if i == j { 1.0 } else { SQRT_2 };
                        let col = off + svec_index(d, i, j);
                        c[col] = f * entry.c;
                        a.extend(entry.terms.iter().map(|&(p, v)| (p, col, -f * v)));
                    }
                }
                mine.push((blocks.len(), if complex { 0.5 } else { 1.0 }));
                blocks.push(Cone::Psd(d));
                bounds.push(blk.trace_bound.map(|t| if complex { 2.0 * t } else { t }));
                labels.push(if many { format!("{} [{ci}]", blk.label) } else { blk.label.clone() });
            }
            if !diag.is_empty() {
                let off = c.len();
                for (w, &i) in diag.iter().enumerate() {
                    let entry = blk.mat.at(i, i).re();
                    c.push(entry.c);
                    a.extend(entry.terms.iter().map(|&(p, v)| (p, off + w, -v)));
                }
                mine.push((blocks.len(), 1.0));
                blocks.push(Cone::Nonneg(diag.len()));
                bounds.push(blk.trace_bound);
                labels.push(if many { format!("{} [diagonal]", blk.label) } else { blk.label.clone() });
            }
            pieces.push(mine);
        }

        if !self.equalities.is_empty() {
            let off = c.len();
            for (w, eq) in self.equalities.iter().enumerate() {
                c.push(-eq.c);
                a.extend(eq.terms.iter().map(|&(p, v)| (p, off + w, v)));
            }
            blocks.push(Cone::Free(self.equalities.len()));
            bounds.push(None);
            labels.push("equalities".into());
        }

        let mut b = vec![0.0; self.nparams];
        for &(p, v) in &self.objective.terms {
            b[p] += v;
        }
        let identities = self
            .identities
            .iter()
            .map(|(terms, rhs)| TraceIdentity {
                terms: terms.iter().flat_map(|&(mb, coef)| pieces[mb].iter().map(move |&(lb, f)| (lb, coef * f))).collect(),
                rhs: *rhs,
            })
            .collect();
        let mut meta = self.meta.clone();
        meta.trace_bounds = bounds;
        meta.trace_identities = identities;
        meta.block_labels = labels;
        ConicProgram { blocks, nrows: self.nparams, a, b, c, sense: self.sense, offset: self.objective.c, meta }
    }
}

/// Entry `(i, j)` of `[[Re M, −Im M], [Im M, Re M]]`, or of `Re M` when the
/// block is real.
fn embedded_entry(m: &LinMat, s: usize, complex: bool, i: usize, j: usize) -> RealAffine {
    if !complex {
        return m.at(i, j).re();
    }
    let (bi, ri) = (i / s, i % s);
    let (bj, rj) = (j / s, j % s);
    let e = m.at(ri, rj);
    match (bi, bj) {
        (0, 0) | (1, 1) => e.re(),
        (1, 0) => e.im(),
        _ => {
            let mut v = e.im();
            v.c = -v.c;
            v.terms.iter_mut().for_each(|t| t.1 = -t.1);
            v
        }
    }
}

/// Connected components of the sparsity pattern, each sorted.
fn components(m: &LinMat) -> Vec<Vec<usize>> {
    let n = m.dim;
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            let e = m.at(i, j);
            if !e.terms.is_empty() || e.c.norm() > DROP {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::super::linmat::{hermitian, variable, Affine};
    use super::*;
    use crate::matrix::{Field, C64};
    use crate::solver::{solve_bundled, SolverConfig, Status};

    #[test]
    fn complex_density_matrix_maximizes_top_eigenvalue() {
        // max Re Tr(Xρ) for X = [[0, −i], [i, 0]] over 2×2 density matrices
        let mut m = Model::new(Sense::Max, ProgramMeta::default());
        let rho = variable(2, Field::Complex, &[&hermitian], &|_, _| false, &mut m.nparams);
        let x = crate::matrix::FieldMatrix::from_complex(
            2,
            2,
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        m.objective = rho.pair(&x).re();
        m.equal_zero(rho.trace().re().shifted(-1.0));
        let b = m.block("rho", rho, Some(1.0));
        m.identities.push((vec![(b, 1.0)], 1.0));
        let cp = m.lower();
        assert_eq!(cp.blocks[0], Cone::Psd(4));
        let sol = solve_bundled(&cp, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_value - 1.0).abs() < 1e-7);
        let cert = sol.certified_bound.unwrap();
        assert!(cert >= 1.0 - 1e-9 && cert < 1.0 + 1e-6);
    }

    #[test]
    fn block_diagonal_pattern_splits() {
        let mut m = Model::new(Sense::Max, ProgramMeta::default());
        let v = variable(3, Field::Real, &[&hermitian], &|i, j| (i == 2) != (j == 2), &mut m.nparams);
        m.objective = Affine::param(0, C64::new(1.0, 0.0)).re();
        m.block("v", v, None);
        let cp = m.lower();
        assert_eq!(cp.blocks, vec![Cone::Psd(2), Cone::Nonneg(1)]);
    }
}
