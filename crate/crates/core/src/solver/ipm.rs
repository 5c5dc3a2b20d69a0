//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling
//! and Mehrotra predictor–corrector steps.
//!
//! Internally the relaxation is written as
//!
//! ```text
//!     minimize  cᵀu   s.t.  G u + s = h,  E u = e,  s ∈ C,
//! ```
//!
//! whose parameters `u` are the rows of the conic program. The dual
//! multipliers `z` (cone part) and `w` (equality part) form the witness `x`.

use super::{SolverConfig, Status};
use crate::conic::{svec_index, Cone, ConicProgram};
use faer::linalg::solvers::{Llt, Solve};
use faer::{Mat, Side};
use std::collections::BTreeMap;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Sparse symmetric matrix stored as lower-triangle entries (r ≥ c) with
/// matrix values.
type SymEntries = Vec<(usize, usize, f64)>;

pub(crate) struct PsdData {
    pub d: usize,
    pub h: Mat<f64>,
    pub params: Vec<usize>,
    pub mats: Vec<SymEntries>,
}

/// Where each block of the conic program lives internally.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Slot {
    Psd(usize),
    Lp(usize),
    Eq(usize),
}

pub(crate) struct Data {
    pub m: usize,
    pub psd: Vec<PsdData>,
    pub lp_h: Vec<f64>,
    pub lp_cols: Vec<Vec<(usize, f64)>>,
    pub e_mat: Mat<f64>,
    pub e_rhs: Vec<f64>,
    pub c: Vec<f64>,
    pub slots: Vec<Slot>,
}

fn svec_table(d: usize) -> Vec<(usize, usize)> {
    let mut t = vec![(0, 0); d * (d + 1) / 2];
    for j in 0..d {
        for i in j..d {
            t[svec_index(d, i, j)] = (i, j);
        }
    }
    t
}

impl Data {
    pub fn from_program(cp: &ConicProgram) -> Data {
        let m = cp.nrows;
        let offsets = cp.block_offsets();
        // column → (slot, local coordinate)
        let mut col_kind: Vec<(usize, usize)> = vec![(0, 0); cp.ncols()];
        let mut slots = Vec::new();
        let (mut npsd, mut nlp, mut neq) = (0, 0, 0);
        let mut tables = Vec::new();
        for (bi, blk) in cp.blocks.iter().enumerate() {
            for k in 0..blk.width() {
                col_kind[offsets[bi] + k] = (bi, k);
            }
            match *blk {
                Cone::Psd(d) => {
                    slots.push(Slot::Psd(npsd));
                    tables.push(svec_table(d));
                    npsd += 1;
                }
                Cone::Nonneg(w) => {
                    slots.push(Slot::Lp(nlp));
                    tables.push(Vec::new());
                    nlp += w;
                }
                Cone::Free(w) => {
                    slots.push(Slot::Eq(neq));
                    tables.push(Vec::new());
                    neq += w;
                }
            }
        }
        let mut psd: Vec<PsdData> = Vec::new();
        for blk in &cp.blocks {
            if let Cone::Psd(d) = *blk {
                psd.push(PsdData { d, h: Mat::zeros(d, d), params: Vec::new(), mats: Vec::new() });
            }
        }
        let mut lp_h = vec![0.0; nlp];
        let mut e_rhs = vec![0.0; neq];
        for (col, &v) in cp.c.iter().enumerate() {
            let (bi, k) = col_kind[col];
            match slots[bi] {
                Slot::Psd(p) => {
                    let (i, j) = tables[bi][k];
                    let val = if i == j { v } else { v / SQRT2 };
                    psd[p].h[(i, j)] += val;
                    if i != j {
                        psd[p].h[(j, i)] += val;
                    }
                }
                Slot::Lp(o) => lp_h[o + k] += v,
                Slot::Eq(o) => e_rhs[o + k] += v,
            }
        }
        let mut per_block: Vec<BTreeMap<usize, SymEntries>> = vec![BTreeMap::new(); psd.len()];
        let mut lp_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nlp];
        let mut e_mat = Mat::<f64>::zeros(neq, m);
        for &(row, col, v) in &cp.a {
            let (bi, k) = col_kind[col];
            match slots[bi] {
                Slot::Psd(p) => {
                    let (i, j) = tables[bi][k];
                    let val = if i == j { v } else { v / SQRT2 };
                    per_block[p].entry(row).or_default().push((i, j, val));
                }
                Slot::Lp(o) => lp_cols[o + k].push((row, v)),
                Slot::Eq(o) => e_mat[(o + k, row)] += v,
            }
        }
        for (p, map) in per_block.into_iter().enumerate() {
            for (row, entries) in map {
                psd[p].params.push(row);
                psd[p].mats.push(entries);
            }
        }
        let sign = cp.sense_sign();
        let c = cp.b.iter().map(|&b| -sign * b).collect();
        Data { m, psd, lp_h, lp_cols, e_mat, e_rhs, c, slots }
    }

    pub fn neq(&self) -> usize {
        self.e_rhs.len()
    }

    pub fn degree(&self) -> usize {
        self.psd.iter().map(|b| b.d).sum::<usize>() + self.lp_h.len()
    }

    pub fn h(&self) -> ConeVec {
        ConeVec { psd: self.psd.iter().map(|b| b.h.clone()).collect(), lp: self.lp_h.clone() }
    }

    /// G u.
    pub fn g(&self, u: &[f64]) -> ConeVec {
        let psd = self
            .psd
            .iter()
            .map(|b| {
                let mut out = Mat::<f64>::zeros(b.d, b.d);
                for (&i, ents) in b.params.iter().zip(&b.mats) {
                    let ui = u[i];
                    if ui == 0.0 {
                        continue;
                    }
                    for &(r, c, v) in ents {
                        out[(r, c)] += ui * v;
                        if r != c {
                            out[(c, r)] += ui * v;
                        }
                    }
                }
                out
            })
            .collect();
        let lp = self.lp_cols.iter().map(|col| col.iter().map(|&(i, a)| a * u[i]).sum()).collect();
        ConeVec { psd, lp }
    }

    /// Gᵀ z.
    pub fn gt(&self, z: &ConeVec) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (b, zm) in self.psd.iter().zip(&z.psd) {
            for (&i, ents) in b.params.iter().zip(&b.mats) {
                out[i] += sym_inner(ents, zm);
            }
        }
        for (col, &zl) in self.lp_cols.iter().zip(&z.lp) {
            for &(i, a) in col {
                out[i] += a * zl;
            }
        }
        out
    }

    pub fn e_mul(&self, u: &[f64]) -> Vec<f64> {
        let p = self.neq();
        (0..p).map(|f| (0..self.m).map(|i| self.e_mat[(f, i)] * u[i]).sum()).collect()
    }

    pub fn et_mul(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (f, &wf) in w.iter().enumerate() {
            if wf == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.e_mat[(f, i)] * wf;
            }
        }
        out
    }
}

/// ⟨A, Z⟩ for a sparse symmetric A.
fn sym_inner(ents: &SymEntries, z: &Mat<f64>) -> f64 {
    ents.iter().map(|&(r, c, v)| if r == c { v * z[(r, r)] } else { 2.0 * v * z[(r, c)] }).sum()
}

/// Element of the product cone: dense symmetric blocks plus an orthant part.
#[derive(Clone, Debug)]
pub(crate) struct ConeVec {
    pub psd: Vec<Mat<f64>>,
    pub lp: Vec<f64>,
}

impl ConeVec {
    fn zeros(data: &Data) -> ConeVec {
        ConeVec { psd: data.psd.iter().map(|b| Mat::zeros(b.d, b.d)).collect(), lp: vec![0.0; data.lp_h.len()] }
    }

    fn identity(data: &Data) -> ConeVec {
        ConeVec { psd: data.psd.iter().map(|b| Mat::identity(b.d, b.d)).collect(), lp: vec![1.0; data.lp_h.len()] }
    }

    pub fn dot(&self, o: &ConeVec) -> f64 {
        let mut acc: f64 = self.lp.iter().zip(&o.lp).map(|(a, b)| a * b).sum();
        for (a, b) in self.psd.iter().zip(&o.psd) {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    acc += a[(i, j)] * b[(i, j)];
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn axpy(&mut self, alpha: f64, o: &ConeVec) {
        for (a, b) in self.lp.iter_mut().zip(&o.lp) {
            *a += alpha * b;
        }
        for (a, b) in self.psd.iter_mut().zip(&o.psd) {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    a[(i, j)] += alpha * b[(i, j)];
                }
            }
        }
    }

    fn scaled(&self, alpha: f64) -> ConeVec {
        let mut out = self.clone();
        for a in &mut out.lp {
            *a *= alpha;
        }
        for a in &mut out.psd {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    a[(i, j)] *= alpha;
                }
            }
        }
        out
    }

    fn sub(&self, o: &ConeVec) -> ConeVec {
        let mut out = self.clone();
        out.axpy(-1.0, o);
        out
    }

    /// Largest t with `self + t·e` on the boundary, i.e. −λ_min.
    fn neg_min_eig(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &v in &self.lp {
            worst = worst.max(-v);
        }
        for a in &self.psd {
            let ev = sym_eigenvalues(a);
            worst = worst.max(-ev[0]);
        }
        worst
    }
}

fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

fn sym_eigenvalues(a: &Mat<f64>) -> Vec<f64> {
    if a.nrows() == 1 {
        return vec![a[(0, 0)]];
    }
    let mut s = a.clone();
    symmetrize(&mut s);
    s.self_adjoint_eigenvalues(Side::Lower).unwrap_or_else(|_| vec![f64::NAN; a.nrows()])
}

/// Nesterov–Todd scaling point.
struct Scaling {
    r: Vec<Mat<f64>>,
    /// Q^T Q = (R R^T)^{-1}
    qtq: Vec<Mat<f64>>,
    rrt: Vec<Mat<f64>>,
    lam_psd: Vec<Vec<f64>>,
    w_lp: Vec<f64>,
    lam_lp: Vec<f64>,
}

impl Scaling {
    fn new(s: &ConeVec, z: &ConeVec) -> Option<Scaling> {
        let mut r = Vec::new();
        let mut qtq = Vec::new();
        let mut rrt = Vec::new();
        let mut lam_psd = Vec::new();
        for (sm, zm) in s.psd.iter().zip(&z.psd) {
            let mut ss = sm.clone();
            let mut zz = zm.clone();
            symmetrize(&mut ss);
            symmetrize(&mut zz);
            let ls = ss.llt(Side::Lower).ok()?.L().to_owned();
            let lz = zz.llt(Side::Lower).ok()?.L().to_owned();
            let prod = lz.transpose() * &ls;
            let svd = prod.svd().ok()?;
            let d = sm.nrows();
            let sv: Vec<f64> = (0..d).map(|i| svd.S()[i]).collect();
            if sv.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return None;
            }
            let v = svd.V();
            let u = svd.U();
            let rm = Mat::<f64>::from_fn(d, d, |i, j| {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += ls[(i, k)] * v[(k, j)];
                }
                acc / sv[j].sqrt()
            });
            // Q = Λ^{-1/2} Uᵀ L_zᵀ
            let ut_lzt = u.transpose() * lz.transpose();
            let qm = Mat::<f64>::from_fn(d, d, |i, j| ut_lzt[(i, j)] / sv[i].sqrt());
            let mut qq = qm.transpose() * &qm;
            symmetrize(&mut qq);
            let mut rr = &rm * rm.transpose();
            symmetrize(&mut rr);
            r.push(rm);
            qtq.push(qq);
            rrt.push(rr);
            lam_psd.push(sv);
        }
        let mut w_lp = Vec::with_capacity(s.lp.len());
        let mut lam_lp = Vec::with_capacity(s.lp.len());
        for (&sv, &zv) in s.lp.iter().zip(&z.lp) {
            if !(sv > 0.0 && zv > 0.0) {
                return None;
            }
            w_lp.push((sv / zv).sqrt());
            lam_lp.push((sv * zv).sqrt());
        }
        Some(Scaling { r, qtq, rrt, lam_psd, w_lp, lam_lp })
    }

    /// W z = Rᵀ Z R.
    fn w(&self, z: &ConeVec) -> ConeVec {
        let psd = z.psd.iter().zip(&self.r).map(|(zm, rm)| congruence_t(rm, zm)).collect();
        let lp = z.lp.iter().zip(&self.w_lp).map(|(a, w)| a * w).collect();
        ConeVec { psd, lp }
    }

    /// Wᵀ u = R U Rᵀ.
    fn wt(&self, u: &ConeVec) -> ConeVec {
        let psd = u.psd.iter().zip(&self.r).map(|(um, rm)| congruence(rm, um)).collect();
        let lp = u.lp.iter().zip(&self.w_lp).map(|(a, w)| a * w).collect();
        ConeVec { psd, lp }
    }

    /// (WᵀW)⁻¹ v = QᵀQ V QᵀQ.
    fn wtw_inv(&self, v: &ConeVec) -> ConeVec {
        let psd = v.psd.iter().zip(&self.qtq).map(|(vm, p)| sandwich(p, vm)).collect();
        let lp = v.lp.iter().zip(&self.w_lp).map(|(a, w)| a / (w * w)).collect();
        ConeVec { psd, lp }
    }

    /// WᵀW v = RRᵀ V RRᵀ.
    fn wtw(&self, v: &ConeVec) -> ConeVec {
        let psd = v.psd.iter().zip(&self.rrt).map(|(vm, p)| sandwich(p, vm)).collect();
        let lp = v.lp.iter().zip(&self.w_lp).map(|(a, w)| a * w * w).collect();
        ConeVec { psd, lp }
    }

    fn lambda(&self) -> ConeVec {
        let psd = self.lam_psd.iter().map(|l| Mat::from_fn(l.len(), l.len(), |i, j| if i == j { l[i] } else { 0.0 })).collect();
        ConeVec { psd, lp: self.lam_lp.clone() }
    }

    /// Solve λ∘u = r.
    fn lam_solve(&self, r: &ConeVec) -> ConeVec {
        let psd = r
            .psd
            .iter()
            .zip(&self.lam_psd)
            .map(|(rm, l)| Mat::from_fn(l.len(), l.len(), |i, j| 2.0 * rm[(i, j)] / (l[i] + l[j])))
            .collect();
        let lp = r.lp.iter().zip(&self.lam_lp).map(|(a, l)| a / l).collect();
        ConeVec { psd, lp }
    }

    /// Largest α ≤ ∞ keeping λ + α·d in the cone.
    fn max_step(&self, d: &ConeVec) -> f64 {
        let mut t = f64::INFINITY;
        for (&dv, &l) in d.lp.iter().zip(&self.lam_lp) {
            if dv < 0.0 {
                t = t.min(-l / dv);
            }
        }
        for (dm, l) in d.psd.iter().zip(&self.lam_psd) {
            let n = l.len();
            let scaled = Mat::<f64>::from_fn(n, n, |i, j| dm[(i, j)] / (l[i] * l[j]).sqrt());
            let lo = sym_eigenvalues(&scaled)[0];
            if lo < 0.0 {
                t = t.min(-1.0 / lo);
            }
        }
        t
    }
}

/// R X Rᵀ
fn congruence(r: &Mat<f64>, x: &Mat<f64>) -> Mat<f64> {
    let mut out = r * x * r.transpose();
    symmetrize(&mut out);
    out
}

/// Rᵀ X R
fn congruence_t(r: &Mat<f64>, x: &Mat<f64>) -> Mat<f64> {
    let mut out = r.transpose() * x * r;
    symmetrize(&mut out);
    out
}

/// P X P for symmetric P.
fn sandwich(p: &Mat<f64>, x: &Mat<f64>) -> Mat<f64> {
    let mut out = p * x * p;
    symmetrize(&mut out);
    out
}

/// (AB + BA)/2
fn jordan(a: &ConeVec, b: &ConeVec) -> ConeVec {
    let psd = a
        .psd
        .iter()
        .zip(&b.psd)
        .map(|(x, y)| {
            let mut out = x * y;
            let t = y * x;
            for j in 0..out.ncols() {
                for i in 0..out.nrows() {
                    out[(i, j)] = 0.5 * (out[(i, j)] + t[(i, j)]);
                }
            }
            out
        })
        .collect();
    let lp = a.lp.iter().zip(&b.lp).map(|(x, y)| x * y).collect();
    ConeVec { psd, lp }
}

/// Factorized reduced KKT system for one scaling point.
struct Kkt {
    k_chol: Llt<f64>,
    s_chol: Option<Llt<f64>>,
    kinv_et: Mat<f64>,
}

fn chol_regularized(mut a: Mat<f64>) -> Option<Llt<f64>> {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    if let Ok(l) = a.llt(Side::Lower) {
        return Some(l);
    }
    let mut delta = 1e-13 * scale;
    for _ in 0..8 {
        for i in 0..n {
            a[(i, i)] += delta;
        }
        if let Ok(l) = a.llt(Side::Lower) {
            return Some(l);
        }
        delta *= 100.0;
    }
    None
}

impl Kkt {
    fn new(data: &Data, sc: &Scaling) -> Option<Kkt> {
        let m = data.m;
        let mut h = Mat::<f64>::zeros(m, m);
        // H_ik = Tr(A_i P A_k P) with P = QᵀQ, gathered row by row
        for (b, p) in data.psd.iter().zip(&sc.qtq) {
            let d = b.d;
            let dense_threshold = 2 * d;
            let mut pap = Mat::<f64>::zeros(d, d);
            for (idx, &i) in b.params.iter().enumerate() {
                let ents = &b.mats[idx];
                if ents.len() > dense_threshold {
                    let mut a = Mat::<f64>::zeros(d, d);
                    for &(r, c, v) in ents {
                        a[(r, c)] += v;
                        if r != c {
                            a[(c, r)] += v;
                        }
                    }
                    pap = p * &a * p;
                } else {
                    pap.fill(0.0);
                    for &(r, c, v) in ents {
                        // v·(P e_r e_cᵀ P + P e_c e_rᵀ P)
                        for jj in 0..d {
                            let pcj = p[(c, jj)];
                            let prj = p[(r, jj)];
                            for ii in 0..d {
                                let val = p[(ii, r)] * pcj + if r != c { p[(ii, c)] * prj } else { 0.0 };
                                pap[(ii, jj)] += v * val;
                            }
                        }
                    }
                }
                for (&k, ents_k) in b.params.iter().zip(&b.mats) {
                    h[(i, k)] += sym_inner(ents_k, &pap);
                }
            }
        }
        for (l, col) in data.lp_cols.iter().enumerate() {
            let wl = sc.w_lp[l];
            let inv = 1.0 / (wl * wl);
            for &(i, a) in col {
                for &(k, b) in col {
                    h[(i, k)] += a * b * inv;
                }
            }
        }
        let p = data.neq();
        // K̃ = H + EᵀE
        if p > 0 {
            let ete = data.e_mat.transpose() * &data.e_mat;
            h += &ete;
        }
        symmetrize(&mut h);
        let k_chol = chol_regularized(h)?;
        if p == 0 {
            return Some(Kkt { k_chol, s_chol: None, kinv_et: Mat::zeros(m, 0) });
        }
        let mut kinv_et = data.e_mat.transpose().to_owned();
        k_chol.solve_in_place(kinv_et.as_mut());
        let mut s = &data.e_mat * &kinv_et;
        symmetrize(&mut s);
        let s_chol = chol_regularized(s)?;
        Some(Kkt { k_chol, s_chol: Some(s_chol), kinv_et })
    }

    fn solve_once(&self, data: &Data, sc: &Scaling, bx: &[f64], by: &[f64], bz: &ConeVec) -> (Vec<f64>, Vec<f64>, ConeVec) {
        let m = data.m;
        let t = sc.wtw_inv(bz);
        let gtt = data.gt(&t);
        let mut rhs = Mat::<f64>::from_fn(m, 1, |i, _| bx[i] + gtt[i]);
        if !by.is_empty() {
            let eb = data.et_mul(by);
            for i in 0..m {
                rhs[(i, 0)] += eb[i];
            }
        }
        self.k_chol.solve_in_place(rhs.as_mut());
        let mut x: Vec<f64> = (0..m).map(|i| rhs[(i, 0)]).collect();
        let y = match &self.s_chol {
            None => Vec::new(),
            Some(sch) => {
                let eu = data.e_mul(&x);
                let mut yr = Mat::<f64>::from_fn(by.len(), 1, |f, _| eu[f] - by[f]);
                sch.solve_in_place(yr.as_mut());
                let y: Vec<f64> = (0..by.len()).map(|f| yr[(f, 0)]).collect();
                for i in 0..m {
                    let mut acc = 0.0;
                    for (f, &yf) in y.iter().enumerate() {
                        acc += self.kinv_et[(i, f)] * yf;
                    }
                    x[i] -= acc;
                }
                y
            }
        };
        let gx = data.g(&x);
        let mut z = sc.wtw_inv(&gx);
        z.axpy(-1.0, &t);
        (x, y, z)
    }

    /// Solve [0 Eᵀ Gᵀ; E 0 0; G 0 −WᵀW] (x, y, z) = (bx, by, bz) with
    /// iterative refinement.
    fn solve(&self, data: &Data, sc: &Scaling, bx: &[f64], by: &[f64], bz: &ConeVec) -> (Vec<f64>, Vec<f64>, ConeVec) {
        let (mut x, mut y, mut z) = self.solve_once(data, sc, bx, by, bz);
        for _ in 0..2 {
            let gtz = data.gt(&z);
            let ety = data.et_mul(&y);
            let rx: Vec<f64> = (0..data.m).map(|i| bx[i] - ety[i] - gtz[i]).collect();
            let ex = data.e_mul(&x);
            let ry: Vec<f64> = by.iter().zip(&ex).map(|(a, b)| a - b).collect();
            let mut rz = bz.sub(&data.g(&x));
            rz.axpy(1.0, &sc.wtw(&z));
            let scale = 1.0 + norm(bx) + norm(by) + bz.norm();
            if norm(&rx) + norm(&ry) + rz.norm() <= 1e-14 * scale {
                break;
            }
            let (dx, dy, dz) = self.solve_once(data, sc, &rx, &ry, &rz);
            for (a, b) in x.iter_mut().zip(&dx) {
                *a += b;
            }
            for (a, b) in y.iter_mut().zip(&dy) {
                *a += b;
            }
            z.axpy(1.0, &dz);
        }
        (x, y, z)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw result of the interior-point run, in internal coordinates.
pub(crate) struct IpmResult {
    pub status: Status,
    pub iterations: usize,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub z: ConeVec,
    pub pres: f64,
    pub dres: f64,
}

struct Iterate {
    u: Vec<f64>,
    w: Vec<f64>,
    s: ConeVec,
    z: ConeVec,
    tau: f64,
    kappa: f64,
}

struct Stats {
    pres: f64,
    dres: f64,
    pcost: f64,
    dcost: f64,
    relgap: f64,
    pinf: Option<f64>,
    dinf: Option<f64>,
}

pub(crate) fn run(data: &Data, cfg: &SolverConfig) -> IpmResult {
    let m = data.m;
    let p = data.neq();
    let h = data.h();
    let resx0 = norm(&data.c).max(1.0);
    let resy0 = norm(&data.e_rhs).max(1.0);
    let resz0 = h.norm().max(1.0);
    let deg = data.degree() as f64;

    let ident = ConeVec::identity(data);
    let unit = Scaling::new(&ident, &ident).expect("identity scaling");
    let trouble = |iters: usize, it: Option<&Iterate>| IpmResult {
        status: Status::NumericalTrouble,
        iterations: iters,
        u: it.map(|i| i.u.iter().map(|v| v / i.tau).collect()).unwrap_or_else(|| vec![0.0; m]),
        w: it.map(|i| i.w.iter().map(|v| v / i.tau).collect()).unwrap_or_else(|| vec![0.0; p]),
        z: it.map(|i| i.z.scaled(1.0 / i.tau)).unwrap_or_else(|| ConeVec::zeros(data)),
        pres: f64::INFINITY,
        dres: f64::INFINITY,
    };
    let Some(kkt0) = Kkt::new(data, &unit) else {
        return trouble(0, None);
    };
    // primal start: least-squares fit of h
    let (u0, _, zp) = kkt0.solve(data, &unit, &vec![0.0; m], &data.e_rhs, &h);
    let mut s = zp.scaled(-1.0);
    // dual start
    let negc: Vec<f64> = data.c.iter().map(|v| -v).collect();
    let (_, w0, mut z) = kkt0.solve(data, &unit, &negc, &vec![0.0; p], &ConeVec::zeros(data));
    for v in [&mut s, &mut z] {
        let t = v.neg_min_eig();
        if t >= -1e-8 * v.norm().max(1.0) {
            v.axpy(1.0 + t, &ident);
        }
    }
    let mut it = Iterate { u: u0, w: w0, s, z, tau: 1.0, kappa: 1.0 };
    let mut best: Option<(f64, IpmResult)> = None;
    let mut small_steps = 0;
    let mut hit_limit = false;

    for iter in 0..=cfg.max_iters {
        // residuals
        let gtz = data.gt(&it.z);
        let etw = data.et_mul(&it.w);
        let hrx: Vec<f64> = (0..m).map(|i| etw[i] + gtz[i]).collect();
        let rx: Vec<f64> = (0..m).map(|i| hrx[i] + data.c[i] * it.tau).collect();
        let hry = data.e_mul(&it.u);
        let ry: Vec<f64> = (0..p).map(|f| hry[f] - data.e_rhs[f] * it.tau).collect();
        let mut hrz = data.g(&it.u);
        hrz.axpy(1.0, &it.s);
        let mut rz = hrz.clone();
        rz.axpy(-it.tau, &h);
        let cx = dot(&data.c, &it.u);
        let ew = dot(&data.e_rhs, &it.w);
        let hz = h.dot(&it.z);
        let rt = it.kappa + cx + ew + hz;
        let sz = it.s.dot(&it.z);
        let mu = (sz + it.tau * it.kappa) / (deg + 1.0);

        let stats = Stats {
            pres: (norm(&ry) / resy0).max(rz.norm() / resz0) / it.tau,
            dres: norm(&rx) / resx0 / it.tau,
            pcost: cx / it.tau,
            dcost: -(ew + hz) / it.tau,
            relgap: 0.0,
            pinf: (hz + ew < 0.0).then(|| norm(&hrx) / resx0 / (-(hz + ew))),
            dinf: (cx < 0.0).then(|| (norm(&hry) / resy0).max(hrz.norm() / resz0) / (-cx)),
        };
        let gap_abs = sz / (it.tau * it.tau);
        let relgap = ((stats.pcost - stats.dcost).abs().max(gap_abs)) / stats.pcost.abs().max(1.0);
        let stats = Stats { relgap, ..stats };

        let snapshot = |status: Status| IpmResult {
            status,
            iterations: iter,
            u: it.u.iter().map(|v| v / it.tau).collect(),
            w: it.w.iter().map(|v| v / it.tau).collect(),
            z: it.z.scaled(1.0 / it.tau),
            pres: stats.pres,
            dres: stats.dres,
        };

        if stats.pres <= cfg.feas_tol && stats.dres <= cfg.feas_tol && stats.relgap <= cfg.gap_tol {
            return snapshot(Status::Optimal);
        }
        if let Some(pi) = stats.pinf {
            if pi <= cfg.feas_tol {
                let scale = 1.0 / (-(hz + ew));
                return IpmResult {
                    status: Status::Infeasible,
                    iterations: iter,
                    u: vec![f64::NAN; m],
                    w: it.w.iter().map(|v| v * scale).collect(),
                    z: it.z.scaled(scale),
                    pres: stats.pres,
                    dres: stats.dres,
                };
            }
        }
        if let Some(di) = stats.dinf {
            if di <= cfg.feas_tol {
                let scale = 1.0 / (-cx);
                return IpmResult {
                    status: Status::Unbounded,
                    iterations: iter,
                    u: it.u.iter().map(|v| v * scale).collect(),
                    w: vec![f64::NAN; p],
                    z: ConeVec::zeros(data),
                    pres: stats.pres,
                    dres: stats.dres,
                };
            }
        }
        let score = stats.pres.max(stats.dres).max(stats.relgap);
        if score.is_finite() && best.as_ref().map_or(true, |(b, _)| score < *b) {
            best = Some((score, snapshot(Status::MaxIter)));
        }
        if iter == cfg.max_iters {
            hit_limit = true;
            break;
        }

        let Some(sc) = Scaling::new(&it.s, &it.z) else {
            break;
        };
        let Some(kkt) = Kkt::new(data, &sc) else {
            break;
        };
        let (x1, y1, z1) = kkt.solve(data, &sc, &negc, &data.e_rhs, &h);
        let q1 = dot(&data.c, &x1) + dot(&data.e_rhs, &y1) + h.dot(&z1);
        let lam = sc.lambda();
        let lam_sq = jordan(&lam, &lam);

        let mut sigma = 0.0;
        let mut aff: Option<(ConeVec, ConeVec, f64, f64)> = None;
        let mut step_dir = None;
        for pass in 0..2 {
            let mut rc = lam_sq.scaled(-1.0);
            let mut uk = -it.tau * it.kappa;
            if pass == 1 {
                rc.axpy(sigma * mu, &ident_like(&lam));
                if let Some((dsa, dza, dta, dka)) = &aff {
                    rc.axpy(-1.0, &jordan(dsa, dza));
                    uk += sigma * mu - dta * dka;
                } else {
                    uk += sigma * mu;
                }
            }
            let us = sc.lam_solve(&rc);
            let f = -(1.0 - sigma);
            let ux: Vec<f64> = rx.iter().map(|v| f * v).collect();
            let uy: Vec<f64> = ry.iter().map(|v| f * v).collect();
            let mut uz = rz.scaled(f);
            uz.axpy(-1.0, &sc.wt(&us));
            let ut = f * rt;
            let (x0, y0, z0) = kkt.solve(data, &sc, &ux, &uy, &uz);
            let q0 = dot(&data.c, &x0) + dot(&data.e_rhs, &y0) + h.dot(&z0);
            let dtau = (ut - uk / it.tau - q0) / (q1 - it.kappa / it.tau);
            let dx: Vec<f64> = (0..m).map(|i| x0[i] + dtau * x1[i]).collect();
            let dy: Vec<f64> = (0..p).map(|f| y0[f] + dtau * y1[f]).collect();
            let mut dz = z0.clone();
            dz.axpy(dtau, &z1);
            let dkappa = (uk - it.kappa * dtau) / it.tau;
            let dzt = sc.w(&dz);
            let dst = us.sub(&dzt);
            let mut alpha = sc.max_step(&dst).min(sc.max_step(&dzt));
            if dtau < 0.0 {
                alpha = alpha.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                alpha = alpha.min(-it.kappa / dkappa);
            }
            if pass == 0 {
                let a = alpha.min(1.0);
                sigma = (1.0 - a).powi(3);
                aff = Some((dst, dzt, dtau, dkappa));
            } else {
                step_dir = Some((dx, dy, dz, dst, dtau, dkappa, alpha));
            }
        }
        let (dx, dy, dz, dst, dtau, dkappa, alpha) = step_dir.expect("combined step");
        let step = (cfg.step_damping * alpha).min(1.0);
        if !step.is_finite() || step <= 0.0 {
            break;
        }
        small_steps = if step < 1e-8 { small_steps + 1 } else { 0 };
        if small_steps >= 3 {
            break;
        }
        for i in 0..m {
            it.u[i] += step * dx[i];
        }
        for f in 0..p {
            it.w[f] += step * dy[f];
        }
        it.z.axpy(step, &dz);
        it.s.axpy(step, &sc.wt(&dst));
        it.tau += step * dtau;
        it.kappa += step * dkappa;
        if !(it.tau > 0.0 && it.kappa > 0.0) {
            break;
        }
    }
    match best {
        Some((_, mut r)) => {
            r.status = if hit_limit { Status::MaxIter } else { Status::NumericalTrouble };
            r
        }
        None => trouble(cfg.max_iters, Some(&it)),
    }
}

fn ident_like(lam: &ConeVec) -> ConeVec {
    ConeVec {
        psd: lam.psd.iter().map(|m| Mat::identity(m.nrows(), m.ncols())).collect(),
        lp: vec![1.0; lam.lp.len()],
    }
}
