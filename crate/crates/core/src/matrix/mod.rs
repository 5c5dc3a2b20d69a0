//! Dense real/complex matrices and the tensor-structural operators used by
//! the relaxation builders: Kronecker products, partial traces and
//! transposes, swap and symmetric projectors, and the real embedding of
//! Hermitian matrices.

mod json;
mod tensor;

pub use json::MatrixJson;
pub(crate) use tensor::hermitian_basis_sparse;
pub use tensor::{
    hermitian_basis, kron, max_entangled_projector, partial_trace, partial_transpose,
    swap_operator, symmetric_basis, symmetric_basis_sparse, symmetric_projector,
    symmetric_subspace_dim, TensorLayout,
};

use crate::error::{Error, Result};
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

/// Scalar field of a matrix or problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The smallest field containing both.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }
}

/// Structural promise attached to a square matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    PsdAsserted,
}

/// Relative tolerance for the symmetric/Hermitian class check.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalue slack (relative to the trace scale) for PSD-asserted matrices.
pub const PSD_TOL: f64 = 1e-8;

/// Dense row-major matrix over the reals or the complex numbers.
///
/// Entries are always stored as complex pairs; for `Field::Real` every
/// imaginary part is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMatrix {
    field: Field,
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
    symmetry: Symmetry,
    symmetrized: bool,
}

impl FieldMatrix {
    pub fn zeros(field: Field, nrows: usize, ncols: usize) -> Self {
        FieldMatrix {
            field,
            nrows,
            ncols,
            data: vec![C64::new(0.0, 0.0); nrows * ncols],
            symmetry: Symmetry::General,
            symmetrized: false,
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m.symmetry = default_hermitian(field);
        m
    }

    pub fn from_real(nrows: usize, ncols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::Dimension(format!(
                "{} values for a {nrows}x{ncols} matrix",
                values.len()
            )));
        }
        Ok(FieldMatrix {
            field: Field::Real,
            nrows,
            ncols,
            data: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
            symmetry: Symmetry::General,
            symmetrized: false,
        })
    }

    pub fn from_complex(nrows: usize, ncols: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::Dimension(format!(
                "{} values for a {nrows}x{ncols} matrix",
                values.len()
            )));
        }
        Ok(FieldMatrix {
            field: Field::Complex,
            nrows,
            ncols,
            data: values,
            symmetry: Symmetry::General,
            symmetrized: false,
        })
    }

    pub fn from_fn(field: Field, nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let v = f(i, j);
                data.push(if field == Field::Real { C64::new(v.re, 0.0) } else { v });
            }
        }
        FieldMatrix { field, nrows, ncols, data, symmetry: Symmetry::General, symmetrized: false }
    }

    pub fn real_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(Field::Real, nrows, ncols, |i, j| C64::new(f(i, j), 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(Field::Real, n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = C64::new(v, 0.0);
        }
        m.symmetry = Symmetry::Symmetric;
        m
    }

    /// Rank-one projector |v⟩⟨v| (v is not normalized here).
    pub fn outer(field: Field, v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::from_fn(field, n, n, |i, j| v[i] * v[j].conj());
        m.symmetry = default_hermitian(field);
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn dim(&self) -> usize {
        self.nrows
    }
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }
    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
    /// Whether the constructor had to symmetrize noisy input.
    pub fn was_symmetrized(&self) -> bool {
        self.symmetrized
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.ncols + j]
    }
    #[inline]
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j].re
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let v = if self.field == Field::Real { C64::new(v.re, 0.0) } else { v };
        self.data[i * self.ncols + j] = v;
        self.symmetry = Symmetry::General;
    }

    /// Same entries viewed over the complex field.
    pub fn to_complex(&self) -> Self {
        let mut m = self.clone();
        m.field = Field::Complex;
        if m.symmetry == Symmetry::Symmetric {
            m.symmetry = Symmetry::Hermitian;
        }
        m
    }

    pub fn promote(&self, field: Field) -> Result<Self> {
        match (self.field, field) {
            (a, b) if a == b => Ok(self.clone()),
            (Field::Real, Field::Complex) => Ok(self.to_complex()),
            _ => Err(Error::Field("cannot demote a complex matrix to the reals".into())),
        }
    }

    /// Same matrix over `field`: promotes to ℂ, or drops an imaginary part
    /// that is numerically zero.
    pub fn in_field(&self, field: Field) -> Result<Self> {
        match field {
            Field::Complex => Ok(self.to_complex()),
            Field::Real => self.to_real(1e-12),
        }
    }

    /// Drop imaginary parts; fails if any exceeds `tol`.
    pub fn to_real(&self, tol: f64) -> Result<Self> {
        let worst = self.data.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
        if worst > tol {
            return Err(Error::Field(format!("imaginary part {worst:e} exceeds {tol:e}")));
        }
        let mut m = self.clone();
        m.field = Field::Real;
        for z in &mut m.data {
            z.im = 0.0;
        }
        if m.symmetry == Symmetry::Hermitian {
            m.symmetry = Symmetry::Symmetric;
        }
        Ok(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Largest entry of |M − M†|.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.nrows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= SYMMETRY_TOL * (1.0 + self.max_abs())
    }

    /// Tag as symmetric/Hermitian. Entries within tolerance are accepted as
    /// is, noisier ones are replaced by (M + M†)/2 and the matrix remembers
    /// that it was symmetrized.
    pub fn into_hermitian(mut self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", self.nrows, self.ncols)));
        }
        if !self.is_hermitian() {
            self = self.hermitian_part();
            self.symmetrized = true;
        }
        self.symmetry = default_hermitian(self.field);
        Ok(self)
    }

    /// Tag as PSD after checking the minimum eigenvalue.
    pub fn into_psd(self) -> Result<Self> {
        let mut h = self.into_hermitian()?;
        let scale = h.trace().re.abs().max(h.max_abs()).max(1.0);
        let lo = h.min_eigenvalue();
        if lo < -PSD_TOL * scale {
            return Err(Error::Invalid(format!("matrix is not PSD: min eigenvalue {lo:e}")));
        }
        h.symmetry = Symmetry::PsdAsserted;
        Ok(h)
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let n = self.nrows;
        let mut m = Self::from_fn(self.field, n, n, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5);
        m.symmetry = default_hermitian(self.field);
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::from_fn(self.field, self.ncols, self.nrows, |i, j| self.get(j, i).conj());
        m.symmetry = self.symmetry;
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::from_fn(self.field, self.ncols, self.nrows, |i, j| self.get(j, i));
        m.symmetry = self.symmetry;
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = self.clone();
        for z in &mut m.data {
            *z = z.conj();
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.clone();
        for z in &mut m.data {
            *z *= s;
        }
        if s < 0.0 && m.symmetry == Symmetry::PsdAsserted {
            m.symmetry = default_hermitian(m.field);
        }
        m
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        let field = if s.im != 0.0 { Field::Complex } else { self.field };
        let mut m = self.clone().promote(field).expect("promotion to complex");
        for z in &mut m.data {
            *z *= s;
        }
        m.symmetry = Symmetry::General;
        m
    }

    /// Tr(A·B) without forming the product.
    pub fn trace_product(&self, other: &FieldMatrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    /// Real part of Tr(A·B); the natural pairing for Hermitian A, B.
    pub fn inner(&self, other: &FieldMatrix) -> f64 {
        self.trace_product(other).re
    }

    pub fn matmul(&self, other: &FieldMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let field = self.field.join(other.field);
        let (n, m, p) = (self.nrows, self.ncols, other.ncols);
        let mut data = vec![C64::new(0.0, 0.0); n * p];
        for i in 0..n {
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * p..(k + 1) * p];
                let out = &mut data[i * p..(i + 1) * p];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(FieldMatrix { field, nrows: n, ncols: p, data, symmetry: Symmetry::General, symmetrized: false })
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.nrows)
            .map(|i| (0..self.ncols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// ⟨v|M|v⟩ (real part).
    pub fn quad_form(&self, v: &[C64]) -> f64 {
        let mv = self.mat_vec(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn zip_with(&self, other: &FieldMatrix, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let field = self.field.join(other.field);
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(FieldMatrix { field, nrows: self.nrows, ncols: self.ncols, data, symmetry: Symmetry::General, symmetrized: false })
    }

    pub fn try_add(&self, other: &FieldMatrix) -> Result<Self> {
        let mut m = self.zip_with(other, |a, b| a + b)?;
        m.symmetry = join_symmetry(self.symmetry, other.symmetry, m.field);
        Ok(m)
    }

    pub fn try_sub(&self, other: &FieldMatrix) -> Result<Self> {
        let mut m = self.zip_with(other, |a, b| a - b)?;
        if is_selfadjoint(self.symmetry) && is_selfadjoint(other.symmetry) {
            m.symmetry = default_hermitian(m.field);
        }
        Ok(m)
    }

    /// Hadamard (entrywise) product.
    pub fn hadamard(&self, other: &FieldMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &FieldMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigen-decomposition of the Hermitian part. Eigenvalues ascend;
    /// eigenvectors are the columns of the returned matrix.
    pub fn eigh(&self) -> (Vec<f64>, FieldMatrix) {
        let n = self.nrows;
        let h = self.hermitian_part();
        match self.field {
            Field::Real => {
                let a = Mat::<f64>::from_fn(n, n, |i, j| h.re(i, j));
                let e = a.self_adjoint_eigen(Side::Lower).expect("symmetric eigensolver");
                let vals: Vec<f64> = (0..n).map(|i| e.S()[i]).collect();
                let u = e.U();
                let vecs = FieldMatrix::real_fn(n, n, |i, j| u[(i, j)]);
                (vals, vecs)
            }
            Field::Complex => {
                let a = Mat::<C64>::from_fn(n, n, |i, j| h.get(i, j));
                let e = a.self_adjoint_eigen(Side::Lower).expect("hermitian eigensolver");
                let vals: Vec<f64> = (0..n).map(|i| e.S()[i].re).collect();
                let u = e.U();
                let vecs = FieldMatrix::from_fn(Field::Complex, n, n, |i, j| u[(i, j)]);
                (vals, vecs)
            }
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Largest singular value, via the eigenvalues of M†M.
    pub fn operator_norm(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("square product");
        g.max_eigenvalue().max(0.0).sqrt()
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("square product");
        g.eigenvalues().iter().map(|v| v.max(0.0).sqrt()).sum()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    /// Square root of a PSD matrix (negative eigenvalues clipped).
    pub fn psd_sqrt(&self) -> FieldMatrix {
        let (vals, vecs) = self.eigh();
        let n = self.nrows;
        let mut out = FieldMatrix::from_fn(self.field, n, n, |i, j| {
            (0..n).map(|k| vecs.get(i, k) * vals[k].max(0.0).sqrt() * vecs.get(j, k).conj()).sum()
        });
        out.symmetry = Symmetry::PsdAsserted;
        out
    }

    /// Inverse of a positive definite matrix.
    pub fn pd_inverse(&self) -> Result<FieldMatrix> {
        let (vals, vecs) = self.eigh();
        if vals.first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::Numerical("matrix is not positive definite".into()));
        }
        let n = self.nrows;
        let mut out = FieldMatrix::from_fn(self.field, n, n, |i, j| {
            (0..n).map(|k| vecs.get(i, k) * (1.0 / vals[k]) * vecs.get(j, k).conj()).sum()
        });
        out.symmetry = default_hermitian(self.field);
        Ok(out)
    }

    pub(crate) fn set_symmetry(&mut self, s: Symmetry) {
        self.symmetry = s;
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        self.symmetry = Symmetry::General;
        &mut self.data
    }
}

pub(crate) fn default_hermitian(field: Field) -> Symmetry {
    match field {
        Field::Real => Symmetry::Symmetric,
        Field::Complex => Symmetry::Hermitian,
    }
}

fn is_selfadjoint(s: Symmetry) -> bool {
    !matches!(s, Symmetry::General)
}

fn join_symmetry(a: Symmetry, b: Symmetry, field: Field) -> Symmetry {
    match (a, b) {
        (Symmetry::PsdAsserted, Symmetry::PsdAsserted) => Symmetry::PsdAsserted,
        (x, y) if is_selfadjoint(x) && is_selfadjoint(y) => default_hermitian(field),
        _ => Symmetry::General,
    }
}

impl Add for &FieldMatrix {
    type Output = FieldMatrix;
    fn add(self, rhs: &FieldMatrix) -> FieldMatrix {
        self.try_add(rhs).expect("matrix dimensions agree")
    }
}

impl Sub for &FieldMatrix {
    type Output = FieldMatrix;
    fn sub(self, rhs: &FieldMatrix) -> FieldMatrix {
        self.try_sub(rhs).expect("matrix dimensions agree")
    }
}

impl Mul for &FieldMatrix {
    type Output = FieldMatrix;
    fn mul(self, rhs: &FieldMatrix) -> FieldMatrix {
        self.matmul(rhs).expect("matrix dimensions agree")
    }
}

/// Real symmetric 2n×2n embedding [[Re h, −Im h], [Im h, Re h]] of a
/// Hermitian matrix. Each eigenvalue of `h` appears twice in the output.
pub fn hermitian_to_real_embed(h: &FieldMatrix) -> Result<FieldMatrix> {
    if !h.is_square() || !h.is_hermitian() {
        return Err(Error::Invalid("embedding requires a Hermitian matrix".into()));
    }
    let n = h.nrows();
    let mut m = FieldMatrix::real_fn(2 * n, 2 * n, |i, j| {
        let z = h.get(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    m.symmetry = if h.symmetry() == Symmetry::PsdAsserted { Symmetry::PsdAsserted } else { Symmetry::Symmetric };
    Ok(m)
}

/// Least-squares solution through the pseudo-inverse of a symmetric matrix.
pub(crate) fn pinv_solve(gram: &Mat<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Numerical("eigen-decomposition failed".into()))?;
    let (vals, vecs) = (eig.S(), eig.U());
    let top = (0..n).map(|i| vals[i].abs()).fold(0.0, f64::max);
    let mut out = vec![0.0; n];
    for k in 0..n {
        let lk = vals[k];
        if lk.abs() <= 1e-12 * top.max(1e-300) {
            continue;
        }
        let proj: f64 = (0..n).map(|i| vecs[(i, k)] * rhs[i]).sum::<f64>() / lk;
        for (i, o) in out.iter_mut().enumerate() {
            *o += vecs[(i, k)] * proj;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_check_and_symmetrize() {
        let m = FieldMatrix::from_complex(2, 2, vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert!(m.is_hermitian());
        let h = m.clone().into_hermitian().unwrap();
        assert!(!h.was_symmetrized());
        assert_eq!(h.symmetry(), Symmetry::Hermitian);

        let noisy = FieldMatrix::from_real(2, 2, &[1.0, 0.5, 0.5 + 1e-6, 1.0]).unwrap();
        let s = noisy.into_hermitian().unwrap();
        assert!(s.was_symmetrized());
        assert!((s.re(0, 1) - s.re(1, 0)).abs() < 1e-15);
    }

    #[test]
    fn psd_assertion_rejects_indefinite() {
        let m = FieldMatrix::diag_real(&[1.0, -0.5]);
        assert!(m.into_psd().is_err());
        let m = FieldMatrix::diag_real(&[1.0, 0.0]);
        assert_eq!(m.into_psd().unwrap().symmetry(), Symmetry::PsdAsserted);
    }

    #[test]
    fn embed_real_symmetric_is_block_diagonal() {
        let h = FieldMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let e = hermitian_to_real_embed(&h).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(e.re(i, j), h.re(i, j));
                assert_eq!(e.re(i + 2, j + 2), h.re(i, j));
                assert_eq!(e.re(i, j + 2), 0.0);
            }
        }
    }

    #[test]
    fn embed_pauli_y_spectrum() {
        let y = FieldMatrix::from_complex(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let vals = hermitian_to_real_embed(&y).unwrap().eigenvalues();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_rejects_non_hermitian() {
        let m = FieldMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(hermitian_to_real_embed(&m).is_err());
    }

    #[test]
    fn complex_eigh_reconstructs() {
        let m = FieldMatrix::from_complex(2, 2, vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)]).unwrap();
        let (vals, vecs) = m.eigh();
        for i in 0..2 {
            for j in 0..2 {
                let r: C64 = (0..2).map(|k| vecs.get(i, k) * vals[k] * vecs.get(j, k).conj()).sum();
                assert!((r - m.get(i, j)).norm() < 1e-12);
            }
        }
    }
}
