use super::{default_hermitian, Field, FieldMatrix, Symmetry, C64};
use crate::error::{Error, Result};

/// Rows above this size are refused by the symmetric-subspace operators.
const ROW_BUDGET: usize = 1_000_000;

/// Factorization of a matrix dimension into tensor factors, e.g. `[n, k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorLayout {
    pub factor_dims: Vec<usize>,
}

impl TensorLayout {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::Layout(format!("bad factor dimensions {factor_dims:?}")));
        }
        Ok(TensorLayout { factor_dims })
    }

    pub fn total(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Mixed-radix digits of a flat index, most significant factor first.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factor_dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    pub fn flatten(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factor_dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    fn check(&self, m: &FieldMatrix) -> Result<()> {
        if !m.is_square() || m.nrows() != self.total() {
            return Err(Error::Layout(format!(
                "layout {:?} (total {}) does not match a {}x{} matrix",
                self.factor_dims,
                self.total(),
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    fn check_parts(&self, parts: &[usize]) -> Result<()> {
        for &p in parts {
            if p >= self.factor_dims.len() {
                return Err(Error::Layout(format!("factor index {p} out of range")));
            }
        }
        Ok(())
    }
}

/// Kronecker product; a real factor is promoted when the other is complex.
pub fn kron(a: &FieldMatrix, b: &FieldMatrix) -> Result<FieldMatrix> {
    let field = a.field().join(b.field());
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut m = FieldMatrix::from_fn(field, ar * br, ac * bc, |i, j| a.get(i / br, j / bc) * b.get(i % br, j % bc));
    let sym = match (a.symmetry(), b.symmetry()) {
        (Symmetry::PsdAsserted, Symmetry::PsdAsserted) => Symmetry::PsdAsserted,
        (Symmetry::General, _) | (_, Symmetry::General) => Symmetry::General,
        _ => default_hermitian(field),
    };
    m.set_symmetry(sym);
    Ok(m)
}

/// Partial trace keeping the factors listed in `keep` (in layout order).
pub fn partial_trace(m: &FieldMatrix, layout: &TensorLayout, keep: &[usize]) -> Result<FieldMatrix> {
    layout.check(m)?;
    layout.check_parts(keep)?;
    if keep.is_empty() {
        return Err(Error::Layout("keep set must be nonempty".into()));
    }
    let nf = layout.factor_dims.len();
    let kept: Vec<bool> = (0..nf).map(|f| keep.contains(&f)).collect();
    let kept_dims: Vec<usize> = (0..nf).filter(|&f| kept[f]).map(|f| layout.factor_dims[f]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let total = layout.total();
    // split every flat index into (kept index, traced index)
    let mut split = Vec::with_capacity(total);
    for idx in 0..total {
        let dg = layout.digits(idx);
        let (mut k, mut t) = (0usize, 0usize);
        for f in 0..nf {
            if kept[f] {
                k = k * layout.factor_dims[f] + dg[f];
            } else {
                t = t * layout.factor_dims[f] + dg[f];
            }
        }
        split.push((k, t));
    }
    let mut out = FieldMatrix::zeros(m.field(), out_dim, out_dim);
    {
        let data = out.data_mut();
        for i in 0..total {
            let (ki, ti) = split[i];
            for j in 0..total {
                let (kj, tj) = split[j];
                if ti == tj {
                    data[ki * out_dim + kj] += m.get(i, j);
                }
            }
        }
    }
    if m.symmetry() != Symmetry::General {
        out.set_symmetry(m.symmetry());
    }
    Ok(out)
}

/// Partial transpose on the factors in `parts`.
pub fn partial_transpose(m: &FieldMatrix, layout: &TensorLayout, parts: &[usize]) -> Result<FieldMatrix> {
    layout.check(m)?;
    layout.check_parts(parts)?;
    let n = layout.total();
    let mut out = FieldMatrix::zeros(m.field(), n, n);
    let digits: Vec<Vec<usize>> = (0..n).map(|i| layout.digits(i)).collect();
    {
        let data = out.data_mut();
        for i in 0..n {
            for j in 0..n {
                let (mut di, mut dj) = (digits[i].clone(), digits[j].clone());
                for &p in parts {
                    std::mem::swap(&mut di[p], &mut dj[p]);
                }
                data[layout.flatten(&di) * n + layout.flatten(&dj)] = m.get(i, j);
            }
        }
    }
    if matches!(m.symmetry(), Symmetry::Symmetric | Symmetry::Hermitian | Symmetry::PsdAsserted) {
        out.set_symmetry(default_hermitian(m.field()));
    }
    Ok(out)
}

/// Swap operator V = Σ |ij⟩⟨ji| on ℝᵈ⊗ℝᵈ.
pub fn swap_operator(d: usize) -> FieldMatrix {
    let n = d * d;
    let mut m = FieldMatrix::zeros(Field::Real, n, n);
    {
        let data = m.data_mut();
        for i in 0..d {
            for j in 0..d {
                data[(i * d + j) * n + (j * d + i)] = C64::new(1.0, 0.0);
            }
        }
    }
    m.set_symmetry(Symmetry::Symmetric);
    m
}

/// Projector onto (1/√d) Σ |αα⟩.
pub fn max_entangled_projector(d: usize) -> FieldMatrix {
    let n = d * d;
    let mut v = vec![C64::new(0.0, 0.0); n];
    let amp = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        v[a * d + a] = C64::new(amp, 0.0);
    }
    let mut m = FieldMatrix::outer(Field::Real, &v);
    m.set_symmetry(Symmetry::PsdAsserted);
    m
}

/// Binomial coefficient C(n, k) as f64-exact integer arithmetic.
pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// C(d + N − 1, N).
pub fn symmetric_subspace_dim(d: usize, n_parties: usize) -> usize {
    binomial(d + n_parties - 1, n_parties)
}

fn check_budget(d: usize, n_parties: usize) -> Result<usize> {
    if d == 0 || n_parties == 0 {
        return Err(Error::Invalid("dimension and party count must be positive".into()));
    }
    let mut total: usize = 1;
    for _ in 0..n_parties {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= ROW_BUDGET)
            .ok_or_else(|| Error::SizeBudget(format!("{d}^{n_parties} exceeds {ROW_BUDGET}")))?;
    }
    Ok(total)
}

/// Nondecreasing index tuples a₁ ≤ … ≤ a_N, in lexicographic order. Each
/// corresponds to one occupation vector; the order starts at |0…0⟩.
fn sorted_tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        // advance to the next nondecreasing tuple
        let mut pos = n;
        while pos > 0 && cur[pos - 1] == d - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        let v = cur[pos - 1] + 1;
        for slot in &mut cur[pos - 1..] {
            *slot = v;
        }
    }
    out
}

fn distinct_permutations(tuple: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = tuple.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next_permutation over a multiset
    loop {
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Orthonormal basis of the symmetric subspace of (ℂᵈ)^{⊗N} as sparse
/// vectors (flat index, amplitude), in occupation-number order.
pub fn symmetric_basis_sparse(d: usize, n_parties: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    check_budget(d, n_parties)?;
    let layout = TensorLayout::new(vec![d; n_parties])?;
    let mut basis = Vec::new();
    for t in sorted_tuples(d, n_parties) {
        let perms = distinct_permutations(&t);
        let amp = 1.0 / (perms.len() as f64).sqrt();
        let mut v: Vec<(usize, f64)> = perms.iter().map(|p| (layout.flatten(p), amp)).collect();
        v.sort_by_key(|e| e.0);
        basis.push(v);
    }
    Ok(basis)
}

/// Dense version of [`symmetric_basis_sparse`].
pub fn symmetric_basis(d: usize, n_parties: usize) -> Result<Vec<Vec<f64>>> {
    let total = check_budget(d, n_parties)?;
    Ok(symmetric_basis_sparse(d, n_parties)?
        .into_iter()
        .map(|sv| {
            let mut v = vec![0.0; total];
            for (i, a) in sv {
                v[i] = a;
            }
            v
        })
        .collect())
}

/// Projector P_N⁺ onto the symmetric subspace of (ℂᵈ)^{⊗N}.
pub fn symmetric_projector(d: usize, n_parties: usize) -> Result<FieldMatrix> {
    let total = check_budget(d, n_parties)?;
    if total > 4096 {
        return Err(Error::SizeBudget(format!("dense projector of size {total}")));
    }
    let mut m = FieldMatrix::zeros(Field::Real, total, total);
    {
        let data = m.data_mut();
        for v in symmetric_basis_sparse(d, n_parties)? {
            for &(i, a) in &v {
                for &(j, b) in &v {
                    data[i * total + j] += C64::new(a * b, 0.0);
                }
            }
        }
    }
    m.set_symmetry(Symmetry::PsdAsserted);
    Ok(m)
}

/// Orthogonal operator basis of the self-adjoint d×d matrices as sparse
/// entry lists. Complex: generalized Gell-Mann matrices plus the identity
/// (d² elements). Real: symmetric matrix units (d(d+1)/2 elements).
pub(crate) fn hermitian_basis_sparse(d: usize, field: Field) -> Vec<Vec<(usize, usize, C64)>> {
    let mut out = Vec::new();
    let one = C64::new(1.0, 0.0);
    match field {
        Field::Real => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..d {
                out.push(vec![(i, i, one)]);
                for j in i + 1..d {
                    out.push(vec![(i, j, C64::new(s, 0.0)), (j, i, C64::new(s, 0.0))]);
                }
            }
        }
        Field::Complex => {
            out.push((0..d).map(|i| (i, i, C64::new(1.0 / (d as f64).sqrt(), 0.0))).collect());
            for l in 1..d {
                let norm = (2.0 / ((l * (l + 1)) as f64)).sqrt();
                let mut e: Vec<(usize, usize, C64)> = (0..l).map(|i| (i, i, C64::new(norm, 0.0))).collect();
                e.push((l, l, C64::new(-(l as f64) * norm, 0.0)));
                out.push(e);
            }
            for i in 0..d {
                for j in i + 1..d {
                    out.push(vec![(i, j, one), (j, i, one)]);
                    out.push(vec![(i, j, C64::new(0.0, -1.0)), (j, i, C64::new(0.0, 1.0))]);
                }
            }
        }
    }
    out
}

/// Dense form of the operator basis used to scalarize matrix equations.
pub fn hermitian_basis(d: usize, field: Field) -> Vec<FieldMatrix> {
    hermitian_basis_sparse(d, field)
        .into_iter()
        .map(|entries| {
            let mut m = FieldMatrix::zeros(field, d, d);
            {
                let data = m.data_mut();
                for (i, j, v) in entries {
                    data[i * d + j] += v;
                }
            }
            m.set_symmetry(default_hermitian(field));
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut ChaCha8Rng, r: usize, c: usize) -> FieldMatrix {
        FieldMatrix::from_fn(Field::Complex, r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> FieldMatrix {
        random_complex(rng, n, n).hermitian_part()
    }

    #[test]
    fn kron_identities_and_diagonals() {
        let i2 = FieldMatrix::identity(Field::Real, 2);
        assert_eq!(kron(&i2, &i2).unwrap(), {
            let mut m = FieldMatrix::identity(Field::Real, 4);
            m.set_symmetry(Symmetry::Symmetric);
            m
        });
        let k = kron(&FieldMatrix::diag_real(&[1.0, 2.0]), &FieldMatrix::diag_real(&[3.0, 4.0])).unwrap();
        for (i, v) in [3.0, 4.0, 6.0, 8.0].iter().enumerate() {
            assert_eq!(k.re(i, i), *v);
        }
    }

    #[test]
    fn kron_mixed_product_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b, c, d) = (
            random_complex(&mut rng, 2, 2),
            random_complex(&mut rng, 2, 2),
            random_complex(&mut rng, 2, 2),
            random_complex(&mut rng, 2, 2),
        );
        let lhs = &kron(&a, &b).unwrap() * &kron(&c, &d).unwrap();
        let ac = &a * &c;
        let bd = &b * &d;
        // naive four-index Kronecker product
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = ac.get(i, k) * bd.get(j, l);
                        assert!((lhs.get(2 * i + j, 2 * k + l) - want).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_promotes_real_factor() {
        let r = FieldMatrix::identity(Field::Real, 2);
        let c = FieldMatrix::identity(Field::Complex, 2);
        assert_eq!(kron(&r, &c).unwrap().field(), Field::Complex);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_hermitian(&mut rng, 3);
        let mut sigma = random_hermitian(&mut rng, 2);
        let t = sigma.trace();
        sigma = sigma.scale_complex(C64::new(1.0, 0.0) / t);
        let prod = kron(&rho, &sigma).unwrap();
        let layout = TensorLayout::new(vec![3, 2]).unwrap();
        let back = partial_trace(&prod, &layout, &[0]).unwrap();
        assert!(back.distance(&rho) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let p = max_entangled_projector(2);
        let layout = TensorLayout::new(vec![2, 2]).unwrap();
        for keep in [0, 1] {
            let r = partial_trace(&p, &layout, &[keep]).unwrap();
            assert!(r.distance(&FieldMatrix::identity(Field::Real, 2).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn swap_partial_trace_is_identity() {
        for d in 1..=4 {
            let v = swap_operator(d);
            let layout = TensorLayout::new(vec![d, d]).unwrap();
            let r = partial_trace(&v, &layout, &[1]).unwrap();
            assert!(r.distance(&FieldMatrix::identity(Field::Real, d)) < 1e-12);
        }
    }

    #[test]
    fn swap_partial_transpose_is_scaled_max_entangled() {
        for d in 1..=4 {
            let v = swap_operator(d);
            let layout = TensorLayout::new(vec![d, d]).unwrap();
            let vt = partial_transpose(&v, &layout, &[0]).unwrap();
            let target = max_entangled_projector(d).scale(d as f64);
            assert!(vt.distance(&target) < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex(&mut rng, 2, 2);
        let b = random_complex(&mut rng, 3, 3);
        let layout = TensorLayout::new(vec![2, 3]).unwrap();
        let ab = kron(&a, &b).unwrap();
        let t = partial_transpose(&ab, &layout, &[0]).unwrap();
        assert!(t.distance(&kron(&a.transpose(), &b).unwrap()) < 1e-14);
        assert_eq!(partial_transpose(&t, &layout, &[0]).unwrap().data(), ab.data());
        let full = partial_transpose(&ab, &layout, &[0, 1]).unwrap();
        assert_eq!(full.data(), ab.transpose().data());
    }

    #[test]
    fn layout_mismatch_is_reported() {
        let m = FieldMatrix::identity(Field::Real, 4);
        let bad = TensorLayout::new(vec![3, 2]).unwrap();
        assert!(partial_trace(&m, &bad, &[0]).is_err());
        assert!(partial_transpose(&m, &bad, &[0]).is_err());
        let ok = TensorLayout::new(vec![2, 2]).unwrap();
        assert!(partial_trace(&m, &ok, &[]).is_err());
        assert!(partial_trace(&m, &ok, &[2]).is_err());
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap_operator(1).re(0, 0), 1.0);
        let v = swap_operator(2);
        assert_eq!(v.trace().re, 2.0);
        let v2 = &v * &v;
        assert_eq!(v2, {
            let mut i = FieldMatrix::identity(Field::Real, 4);
            i.set_symmetry(Symmetry::General);
            i
        });
    }

    #[test]
    fn swap_exchanges_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 3;
        let x: Vec<C64> = (0..d).map(|_| C64::new(rng.random(), rng.random())).collect();
        let y: Vec<C64> = (0..d).map(|_| C64::new(rng.random(), rng.random())).collect();
        let xy: Vec<C64> = (0..d * d).map(|i| x[i / d] * y[i % d]).collect();
        let yx: Vec<C64> = (0..d * d).map(|i| y[i / d] * x[i % d]).collect();
        let out = swap_operator(d).mat_vec(&xy);
        for (a, b) in out.iter().zip(&yx) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn symmetric_projector_traces() {
        assert_eq!(symmetric_projector(2, 2).unwrap().trace().re.round(), 3.0);
        assert_eq!(symmetric_projector(3, 3).unwrap().trace().re.round(), 10.0);
        let p1 = symmetric_projector(3, 1).unwrap();
        assert!(p1.distance(&FieldMatrix::identity(Field::Real, 3)) < 1e-15);
    }

    #[test]
    fn symmetric_projector_is_average_of_permutations() {
        // N = 2: P = (1 + V)/2
        for d in 1..=3 {
            let p = symmetric_projector(d, 2).unwrap();
            let avg = (&FieldMatrix::identity(Field::Real, d * d) + &swap_operator(d)).scale(0.5);
            assert!(p.distance(&avg) < 1e-14);
        }
    }

    #[test]
    fn symmetric_basis_examples() {
        let b = symmetric_basis(2, 2).unwrap();
        assert_eq!(b.len(), 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(b[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert!((b[1][1] - s).abs() < 1e-15 && (b[1][2] - s).abs() < 1e-15);
        assert_eq!(b[2], vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(symmetric_basis(4, 2).unwrap().len(), 10);
        let b = symmetric_basis(3, 3).unwrap();
        for (i, u) in b.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                let g: f64 = u.iter().zip(v).map(|(a, c)| a * c).sum();
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn size_budget_is_enforced() {
        assert!(matches!(symmetric_basis_sparse(11, 6), Err(Error::SizeBudget(_))));
        assert!(symmetric_projector(100, 2).is_err());
    }

    #[test]
    fn hermitian_basis_is_orthogonal_and_complete() {
        for (field, d, count) in [(Field::Complex, 3, 9), (Field::Real, 3, 6)] {
            let b = hermitian_basis(d, field);
            assert_eq!(b.len(), count);
            for (i, x) in b.iter().enumerate() {
                assert!(x.is_hermitian());
                for (j, y) in b.iter().enumerate() {
                    let g = x.inner(y);
                    if i != j {
                        assert!(g.abs() < 1e-14);
                    } else {
                        assert!(g > 0.5);
                    }
                }
            }
        }
    }
}
