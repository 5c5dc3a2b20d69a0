//! Matrices whose entries are affine functions of real parameters, and the
//! orbit construction that ties entries together under linear symmetries.

use crate::matrix::{Field, FieldMatrix, TensorLayout, C64};

/// Coefficients below this magnitude are dropped.
pub(crate) const DROP: f64 = 1e-14;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `c + Σ coef·y[param]` with complex coefficients and real parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Affine {
    pub c: C64,
    /// Sorted by parameter, no repeats.
    pub terms: Vec<(usize, C64)>,
}

impl Affine {
    #[cfg(test)]
    pub fn param(p: usize, coef: C64) -> Self {
        Affine { c: zero(), terms: vec![(p, coef)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.c.norm() <= DROP
    }

    pub fn eval(&self, y: &[f64]) -> C64 {
        self.terms.iter().fold(self.c, |acc, &(p, v)| acc + v * y[p])
    }

    pub fn re(&self) -> RealAffine {
        RealAffine::from_parts(self.c.re, self.terms.iter().map(|&(p, v)| (p, v.re)))
    }

    pub fn im(&self) -> RealAffine {
        RealAffine::from_parts(self.c.im, self.terms.iter().map(|&(p, v)| (p, v.im)))
    }

    pub fn has_imaginary(&self) -> bool {
        self.c.im.abs() > DROP || self.terms.iter().any(|(_, v)| v.im.abs() > DROP)
    }
}

/// Real part of an [`Affine`].
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct RealAffine {
    pub c: f64,
    pub terms: Vec<(usize, f64)>,
}

impl RealAffine {
    fn from_parts(c: f64, terms: impl Iterator<Item = (usize, f64)>) -> Self {
        RealAffine { c, terms: terms.filter(|(_, v)| v.abs() > DROP).collect() }
    }

    pub fn shifted(mut self, by: f64) -> Self {
        self.c += by;
        self
    }
}

/// Dense scratch space for summing affine expressions.
#[derive(Default)]
pub(crate) struct Acc {
    vals: Vec<C64>,
    seen: Vec<bool>,
    touched: Vec<usize>,
    c: C64,
}

impl Acc {
    pub fn add(&mut self, a: &Affine, s: C64) {
        self.c += a.c * s;
        for &(p, v) in &a.terms {
            if p >= self.vals.len() {
                self.vals.resize(p + 1, zero());
                self.seen.resize(p + 1, false);
            }
            if !self.seen[p] {
                self.seen[p] = true;
                self.touched.push(p);
            }
            self.vals[p] += v * s;
        }
    }

    pub fn add_const(&mut self, c: C64) {
        self.c += c;
    }

    pub fn take(&mut self) -> Affine {
        self.touched.sort_unstable();
        let mut terms = Vec::with_capacity(self.touched.len());
        for &p in &self.touched {
            let v = self.vals[p];
            if v.norm() > DROP {
                terms.push((p, v));
            }
            self.vals[p] = zero();
            self.seen[p] = false;
        }
        self.touched.clear();
        let c = std::mem::replace(&mut self.c, zero());
        Affine { c: if c.norm() > DROP { c } else { zero() }, terms }
    }
}

/// Square matrix of affine entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LinMat {
    pub dim: usize,
    pub e: Vec<Affine>,
}

impl LinMat {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Affine) -> Self {
        let mut e = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                e.push(f(i, j));
            }
        }
        LinMat { dim, e }
    }

    pub fn at(&self, i: usize, j: usize) -> &Affine {
        &self.e[i * self.dim + j]
    }

    /// `out(i, j) = self(f(i, j))`.
    pub fn permuted(&self, f: impl Fn(usize, usize) -> (usize, usize)) -> Self {
        LinMat::from_fn(self.dim, |i, j| {
            let (a, b) = f(i, j);
            self.at(a, b).clone()
        })
    }

    /// `Σ s·M` over the given parts (all of equal dimension).
    pub fn combine(parts: &[(&LinMat, f64)]) -> Self {
        let dim = parts[0].0.dim;
        let mut acc = Acc::default();
        LinMat::from_fn(dim, |i, j| {
            for (m, s) in parts {
                acc.add(m.at(i, j), C64::new(*s, 0.0));
            }
            acc.take()
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        LinMat::combine(&[(self, s)])
    }

    /// `Wᵀ M W` for an isometry `W` whose columns are given sparsely with
    /// real coefficients.
    pub fn compress(&self, basis: &[Vec<(usize, f64)>]) -> Self {
        let mut acc = Acc::default();
        LinMat::from_fn(basis.len(), |p, q| {
            for &(x, a) in &basis[p] {
                for &(x2, b) in &basis[q] {
                    acc.add(self.at(x, x2), C64::new(a * b, 0.0));
                }
            }
            acc.take()
        })
    }

    pub fn trace(&self) -> Affine {
        let mut acc = Acc::default();
        for i in 0..self.dim {
            acc.add(self.at(i, i), C64::new(1.0, 0.0));
        }
        acc.take()
    }

    /// `Tr(O·M)`.
    pub fn pair(&self, o: &FieldMatrix) -> Affine {
        let mut acc = Acc::default();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = o.get(i, j);
                if v.norm() > DROP {
                    acc.add(self.at(j, i), v);
                }
            }
        }
        acc.take()
    }

    /// `Tr_A[(O ⊗ 𝟙)M]` for `M` on `ℂ^da ⊗ ℂ^db` and `O` on `ℂ^da`.
    pub fn apply_first(&self, da: usize, db: usize, o: &FieldMatrix) -> Self {
        let nz: Vec<(usize, usize, C64)> = (0..da)
            .flat_map(|a| (0..da).map(move |a2| (a, a2)))
            .map(|(a, a2)| (a, a2, o.get(a, a2)))
            .filter(|(_, _, v)| v.norm() > DROP)
            .collect();
        let mut acc = Acc::default();
        LinMat::from_fn(db, |b, b2| {
            for &(a, a2, v) in &nz {
                acc.add(self.at(a2 * db + b, a * db + b2), v);
            }
            acc.take()
        })
    }

    /// Partial trace keeping the listed factors of `layout`.
    pub fn partial_trace(&self, layout: &TensorLayout, keep: &[usize]) -> Self {
        let dims = &layout.factor_dims;
        let kept_dims: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
        let out_dim: usize = kept_dims.iter().product();
        let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
        let digits: Vec<Vec<usize>> = (0..self.dim).map(|x| layout.digits(x)).collect();
        let project = |d: &[usize]| keep.iter().zip(&kept_dims).fold(0, |acc, (&f, &kd)| acc * kd + d[f]);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); out_dim * out_dim];
        for x in 0..self.dim {
            for x2 in 0..self.dim {
                if traced.iter().all(|&f| digits[x][f] == digits[x2][f]) && !self.at(x, x2).is_zero() {
                    buckets[project(&digits[x]) * out_dim + project(&digits[x2])].push(x * self.dim + x2);
                }
            }
        }
        let mut acc = Acc::default();
        let e = buckets
            .iter()
            .map(|cells| {
                for &cell in cells {
                    acc.add(&self.e[cell], C64::new(1.0, 0.0));
                }
                acc.take()
            })
            .collect();
        LinMat { dim: out_dim, e }
    }

    pub fn sub(&self, idx: &[usize]) -> Self {
        LinMat::from_fn(idx.len(), |i, j| self.at(idx[i], idx[j]).clone())
    }

    pub fn eval(&self, y: &[f64], field: Field) -> FieldMatrix {
        FieldMatrix::from_fn(field, self.dim, self.dim, |i, j| {
            let v = self.at(i, j).eval(y);
            match field {
                Field::Real => C64::new(v.re, 0.0),
                Field::Complex => v,
            }
        })
    }

    pub fn has_imaginary(&self) -> bool {
        self.e.iter().any(Affine::has_imaginary)
    }
}

/// Linear relation generating orbits: maps a cell to a cell whose value is
/// equal (or conjugate, when the flag is set).
pub(crate) type Generator<'a> = &'a dyn Fn(usize, usize) -> (usize, usize, bool);

struct Orbits {
    parent: Vec<u32>,
    /// Parity to the parent: `value = conj^flip(parent value)`.
    flip: Vec<bool>,
    real: Vec<bool>,
    zero: Vec<bool>,
}

impl Orbits {
    fn new(n: usize) -> Self {
        Orbits { parent: (0..n as u32).collect(), flip: vec![false; n], real: vec![false; n], zero: vec![false; n] }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] as usize != cur {
            path.push(cur);
            cur = self.parent[cur] as usize;
        }
        let mut acc = false;
        for &node in path.iter().rev() {
            acc ^= self.flip[node];
            self.flip[node] = acc;
            self.parent[node] = cur as u32;
        }
        (cur, if path.is_empty() { false } else { self.flip[x] })
    }

    fn union(&mut self, a: usize, b: usize, conj: bool) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        let rel = pa ^ conj ^ pb;
        if ra == rb {
            if rel {
                self.real[ra] = true;
            }
            return;
        }
        self.parent[ra] = rb as u32;
        self.flip[ra] = rel;
        self.real[rb] |= self.real[ra];
        self.zero[rb] |= self.zero[ra];
    }
}

/// Matrix variable of dimension `dim` whose entries are tied by the
/// generators; cells marked `forbidden` and everything tied to them vanish.
/// New parameters are numbered from `*next` in order of first appearance.
pub(crate) fn variable(
    dim: usize,
    field: Field,
    gens: &[Generator],
    forbidden: &dyn Fn(usize, usize) -> bool,
    next: &mut usize,
) -> LinMat {
    let cells = dim * dim;
    let mut orb = Orbits::new(cells);
    for i in 0..dim {
        for j in 0..dim {
            let cell = i * dim + j;
            if forbidden(i, j) {
                orb.zero[cell] = true;
            }
            for g in gens {
                let (a, b, conj) = g(i, j);
                orb.union(cell, a * dim + b, conj);
            }
        }
    }
    let mut ids: Vec<Option<(usize, Option<usize>)>> = vec![None; cells];
    let mut e = Vec::with_capacity(cells);
    for cell in 0..cells {
        let (root, parity) = orb.find(cell);
        if orb.zero[root] {
            e.push(Affine::default());
            continue;
        }
        let (re, im) = *ids[root].get_or_insert_with(|| {
            let re = *next;
            *next += 1;
            let im = if field == Field::Complex && !orb.real[root] {
                *next += 1;
                Some(re + 1)
            } else {
                None
            };
            (re, im)
        });
        let mut terms = vec![(re, C64::new(1.0, 0.0))];
        if let Some(im) = im {
            terms.push((im, C64::new(0.0, if parity { -1.0 } else { 1.0 })));
        }
        e.push(Affine { c: zero(), terms });
    }
    LinMat { dim, e }
}

/// Hermitian (or symmetric) generator.
pub(crate) fn hermitian(i: usize, j: usize) -> (usize, usize, bool) {
    (j, i, true)
}

/// Orthonormal bases of the symmetric and antisymmetric subspaces of
/// `ℂⁿ ⊗ ℂⁿ`, indexed `a·n + b`.
pub(crate) fn sym_antisym_bases(n: usize) -> (Vec<Vec<(usize, f64)>>, Vec<Vec<(usize, f64)>>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut sym = Vec::new();
    let mut anti = Vec::new();
    for a in 0..n {
        sym.push(vec![(a * n + a, 1.0)]);
        for b in a + 1..n {
            sym.push(vec![(a * n + b, s), (b * n + a, s)]);
            anti.push(vec![(a * n + b, s), (b * n + a, -s)]);
        }
    }
    (sym, anti)
}
