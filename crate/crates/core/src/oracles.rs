//! Independent reference values: exact enumeration over sign vectors and
//! multi-start local ascent over pure states. Ascent results are heuristic
//! lower bounds (for maximization) and never certify anything.

use crate::error::{Error, Result};
use crate::matrix::{pinv_solve, Field, FieldMatrix, C64};
use crate::problem::{RankSdp, Relation, Sense};
use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Largest number of sign variables [`enumerate_boolean`] accepts.
pub const MAX_BOOLEAN_VARS: usize = 24;
/// Constraint violation accepted for a sampled point.
pub const SAMPLE_FEAS_TOL: f64 = 1e-6;
/// Quadratic-penalty weights, applied in order.
pub const PENALTY_SCHEDULE: [f64; 3] = [1e2, 1e4, 1e6];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Enumeration,
    GridSearch,
    MultiStartAscent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Signs(Vec<i8>),
    State(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Best value found; NaN (serialized as `null`) when no feasible point was found.
    #[serde(with = "nullable")]
    pub value: f64,
    pub witness: Option<Witness>,
    pub method: Method,
    pub evaluations: u64,
}

impl OracleResult {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn better(sense: Sense, a: f64, b: f64) -> bool {
    sense.sign() * (a - b) > 0.0
}

fn signs_of(bits: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// Exact optimum of `f` over `{±1}^n`. Ties keep the assignment with the
/// smallest index, where bit `i` set means `x_i = −1`.
pub fn enumerate_boolean<F>(n: usize, sense: Sense, f: F) -> Result<OracleResult>
where
    F: Fn(&[i8]) -> f64 + Sync,
{
    if n > MAX_BOOLEAN_VARS {
        return Err(Error::SizeBudget(format!("{n} sign variables exceed {MAX_BOOLEAN_VARS}")));
    }
    let total = 1u64 << n;
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(total.div_ceil(4096) as usize).max(1);
    let chunk = total.div_ceil(workers as u64);
    let best = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let f = &f;
                s.spawn(move || {
                    let mut best: Option<(f64, u64)> = None;
                    let mut x = vec![1i8; n];
                    for bits in w * chunk..((w + 1) * chunk).min(total) {
                        for (i, xi) in x.iter_mut().enumerate() {
                            *xi = if bits >> i & 1 == 1 { -1 } else { 1 };
                        }
                        let v = f(&x);
                        if best.is_none_or(|(b, _)| better(sense, v, b)) {
                            best = Some((v, bits));
                        }
                    }
                    best
                })
            })
            .collect();
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("enumeration worker panicked"))
            .fold(None, |acc: Option<(f64, u64)>, (v, b)| match acc {
                Some((av, _)) if !better(sense, v, av) => acc,
                _ => Some((v, b)),
            })
    });
    let (value, bits) = best.expect("at least one assignment");
    Ok(OracleResult { value, witness: Some(Witness::Signs(signs_of(bits, n))), method: Method::Enumeration, evaluations: total })
}

/// Settings of the pure-state samplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n_starts: usize,
    pub seed: u64,
    /// Ascent iterations per penalty weight.
    pub max_iters: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { n_starts: 64, seed: 0, max_iters: 400 }
    }
}

fn dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn norm(a: &[C64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &[C64], s: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(a, b)| a + b * s).collect()
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, field: Field) -> Vec<C64> {
    let v = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if field == Field::Complex { rng.sample(StandardNormal) } else { 0.0 };
            C64::new(re, im)
        })
        .collect();
    normalized(v)
}

fn outer(field: Field, psi: &[C64]) -> FieldMatrix {
    FieldMatrix::outer(field, psi)
}

/// Constraint `g(ψ) = 0` (equality) or `g(ψ) ≤ 0` with gradient `∇g`.
struct Residual {
    value: f64,
    grad: Vec<C64>,
    equality: bool,
}

impl Residual {
    fn violation(&self) -> f64 {
        if self.equality {
            self.value.abs()
        } else {
            self.value.max(0.0)
        }
    }
}

/// Residuals of the problem's constraints at `ψ`, excluding normalization.
fn residuals(p: &RankSdp, psi: &[C64]) -> Vec<Residual> {
    let mut out: Vec<Residual> = p
        .constraints
        .iter()
        .map(|c| {
            let cp = c.coeff.mat_vec(psi);
            Residual { value: dot(psi, &cp) - c.target, grad: cp.iter().map(|v| v * 2.0).collect(), equality: c.relation == Relation::Eq }
        })
        .collect();
    if p.lmi.is_empty() {
        return out;
    }
    let rho = outer(p.field, psi);
    for l in &p.lmi {
        let slack = l.bound.try_sub(&l.apply(&rho)).expect("shapes agree");
        let (vals, vecs) = slack.eigh();
        let w = vecs.column(0);
        let m = l.out_dim();
        // ⟨w|Λ(ψψ†)|w⟩ = ⟨ψ|M_w|ψ⟩ with M_w = Σ w̄_p w_q M_pq
        let mut mw = vec![C64::new(0.0, 0.0); psi.len()];
        for a in 0..m {
            for b in 0..m {
                let coef = w[a].conj() * w[b];
                if coef.norm() == 0.0 {
                    continue;
                }
                for (o, v) in mw.iter_mut().zip(l.maps[a][b].mat_vec(psi)) {
                    *o += coef * v;
                }
            }
        }
        out.push(Residual { value: -vals[0], grad: mw.iter().map(|v| v * 2.0).collect(), equality: false });
    }
    out
}

struct Ascent<'a> {
    p: &'a RankSdp,
    sign: f64,
    evaluations: u64,
}

impl Ascent<'_> {
    fn objective(&mut self, psi: &[C64]) -> f64 {
        self.evaluations += 1;
        self.p.objective.quad_form(psi)
    }

    fn penalized(&mut self, psi: &[C64], mu: f64) -> f64 {
        let pen: f64 = residuals(self.p, psi).iter().map(|r| r.violation().powi(2)).sum();
        self.sign * self.objective(psi) - mu * pen
    }

    fn penalized_grad(&self, psi: &[C64], mu: f64) -> Vec<C64> {
        let mut g: Vec<C64> = self.p.objective.mat_vec(psi).iter().map(|v| v * (2.0 * self.sign)).collect();
        for r in residuals(self.p, psi) {
            let v = r.violation() * if r.value < 0.0 { -1.0 } else { 1.0 };
            if v != 0.0 {
                g = axpy(&g, -2.0 * mu * v, &r.grad);
            }
        }
        g
    }

    /// Gradient ascent on the sphere with step halving.
    fn penalty_phase(&mut self, mut psi: Vec<C64>, mu: f64, iters: usize) -> Vec<C64> {
        let mut f = self.penalized(&psi, mu);
        let mut step = 1.0 / (1.0 + mu);
        for _ in 0..iters {
            let g = self.penalized_grad(&psi, mu);
            let mut moved = false;
            while step > 1e-14 {
                let cand = normalized(axpy(&psi, step, &g));
                let fc = self.penalized(&cand, mu);
                if fc > f {
                    let gain = fc - f;
                    psi = cand;
                    f = fc;
                    step *= 2.0;
                    moved = gain > 1e-15 * (1.0 + f.abs());
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        psi
    }

    /// Active constraints at `ψ` (equalities, violated or nearly active
    /// inequalities, and normalization) as rows `(value, gradient)`.
    fn active(&self, psi: &[C64], slack: f64) -> Vec<(f64, Vec<C64>)> {
        let mut rows: Vec<(f64, Vec<C64>)> = residuals(self.p, psi)
            .into_iter()
            .filter(|r| r.equality || r.value > -slack)
            .map(|r| (if r.equality { r.value } else { r.value.max(0.0) }, r.grad))
            .collect();
        rows.push((dot(psi, psi) - 1.0, psi.iter().map(|v| v * 2.0).collect()));
        rows
    }

    /// Minimal-norm Gauss–Newton steps onto the constraint set.
    fn restore(&self, mut psi: Vec<C64>) -> Option<Vec<C64>> {
        for _ in 0..60 {
            let rows = self.active(&psi, 0.0);
            let worst = rows.iter().map(|r| r.0.abs()).fold(0.0, f64::max);
            if worst <= 1e-12 {
                return Some(psi);
            }
            let gram = Mat::from_fn(rows.len(), rows.len(), |i, j| dot(&rows[i].1, &rows[j].1));
            let rhs: Vec<f64> = rows.iter().map(|r| -r.0).collect();
            let lam = pinv_solve(&gram, &rhs).ok()?;
            for (l, r) in lam.iter().zip(&rows) {
                psi = axpy(&psi, *l, &r.1);
            }
        }
        (self.max_violation(&psi) <= SAMPLE_FEAS_TOL).then_some(psi)
    }

    fn max_violation(&self, psi: &[C64]) -> f64 {
        self.p.max_violation(&outer(self.p.field, psi))
    }

    /// Ascent along the tangent space of the active constraints, followed
    /// by restoration, from a feasible point.
    fn projected_phase(&mut self, mut psi: Vec<C64>, iters: usize) -> Vec<C64> {
        let mut f = self.sign * self.objective(&psi);
        let mut step = 0.1;
        for _ in 0..iters {
            let rows = self.active(&psi, 1e-7);
            let mut g: Vec<C64> = self.p.objective.mat_vec(&psi).iter().map(|v| v * (2.0 * self.sign)).collect();
            let gram = Mat::from_fn(rows.len(), rows.len(), |i, j| dot(&rows[i].1, &rows[j].1));
            let rhs: Vec<f64> = rows.iter().map(|r| dot(&r.1, &g)).collect();
            let Ok(lam) = pinv_solve(&gram, &rhs) else { break };
            for (l, r) in lam.iter().zip(&rows) {
                g = axpy(&g, -l, &r.1);
            }
            if norm(&g) < 1e-12 {
                break;
            }
            let mut moved = false;
            while step > 1e-12 {
                if let Some(cand) = self.restore(axpy(&psi, step, &g)) {
                    let fc = self.sign * self.objective(&cand);
                    if fc > f && self.max_violation(&cand) <= SAMPLE_FEAS_TOL {
                        moved = fc - f > 1e-14 * (1.0 + f.abs());
                        psi = cand;
                        f = fc;
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        psi
    }
}

fn run_starts<T: Send>(n_starts: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(n_starts).max(1);
    let mut out: Vec<(usize, T)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                s.spawn(move || (w..n_starts).step_by(workers).map(|i| (i, job(i))).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sampling worker panicked")).collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, t)| t).collect()
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// Best feasible pure state found by multi-start penalized ascent,
/// Gauss–Newton restoration and projected ascent. Deterministic given the
/// seed. A result without witness means no start reached feasibility.
pub fn sample_pure_states(p: &RankSdp, cfg: &SampleConfig) -> Result<OracleResult> {
    if p.integer_rank() != Some(1) {
        return Err(Error::Invalid("pure-state sampling needs rank bound 1".into()));
    }
    if !p.normalized {
        return Err(Error::Invalid("pure-state sampling needs a trace-normalized problem".into()));
    }
    let runs = run_starts(cfg.n_starts, |start| {
        let mut rng = start_rng(cfg.seed, start);
        let mut a = Ascent { p, sign: p.sense.sign(), evaluations: 0 };
        let mut psi = random_vector(&mut rng, p.dim_n, p.field);
        for mu in PENALTY_SCHEDULE {
            psi = a.penalty_phase(psi, mu, cfg.max_iters);
        }
        let found = a.restore(psi).map(|psi| a.projected_phase(psi, cfg.max_iters));
        let out = found.filter(|psi| a.max_violation(psi) <= SAMPLE_FEAS_TOL).map(|psi| {
            let v = p.objective.quad_form(&psi);
            (v, psi)
        });
        (out, a.evaluations)
    });
    let evaluations = runs.iter().map(|r| r.1).sum();
    let mut best: Option<(f64, Vec<C64>)> = None;
    for (v, psi) in runs.into_iter().filter_map(|r| r.0) {
        if best.as_ref().is_none_or(|(b, _)| better(p.sense, v, *b)) {
            best = Some((v, psi));
        }
    }
    Ok(match best {
        Some((value, psi)) => {
            OracleResult { value, witness: Some(Witness::State(psi)), method: Method::MultiStartAscent, evaluations }
        }
        None => OracleResult { value: f64::NAN, witness: None, method: Method::MultiStartAscent, evaluations },
    })
}

/// Closest unitary `A(A†A)^{-1/2}`.
fn polar(a: &FieldMatrix) -> Option<FieldMatrix> {
    let inv = a.adjoint().matmul(a).ok()?.psd_sqrt().pd_inverse().ok()?;
    a.matmul(&inv).ok()
}

/// Largest `⟨ψ|W|ψ⟩` found over maximally entangled `ψ ∈ ℂⁿ ⊗ ℂⁿ`,
/// parameterized as `ψ = vec(U)/√n` with `U` unitary; ascent steps are
/// projected back with the polar decomposition.
pub fn sample_maximally_entangled(w: &FieldMatrix, n: usize, cfg: &SampleConfig) -> Result<OracleResult> {
    if w.nrows() != n * n || w.ncols() != n * n {
        return Err(Error::Dimension(format!("operator must be {0}x{0}", n * n)));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let vec_of = |u: &FieldMatrix| u.data().iter().map(|v| v * scale).collect::<Vec<C64>>();
    let runs = run_starts(cfg.n_starts, |start| {
        let mut rng = start_rng(cfg.seed, start);
        let mut evals = 0u64;
        let g0 = FieldMatrix::from_fn(Field::Complex, n, n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let Some(mut u) = polar(&g0) else { return (None, evals) };
        let mut f = w.quad_form(&vec_of(&u));
        evals += 1;
        let mut step = 1.0;
        for _ in 0..cfg.max_iters {
            let grad = w.mat_vec(&vec_of(&u));
            let gm = FieldMatrix::from_fn(Field::Complex, n, n, |i, j| grad[i * n + j] * (2.0 * scale));
            let mut moved = false;
            while step > 1e-14 {
                if let Some(cand) = u.try_add(&gm.scale(step)).ok().and_then(|a| polar(&a)) {
                    let fc = w.quad_form(&vec_of(&cand));
                    evals += 1;
                    if fc > f {
                        moved = fc - f > 1e-15 * (1.0 + f.abs());
                        u = cand;
                        f = fc;
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (Some((f, vec_of(&u))), evals)
    });
    let evaluations = runs.iter().map(|r| r.1).sum();
    let mut best: Option<(f64, Vec<C64>)> = None;
    for (v, psi) in runs.into_iter().filter_map(|r| r.0) {
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, psi));
        }
    }
    Ok(match best {
        Some((value, psi)) => {
            OracleResult { value, witness: Some(Witness::State(psi)), method: Method::MultiStartAscent, evaluations }
        }
        None => OracleResult { value: f64::NAN, witness: None, method: Method::MultiStartAscent, evaluations },
    })
}
