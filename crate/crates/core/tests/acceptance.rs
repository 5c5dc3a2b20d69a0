//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rankhier::applications::{
    boolean_least_squares, fidelity_fixture_state, lovasz_theta, maxcut_bound, maxcut_bruteforce, orthonormal_rep_check,
    pseudo_boolean_bound, pseudo_boolean_bruteforce, unfaithfulness_bound, unfaithfulness_check, Bound, Exclusion, Graph, Verdict,
};
use rankhier::hierarchy::{build, rank_parameter_sweep, BuildOptions, LevelSpec, MONOTONE_TOL};
use rankhier::matrix::{
    max_entangled_projector, partial_trace, partial_transpose, swap_operator, symmetric_projector, symmetric_subspace_dim, Field,
    FieldMatrix, TensorLayout, C64,
};
use rankhier::problem::{LinearFunctional, RankSdp, Sense};
use rankhier::solver::{SolverConfig, Status};
use std::time::Instant;

const FIXTURE_TOL: f64 = 5e-4;
const XI1_FIXTURE: f64 = 0.25063;
const XI2T_FIXTURE: f64 = 0.24888;
const THETA_TOL: f64 = 1e-5;
const THETA_GRAPH: &str = "Jzl[kWq_YE?";
const SANDWICH_TOL: f64 = 1e-6;
const EXACT_ROUNDING: f64 = 1e-5;
const LAW_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-12;
const SOUNDNESS_TOL: f64 = 1e-9;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Bound that a rigorous relaxation must respect, recorded for the
/// soundness criterion.
struct Check {
    label: String,
    bound: Bound,
    /// Exact optimum of the original problem, when known.
    exact: Option<f64>,
}

#[derive(Default)]
struct Corpus(Vec<Check>);

impl Corpus {
    fn push(&mut self, label: impl Into<String>, bound: &Bound, exact: Option<f64>) {
        self.0.push(Check { label: label.into(), bound: bound.clone(), exact });
    }

    /// Labels of entries whose certified bound is missing, falls short of
    /// the solver value (weak duality) or of the exact optimum.
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.0 {
            let s = c.bound.sense.sign();
            let Some(cert) = c.bound.certified else {
                out.push(format!("{}: no certified bound ({:?})", c.label, c.bound.status));
                continue;
            };
            if s * (cert - c.bound.value) < -SOUNDNESS_TOL {
                out.push(format!("{}: certified {cert} vs value {}", c.label, c.bound.value));
            }
            if let Some(e) = c.exact {
                if s * (cert - e) < -SOUNDNESS_TOL {
                    out.push(format!("{}: certified {cert} vs exact {e}", c.label));
                }
            }
        }
        out
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn unfaithfulness_regression() -> Outcome {
    let rho = fidelity_fixture_state();
    let v = unfaithfulness_check(&rho, &cfg(), None).expect("level 2");
    let xi1 = unfaithfulness_bound(&rho, &LevelSpec::level1(), &cfg()).expect("level 1");
    let pass = (v.xi2t - XI2T_FIXTURE).abs() <= FIXTURE_TOL
        && (xi1.value - XI1_FIXTURE).abs() <= FIXTURE_TOL
        && v.verdict == Verdict::Unfaithful;
    Outcome { pass, detail: format!("xi2T(certified)={:.5} xi1={:.5} verdict={:?}", v.xi2t, xi1.value, v.verdict) }
}

fn representation_exclusion() -> Outcome {
    let g = Graph::parse_graph6(THETA_GRAPH).expect("graph6");
    let theta = lovasz_theta(&g, &cfg()).expect("theta");
    let mut pass = (theta.value - 4.0).abs() <= THETA_TOL;
    let mut detail = format!("theta={:.8} ({:?})", theta.value, theta.status);
    for field in [Field::Real, Field::Complex] {
        let r = orthonormal_rep_check(&g, 4, field, &cfg()).expect("orthrep");
        pass &= r.verdict == Exclusion::ExcludedAtLevel2;
        detail += &format!(" {field:?}:{:?}(margin {:.2e})", r.verdict, r.margin.certified.unwrap_or(r.margin.margin));
    }
    Outcome { pass, detail }
}

fn maxcut_sandwich(corpus: &mut Corpus) -> Outcome {
    let (mut sandwich, mut exact) = (0, 0);
    let total = 100;
    for seed in 0..total as u64 {
        let n = 3 + (seed as usize % 8);
        let g = Graph::erdos_renyi(n, 0.5, seed);
        let brute = maxcut_bruteforce(&g).expect("brute") as f64;
        let xi1 = maxcut_bound(&g, &LevelSpec::level1(), &cfg()).expect("level 1");
        let xi2 = maxcut_bound(&g, &LevelSpec::reduced(), &cfg()).expect("level 2");
        corpus.push(format!("maxcut seed {seed} level 1"), &xi1, Some(brute));
        corpus.push(format!("maxcut seed {seed} level 2"), &xi2, Some(brute));
        if brute <= xi2.value + SANDWICH_TOL && xi2.value <= xi1.value + SANDWICH_TOL {
            sandwich += 1;
        }
        if ((xi2.value / EXACT_ROUNDING).round() * EXACT_ROUNDING - brute).abs() < EXACT_ROUNDING / 2.0 {
            exact += 1;
        }
    }
    Outcome { pass: sandwich == total && exact >= 95, detail: format!("sandwich {sandwich}/{total}, xi2 exact {exact}/{total}") }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn least_squares_statistic(corpus: &mut Corpus) -> Outcome {
    let total = 200;
    let (m, d) = (8, 6);
    let (mut r1, mut r2) = (0.0, 0.0);
    for seed in 0..total as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = FieldMatrix::real_fn(m, d, |_, _| gaussian(&mut rng));
        let b: Vec<f64> = (0..m).map(|_| gaussian(&mut rng)).collect();
        let q = a.transpose().matmul(&a).expect("shapes");
        let c: Vec<f64> = (0..d).map(|j| -2.0 * (0..m).map(|r| a.re(r, j) * b[r]).sum::<f64>()).collect();
        let exact = pseudo_boolean_bruteforce(&q, &c, Sense::Min).expect("brute").value + b.iter().map(|v| v * v).sum::<f64>();
        let l1 = boolean_least_squares(&a, &b, &LevelSpec::level1(), &cfg()).expect("level 1");
        let l2 = boolean_least_squares(&a, &b, &LevelSpec::reduced(), &cfg()).expect("level 2");
        corpus.push(format!("least squares seed {seed} level 1"), &l1.bound, Some(exact));
        corpus.push(format!("least squares seed {seed} level 2"), &l2.bound, Some(exact));
        r1 += l1.bound.value / exact;
        r2 += l2.bound.value / exact;
    }
    let (r1, r2) = (r1 / total as f64, r2 / total as f64);
    Outcome { pass: r2 >= 0.99 && r1 <= 0.80, detail: format!("mean xi2/xi={r2:.5} mean xi1/xi={r1:.5}") }
}

fn random_herm(rng: &mut ChaCha8Rng, field: Field, n: usize) -> FieldMatrix {
    FieldMatrix::from_fn(field, n, n, |_, _| {
        let im = if field == Field::Complex { gaussian(rng) } else { 0.0 };
        C64::new(gaussian(rng), im)
    })
    .hermitian_part()
}

/// Random objective with one equality satisfied by a random state.
fn random_instance(seed: u64, field: Field, n: usize, k: f64) -> RankSdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_herm(&mut rng, field, n);
    let c = random_herm(&mut rng, field, n);
    let h = random_herm(&mut rng, field, n);
    let g = h.matmul(&h).expect("square");
    let rho = g.scale(1.0 / g.trace().re);
    let t = c.inner(&rho);
    RankSdp::new(field, x, Sense::Max)
        .and_then(|p| p.with_rank_bound(k))
        .and_then(|p| p.with_constraint(LinearFunctional::eq(c, t)))
        .expect("valid instance")
}

fn solve_value(p: &RankSdp, spec: &LevelSpec, corpus: &mut Corpus, label: &str) -> f64 {
    let start = Instant::now();
    let sol = build(p, spec, &BuildOptions::default()).and_then(|r| r.solve(&cfg())).expect("solve");
    let bound = Bound {
        level: spec.label(),
        k: p.rank_bound,
        sense: p.sense,
        value: sol.primal_value,
        certified: sol.certified_bound,
        status: sol.status,
        seconds: start.elapsed().as_secs_f64(),
    };
    corpus.push(format!("{label} level {}", spec.label()), &bound, None);
    sol.primal_value
}

fn hierarchy_laws(corpus: &mut Corpus) -> Outcome {
    let shapes = [(Field::Real, 2, 1.0), (Field::Complex, 2, 1.0), (Field::Real, 3, 2.0), (Field::Complex, 3, 1.0), (Field::Complex, 2, 2.0)];
    let total = 25;
    let (mut chain, mut reduced_eq, mut sweep_ok) = (0, 0, 0);
    let mut worst = 0.0f64;
    for i in 0..total {
        let (field, n, k) = shapes[i % shapes.len()];
        let p = random_instance(1000 + i as u64, field, n, k);
        let label = format!("law instance {i}");
        let l1 = solve_value(&p, &LevelSpec::level1(), corpus, &label);
        let l2 = solve_value(&p, &LevelSpec::reduced(), corpus, &label);
        let l2x = solve_value(&p, &LevelSpec::level_n(2), corpus, &label);
        let l3 = solve_value(&p, &LevelSpec::level_n(3), corpus, &label);
        if l1 - l2 >= -LAW_TOL && l2 - l3 >= -LAW_TOL {
            chain += 1;
        }
        worst = worst.max((l2 - l2x).abs());
        if (l2 - l2x).abs() <= LAW_TOL {
            reduced_eq += 1;
        }
        let ks: Vec<f64> = (2..=2 * n).map(|h| h as f64 / 2.0).collect();
        let pts = rank_parameter_sweep(&p, &ks, &LevelSpec::reduced(), &BuildOptions::default(), &cfg()).expect("sweep");
        let vals: Vec<f64> = pts.iter().filter_map(|p| p.value).collect();
        if vals.len() == ks.len() && vals.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL) {
            sweep_ok += 1;
        }
    }
    Outcome {
        pass: chain == total && reduced_eq == total && sweep_ok == total,
        detail: format!(
            "chain {chain}/{total}, reduced=unreduced {reduced_eq}/{total} (worst {worst:.1e}), monotone sweeps {sweep_ok}/{total}"
        ),
    }
}

fn operator_identities() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=4 {
        for n in 1..=3 {
            let p = symmetric_projector(d, n).expect("projector");
            let p2 = p.matmul(&p).expect("square");
            worst = worst.max(p2.distance(&p));
            worst = worst.max((p.trace().re - symmetric_subspace_dim(d, n) as f64).abs());
        }
        let v = swap_operator(d);
        let layout = TensorLayout::new(vec![d, d]).expect("layout");
        let vt = partial_transpose(&v, &layout, &[0]).expect("transpose");
        worst = worst.max(vt.distance(&max_entangled_projector(d).scale(d as f64)));
        let tr = partial_trace(&v, &layout, &[1]).expect("trace");
        worst = worst.max(tr.distance(&FieldMatrix::identity(Field::Real, d)));
    }
    Outcome { pass: worst <= IDENTITY_TOL, detail: format!("worst deviation {worst:.1e}") }
}

fn pseudo_boolean_corpus(corpus: &mut Corpus) {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let m = 3 + (seed as usize % 5);
        let q = FieldMatrix::real_fn(m, m, |_, _| gaussian(&mut rng));
        let c: Vec<f64> = (0..m).map(|_| gaussian(&mut rng)).collect();
        let sense = if seed % 2 == 0 { Sense::Max } else { Sense::Min };
        let exact = pseudo_boolean_bruteforce(&q, &c, sense).expect("brute").value;
        for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
            let b = pseudo_boolean_bound(&q, &c, &spec, sense, &cfg()).expect("bound");
            corpus.push(format!("pseudo-boolean seed {seed} level {}", spec.label()), &b, Some(exact));
        }
    }
}

fn soundness(corpus: &mut Corpus) -> Outcome {
    pseudo_boolean_corpus(corpus);
    for n in [2, 3, 5] {
        let g = Graph::complete(n);
        let theta = lovasz_theta(&g, &cfg()).expect("theta");
        corpus.push(format!("theta K{n}"), &theta, Some(1.0));
    }
    let v = corpus.violations();
    let checked = corpus.0.len();
    let optimal = corpus.0.iter().filter(|c| c.bound.status == Status::Optimal).count();
    let mut detail = format!("{} violations over {checked} solves ({optimal} optimal)", v.len());
    if let Some(first) = v.first() {
        detail += &format!("; first: {first}");
    }
    Outcome { pass: v.is_empty(), detail }
}

fn report(id: usize, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id} {verdict} {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
    o.pass
}

fn main() {
    let mut corpus = Corpus::default();
    let results = [
        report(1, "unfaithfulness regression", unfaithfulness_regression),
        report(2, "theta and representation exclusion", representation_exclusion),
        report(3, "max-cut sandwich and exactness", || maxcut_sandwich(&mut corpus)),
        report(4, "boolean least squares statistic", || least_squares_statistic(&mut corpus)),
        report(5, "hierarchy laws", || hierarchy_laws(&mut corpus)),
        report(6, "operator identities", operator_identities),
        report(7, "solver soundness", || soundness(&mut corpus)),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
