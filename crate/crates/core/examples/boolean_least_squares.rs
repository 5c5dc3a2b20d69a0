//! Boolean least squares `min ‖Ax − b‖²` over sign vectors: lower bounds
//! from both levels, a rounded solution and the exact optimum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rankhier::applications::{boolean_least_squares, pseudo_boolean_bruteforce};
use rankhier::hierarchy::LevelSpec;
use rankhier::matrix::FieldMatrix;
use rankhier::problem::Sense;
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (m, d) = (10, 8);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let a = FieldMatrix::real_fn(m, d, |_, _| normal());
    let b: Vec<f64> = (0..m).map(|_| normal()).collect();
    let cfg = SolverConfig::default();
    for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
        let r = boolean_least_squares(&a, &b, &spec, &cfg)?;
        println!("level {}: bound {:.6}, rounded {:?} with value {:.6}", r.bound.level, r.bound.value, r.rounded, r.rounded_value);
    }
    let q = a.transpose().matmul(&a)?;
    let c: Vec<f64> = (0..d).map(|j| -2.0 * (0..m).map(|i| a.re(i, j) * b[i]).sum::<f64>()).collect();
    let exact = pseudo_boolean_bruteforce(&q, &c, Sense::Min)?.value + b.iter().map(|v| v * v).sum::<f64>();
    println!("exact optimum: {exact:.6}");
    Ok(())
}
