use super::*;
use crate::conic::ProgramMeta;
use crate::problem::Sense;
use std::f64::consts::SQRT_2;

/// max ⟨diag(1, −1), ρ⟩ over real 2×2 density matrices ρ.
fn sigma_z_toy() -> ConicProgram {
    ConicProgram {
        blocks: vec![Cone::Psd(2), Cone::Free(1)],
        nrows: 3,
        a: vec![(0, 0, -1.0), (1, 1, -SQRT_2), (2, 2, -1.0), (0, 3, 1.0), (2, 3, 1.0)],
        b: vec![1.0, 0.0, -1.0],
        c: vec![0.0, 0.0, 0.0, 1.0],
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta { trace_bounds: vec![Some(1.0), None], ..Default::default() },
    }
}

fn infeasible_toy() -> ConicProgram {
    let mut cp = sigma_z_toy();
    cp.blocks[1] = Cone::Free(2);
    cp.a.extend([(0, 4, 1.0), (2, 4, 1.0)]);
    cp.c.push(2.0);
    cp.meta.trace_bounds.clear();
    cp
}

/// Lovász theta of the n-cycle: max ⟨J, X⟩, Tr X = 1, X_ij = 0 on edges.
fn theta_cycle(n: usize) -> ConicProgram {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut row = 0;
    let trace_col = n * (n + 1) / 2;
    for j in 0..n {
        for i in j..n {
            let adjacent = i != j && ((i + n - j) % n == 1 || (j + n - i) % n == 1);
            if adjacent {
                continue;
            }
            if i == j {
                a.push((row, svec_index(n, i, i), -1.0));
                a.push((row, trace_col, 1.0));
                b.push(1.0);
            } else {
                a.push((row, svec_index(n, i, j), -SQRT_2));
                b.push(2.0);
            }
            row += 1;
        }
    }
    let mut c = vec![0.0; trace_col + 1];
    c[trace_col] = 1.0;
    ConicProgram {
        blocks: vec![Cone::Psd(n), Cone::Free(1)],
        nrows: row,
        a,
        b,
        c,
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta { trace_bounds: vec![Some(1.0), None], ..Default::default() },
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn sigma_z_toy_reaches_top_eigenvalue() {
    let sol = solve_bundled(&sigma_z_toy(), &cfg()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - 1.0).abs() < 1e-7, "{}", sol.primal_value);
    assert!((sol.dual_value - 1.0).abs() < 1e-7, "{}", sol.dual_value);
    assert!(sol.gap <= cfg().gap_tol);
}

#[test]
fn sigma_z_toy_certifies_close_to_one() {
    let cp = sigma_z_toy();
    let sol = solve_bundled(&cp, &cfg()).unwrap();
    let c = certify_upper_bound(&cp, &sol).unwrap();
    assert!(c >= 1.0 - 1e-12 && c <= 1.0 + 1e-6, "{c}");
    assert!(sol.certified_bound.is_some());
}

#[test]
fn contradictory_traces_are_infeasible() {
    let sol = solve_bundled(&infeasible_toy(), &cfg()).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
    let raw = SolverConfig { presolve: false, ..cfg() };
    let sol = solve_bundled(&infeasible_toy(), &raw).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn theta_of_five_cycle_is_sqrt5() {
    let cp = theta_cycle(5);
    let sol = solve_bundled(&cp, &cfg()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - 5f64.sqrt()).abs() < 1e-6, "{}", sol.primal_value);
    let c = certify_upper_bound(&cp, &sol).unwrap();
    assert!(c >= 5f64.sqrt() - 1e-9 && c <= 5f64.sqrt() + 1e-6, "{c}");
}

#[test]
fn minimization_sense() {
    // min y s.t. [[y, 1], [1, y]] ⪰ 0
    let cp = ConicProgram {
        blocks: vec![Cone::Psd(2)],
        nrows: 1,
        a: vec![(0, 0, -1.0), (0, 2, -1.0)],
        b: vec![1.0],
        c: vec![0.0, SQRT_2, 0.0],
        sense: Sense::Min,
        offset: 0.5,
        meta: ProgramMeta::default(),
    };
    let sol = solve_bundled(&cp, &cfg()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - 1.5).abs() < 1e-7);
    assert!((sol.dual_value - 1.5).abs() < 1e-7);
    assert!(sol.dual_value <= sol.primal_value + 1e-9);
}

#[test]
fn unbounded_relaxation() {
    // max y s.t. y ≥ 0
    let cp = ConicProgram {
        blocks: vec![Cone::Nonneg(1)],
        nrows: 1,
        a: vec![(0, 0, -1.0)],
        b: vec![1.0],
        c: vec![0.0],
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta::default(),
    };
    assert_eq!(solve_bundled(&cp, &cfg()).unwrap().status, Status::Unbounded);
}

#[test]
fn solves_are_reproducible_and_json_stable() {
    let cp = theta_cycle(7);
    let a = solve_bundled(&cp, &cfg()).unwrap();
    let b = solve_bundled(&cp, &cfg()).unwrap();
    assert_eq!(a, b);
    let back = ConicProgram::from_json(&cp.to_json().unwrap()).unwrap();
    let c = solve_bundled(&back, &cfg()).unwrap();
    assert!((a.primal_value - c.primal_value).abs() <= 1e-9);
    let again = Solution::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(again.status, a.status);
    assert_eq!(again.dual_point, a.dual_point);
}

#[test]
fn margin_of_unconstrained_instance_is_nonnegative() {
    let cp = ConicProgram {
        blocks: vec![],
        nrows: 0,
        a: vec![],
        b: vec![],
        c: vec![],
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta::default(),
    };
    let r = feasibility_margin(&cp, &cfg()).unwrap();
    assert!(r.margin >= 0.0);
    assert!(!r.infeasible);
}

#[test]
fn margin_detects_infeasible_toy() {
    let r = feasibility_margin(&infeasible_toy(), &cfg()).unwrap();
    assert!(r.infeasible);
}

#[test]
fn margin_of_density_matrices_is_half() {
    // 2×2 density matrices: best common shift is 𝟙/2, i.e. t = 1/2
    let r = feasibility_margin(&sigma_z_toy(), &cfg()).unwrap();
    assert!((r.margin - 0.5).abs() < 1e-6, "{}", r.margin);
    let c = r.certified.unwrap();
    assert!(c >= 0.5 - 1e-9 && c <= 0.5 + 1e-6);
}

#[test]
fn margin_certifies_negative_shift() {
    // [[y, 1], [1, y]] ⪰ 0 together with y = 1/2 is infeasible; the best
    // shift is t = −1/2
    let cp = ConicProgram {
        blocks: vec![Cone::Psd(2), Cone::Free(1)],
        nrows: 1,
        a: vec![(0, 0, -1.0), (0, 2, -1.0), (0, 3, 1.0)],
        b: vec![0.0],
        c: vec![0.0, SQRT_2, 0.0, 0.5],
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta { trace_bounds: vec![Some(1.0), None], ..Default::default() },
    };
    let r = feasibility_margin(&cp, &cfg()).unwrap();
    assert!((r.margin + 0.5).abs() < 1e-6, "{}", r.margin);
    assert!(r.infeasible);
}

#[test]
fn loose_solve_still_certifies_valid_bound() {
    let cp = theta_cycle(5);
    let loose = SolverConfig { max_iters: 4, ..cfg() };
    let sol = solve_bundled(&cp, &loose).unwrap();
    assert_eq!(sol.status, Status::MaxIter);
    if let Ok(c) = certify_upper_bound(&cp, &sol) {
        assert!(c >= 5f64.sqrt() - 1e-9, "{c}");
    }
}
