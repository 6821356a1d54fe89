//! Discrete results against independent references: dense generalized
//! eigensolves, closed forms and Bessel zeros computed from the integral
//! representation.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;

use morse_shrink::crossing_form::{evaluate_all, DEFAULT_FD_DELTA};
use morse_shrink::discretize::{build_grid, OperatorTriple};
use morse_shrink::geometry::{boundary_sample, Domain};
use morse_shrink::potential::PotentialField;
use morse_shrink::spectrum::{lowest_eigenvalues, morse_index};
use morse_shrink::sweep::{locate_conjugate_points, smale_check, sweep_eigenvalues, uniform_r_grid, Problem};

/// `J_ν(x) = (1/π) ∫_0^π cos(νt − x sin t) dt` by composite Simpson.
fn bessel_j(nu: usize, x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    let g = |t: f64| (nu as f64 * t - x * t.sin()).cos();
    let mut s = g(0.0) + g(PI);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    s * h / 3.0 / PI
}

/// Positive zeros of `J_ν` below `limit`, by scanning and bisection.
fn bessel_zeros(nu: usize, limit: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    let step = 0.01;
    let mut x = 0.5;
    while x < limit {
        let (a, b) = (x, x + step);
        if bessel_j(nu, a) * bessel_j(nu, b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if bessel_j(nu, lo) * bessel_j(nu, mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        x = b;
    }
    zeros
}

#[test]
fn bessel_oracle_reproduces_tabulated_zeros() {
    assert_relative_eq!(bessel_zeros(0, 3.0)[0], 2.404825557695773, max_relative = 1e-10);
    assert_relative_eq!(bessel_zeros(1, 4.0)[0], 3.831705970207512, max_relative = 1e-10);
}

fn dense_pencil_eigenvalues(op: &OperatorTriple, block: usize) -> Vec<f64> {
    let b = &op.blocks[block];
    let n = b.len();
    // B^{-1/2} (K + W) B^{-1/2}
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = (b.stiffness.diag[i] + b.potential[i]) / b.mass[i];
        if i + 1 < n {
            let v = b.stiffness.off[i] / (b.mass[i] * b.mass[i + 1]).sqrt();
            a[(i, i + 1)] = v;
            a[(i + 1, i)] = v;
        }
    }
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn sturm_bisection_matches_dense_solver() {
    for (domain, nu_max) in [(Domain::interval(-1.0, 1.0).unwrap(), 0), (Domain::disk(1.0).unwrap(), 3)] {
        let grid = build_grid(&domain, 120, nu_max).unwrap();
        let f = PotentialField::parse("-(30 + 5*rho^2)", domain.dimension(), 2.0).unwrap();
        let op = OperatorTriple::assemble(&grid, &f, 0.83).unwrap();
        for block in 0..op.blocks.len() {
            let dense = dense_pencil_eigenvalues(&op, block);
            let sturm = op.blocks[block].pencil().lowest_eigenvalues(10);
            for (a, b) in sturm.iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn disk_laplacian_lowest_eigenvalue_is_j01_squared() {
    let j01 = bessel_zeros(0, 3.0)[0];
    let grid = build_grid(&Domain::disk(1.0).unwrap(), 2000, 2).unwrap();
    let op = OperatorTriple::assemble(&grid, &PotentialField::zero(2), 1.0).unwrap();
    let mu = lowest_eigenvalues(&op, 1)[0];
    assert!((mu - j01 * j01).abs() < 1e-4, "{mu} vs {}", j01 * j01);
    // the next level is the double j_{1,1}²
    let j11 = bessel_zeros(1, 4.0)[0];
    let lv = lowest_eigenvalues(&op, 3);
    assert!((lv[1] - j11 * j11).abs() < 1e-4 && lv[1] == lv[2]);
}

#[test]
fn interval_eigenvalues_converge_at_second_order() {
    let exact = (PI / 2.0).powi(2) - 0.36 * 100.0;
    let err = |n: usize| {
        let grid = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), n, 0).unwrap();
        let op = OperatorTriple::assemble(&grid, &PotentialField::constant(-100.0, 1), 0.6).unwrap();
        (lowest_eigenvalues(&op, 1)[0] - exact).abs()
    };
    let ratio = err(199) / err(399);
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn disk_crossings_follow_bessel_zeros() {
    // every zero j_{ν,k} < c gives a conjugate point j/c, double for ν > 0
    let c = 6.0;
    let mut expected: Vec<(f64, usize)> = Vec::new();
    for nu in 0..6 {
        for j in bessel_zeros(nu, c) {
            expected.push((j / c, if nu == 0 { 1 } else { 2 }));
        }
    }
    expected.sort_by(|a, b| a.0.total_cmp(&b.0));
    let domain = Domain::disk(1.0).unwrap();
    let grid = build_grid(&domain, 800, 5).unwrap();
    let problem = Problem::new(grid, PotentialField::constant(-c * c, 2), None).unwrap();
    let trace = sweep_eigenvalues(&problem, &uniform_r_grid(0.02, 1.0, 150), 8).unwrap();
    let mut cps = locate_conjugate_points(&problem, &trace, 1e-9, 60).unwrap();
    assert_eq!(cps.len(), expected.len());
    for (cp, (r, m)) in cps.iter().zip(&expected) {
        assert!((cp.r_star - r).abs() < 1e-3, "{} vs {r}", cp.r_star);
        assert_eq!(cp.multiplicity, *m);
        assert_eq!(cp.kernel.len(), *m);
    }
    evaluate_all(&problem, &boundary_sample(&domain, 64), &mut cps, DEFAULT_FD_DELTA).unwrap();
    let s = smale_check(&trace, &cps);
    assert!(s.identity_holds);
    assert_eq!(s.signed_sum, Some(-(s.morse_index as i64)));
    for cp in &cps {
        let g = cp.gamma.as_ref().unwrap();
        assert!(g.relative_discrepancy < 5e-3);
    }
}

#[test]
fn morse_index_counts_closed_form() {
    // c = 10: (kπ/2)² < 100 for k ≤ 6
    let grid = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 500, 0).unwrap();
    for (r, m) in [(0.1, 0), (0.2, 1), (0.5, 3), (0.9, 5), (1.0, 6)] {
        let op = OperatorTriple::assemble(&grid, &PotentialField::constant(-100.0, 1), r).unwrap();
        assert_eq!(morse_index(&op, 1e-6).unwrap(), m, "r = {r}");
    }
}

#[test]
fn interval_crossing_form_has_closed_form_value() {
    // constant f and a B-normalised u: Γ = 2 r f = −200 r, i.e. −10kπ at
    // r = kπ/20
    let grid = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 800, 0).unwrap();
    let f = PotentialField::constant(-100.0, 1);
    let problem = Problem::new(grid, f, None).unwrap();
    let trace = sweep_eigenvalues(&problem, &uniform_r_grid(0.02, 1.0, 60), 8).unwrap();
    let mut cps = locate_conjugate_points(&problem, &trace, 1e-10, 60).unwrap();
    evaluate_all(&problem, &boundary_sample(problem.grid.domain(), 2), &mut cps, DEFAULT_FD_DELTA).unwrap();
    for cp in &cps {
        let g = cp.gamma.as_ref().unwrap();
        assert_relative_eq!(g.gamma_volume[(0, 0)], -200.0 * cp.r_star, max_relative = 1e-12);
    }
}
