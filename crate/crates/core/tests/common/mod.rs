//! Property checks shared by the proptest suite and the acceptance target.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use morse_shrink::bifurcation::{newton_solve, NewtonSpace, NonlinearitySpec, OneModeReduction};
use morse_shrink::crossing_form::{crossing_form_boundary, crossing_form_volume, signature};
use morse_shrink::discretize::{build_grid, OperatorTriple};
use morse_shrink::expr::{self, Expr, Func};
use morse_shrink::geometry::{boundary_sample, star_shape_margin, Domain};
use morse_shrink::linalg::Pencil;
use morse_shrink::potential::PotentialField;
use morse_shrink::spectrum::{lowest_eigenpairs, ModeVector};

pub const CASES: u32 = 100;

pub fn config() -> Config {
    Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    }
}

// ---------------------------------------------------------------- geometry

#[derive(Debug, Clone)]
pub enum DomainCase {
    Interval(f64, f64),
    Disk(f64),
}

pub fn domain_case() -> impl Strategy<Value = (DomainCase, usize)> {
    let d = prop_oneof![
        (-3.0..-0.05f64, 0.05..3.0f64).prop_map(|(a, b)| DomainCase::Interval(a, b)),
        (0.05..5.0f64).prop_map(DomainCase::Disk),
    ];
    (d, 1usize..200)
}

pub fn check_geometry((case, resolution): (DomainCase, usize)) -> Result<(), TestCaseError> {
    let d = match case {
        DomainCase::Interval(a, b) => Domain::interval(a, b),
        DomainCase::Disk(r) => Domain::disk(r),
    }
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let bs = boundary_sample(&d, resolution);
    let margin = star_shape_margin(&d);
    prop_assert!(margin > 0.0);
    prop_assert!((bs.total_weight() - d.boundary_measure()).abs() <= 1e-12 * d.boundary_measure());
    for i in 0..bs.len() {
        let (p, n) = (bs.points[i], bs.normals[i]);
        prop_assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-14);
        let support = p[0] * n[0] + p[1] * n[1];
        prop_assert!((support - bs.support_values[i]).abs() <= 1e-14 * support.abs().max(1.0));
        prop_assert!(bs.support_values[i] >= margin * (1.0 - 1e-14));
        // outward: stepping along n leaves the domain, stepping back stays
        let eps = 1e-6 * d.diameter();
        prop_assert!(!d.contains(&[p[0] + eps * n[0], p[1] + eps * n[1]]));
        prop_assert!(d.contains(&[p[0] - eps * n[0], p[1] - eps * n[1]]));
    }
    Ok(())
}

// ------------------------------------------------- inertia under reweighting

pub fn inertia_case() -> impl Strategy<Value = (bool, usize, f64, f64, Vec<f64>, usize)> {
    (any::<bool>(), 10usize..80, 0.0..15.0f64, 0.05..1.0f64, 0usize..4).prop_flat_map(|(disk, n, c, r, nu)| {
        (
            Just(disk),
            Just(n),
            Just(c),
            Just(r),
            proptest::collection::vec(0.05..20.0f64, n),
            Just(nu),
        )
    })
}

/// Sylvester's law: the number of negative eigenvalues of the pencil
/// (K + W, D) is that of K + W for every positive diagonal D.
pub fn check_inertia(
    (disk, n, c, r, weights, nu): (bool, usize, f64, f64, Vec<f64>, usize),
) -> Result<(), TestCaseError> {
    let (grid, f) = if disk {
        (build_grid(&Domain::disk(1.0).unwrap(), n, 3).unwrap(), PotentialField::constant(-c * c, 2))
    } else {
        (build_grid(&Domain::interval(-1.0, 1.0).unwrap(), n, 0).unwrap(), PotentialField::constant(-c * c, 1))
    };
    let op = OperatorTriple::assemble(&grid, &f, r).unwrap();
    let b = &op.blocks[if disk { nu } else { 0 }];
    let reference = b.pencil().count_below(0.0);
    let mass: Vec<f64> = b.mass.iter().zip(&weights).map(|(m, w)| m * w).collect();
    let reweighted = Pencil::new(&b.stiffness, &b.potential, &mass).count_below(0.0);
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        dense[(i, i)] = b.stiffness.diag[i] + b.potential[i];
        if i + 1 < n {
            dense[(i, i + 1)] = b.stiffness.off[i];
            dense[(i + 1, i)] = b.stiffness.off[i];
        }
    }
    let ev = dense.symmetric_eigen().eigenvalues;
    // skip numerically ambiguous cases
    let scale = ev.amax();
    prop_assume!(ev.iter().all(|x| x.abs() > 1e-9 * scale));
    let dense_count = ev.iter().filter(|x| **x < 0.0).count();
    prop_assert_eq!(reference, dense_count);
    prop_assert_eq!(reweighted, dense_count);
    Ok(())
}

// ------------------------------------------------------- Γ basis covariance

pub fn covariance_case() -> impl Strategy<Value = (bool, usize, f64, f64, usize, usize, Vec<f64>)> {
    (
        any::<bool>(),
        40usize..160,
        4.0..15.0f64,
        0.3..1.0f64,
        0usize..4,
        0usize..2,
        proptest::collection::vec(-1.0..1.0f64, 9),
    )
}

fn orthogonal(entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(3, 3, entries) + DMatrix::identity(3, 3) * 1e-3;
    a.qr().q()
}

/// Replacing a basis U by QU with Q orthogonal conjugates both crossing
/// forms, Γ(QU) = Q Γ(U) Qᵀ, and leaves the signature unchanged.
pub fn check_covariance(
    (disk, n, c, r, nu, copy, q): (bool, usize, f64, f64, usize, usize, Vec<f64>),
) -> Result<(), TestCaseError> {
    let (grid, f) = if disk {
        (build_grid(&Domain::disk(1.0).unwrap(), n, 3).unwrap(), PotentialField::constant(-c * c, 2))
    } else {
        (build_grid(&Domain::interval(-1.0, 1.0).unwrap(), n, 0).unwrap(), PotentialField::constant(-c * c, 1))
    };
    let bs = boundary_sample(grid.domain(), 64);
    let op = OperatorTriple::assemble(&grid, &f, r).unwrap();
    let block = if disk { nu } else { 0 };
    let copy = if disk && nu > 0 { copy } else { 0 };
    let pencil = op.blocks[block].pencil();
    let basis: Vec<ModeVector> = (0..3)
        .map(|j| ModeVector {
            block,
            copy,
            values: pencil.eigenvector(pencil.eigenvalue(j)).unwrap(),
        })
        .collect();
    let q = orthogonal(&q);
    let mixed: Vec<ModeVector> = (0..3)
        .map(|i| ModeVector {
            block,
            copy,
            values: (0..n)
                .map(|j| (0..3).map(|k| q[(i, k)] * basis[k].values[j]).sum())
                .collect(),
        })
        .collect();
    for form in [0, 1] {
        let eval = |u: &[ModeVector]| {
            if form == 0 {
                crossing_form_volume(&grid, &f, r, u).unwrap()
            } else {
                crossing_form_boundary(&grid, &bs, r, u).unwrap()
            }
        };
        let g = eval(&basis);
        let g2 = eval(&mixed);
        let expect = &q * &g * q.transpose();
        let scale = g.amax().max(1e-300);
        prop_assert!((&g2 - &expect).amax() <= 1e-9 * scale, "form {form}: {g2} vs {expect}");
        let tol = 1e-4 * scale + 1e-12;
        prop_assert_eq!(signature(&g, tol), signature(&g2, tol));
    }
    // the boundary value of a mixed vector is the mixed boundary value
    let dn = |u: &ModeVector| morse_shrink::crossing_form::normal_derivatives(&grid, &bs, u);
    let d0: Vec<Vec<f64>> = basis.iter().map(dn).collect();
    for (i, m) in mixed.iter().enumerate() {
        let di = dn(m);
        for k in 0..bs.len() {
            let lin: f64 = (0..3).map(|l| q[(i, l)] * d0[l][k]).sum();
            prop_assert!((di[k] - lin).abs() <= 1e-9 * (1.0 + lin.abs()));
        }
    }
    Ok(())
}

// ---------------------------------------------------- Newton odd symmetry

pub fn symmetry_case() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..=6, 0.005..0.05f64, 0.5..2.0f64)
}

/// For odd g, Newton from −seed returns the mirror of the solution from
/// +seed.
pub fn check_symmetry((k, delta, kappa): (usize, f64, f64)) -> Result<(), TestCaseError> {
    let grid = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 200, 0).unwrap();
    let f = PotentialField::constant(-100.0, 1);
    let r_star = k as f64 * std::f64::consts::PI / 20.0;
    let r = r_star + delta;
    let space = NewtonSpace::new(&grid);
    let op = OperatorTriple::assemble(&grid, &f, r_star).unwrap();
    let pair = lowest_eigenpairs(&op, k).unwrap().pop().unwrap();
    let phi = space.embed(&grid, &pair.vector);
    let gs = NonlinearitySpec::cubic(f, kappa);
    let red = OneModeReduction::new(&grid, &space, &gs, r, &phi).unwrap();
    let amps = red.amplitudes();
    prop_assume!(!amps.is_empty());
    let a = amps[0].abs();
    let seed = |s: f64| phi.iter().map(|x| s * a * x).collect::<Vec<f64>>();
    let plus = newton_solve(&grid, &space, &gs, r, &seed(1.0), 1e-10, 50)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let minus = newton_solve(&grid, &space, &gs, r, &seed(-1.0), 1e-10, 50)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let np = DVector::from_vec(plus.u.clone()).norm();
    prop_assert!(space.h1_norm(&plus.u) > 1e-6, "trivial solution");
    let sum: f64 = plus.u.iter().zip(&minus.u).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
    prop_assert!(sum <= 1e-6 * np, "‖u₊ + u₋‖ = {sum:e}, ‖u₊‖ = {np:e}");
    Ok(())
}

// ------------------------------------------------------ parser round trip

pub fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop_oneof![0.0..1e3f64, (0u32..50).prop_map(f64::from), 1e-8..1e-3f64].prop_map(Expr::Num),
        Just(Expr::X),
        Just(Expr::Y),
        Just(Expr::Rho),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Abs)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Add(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Sub(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Mul(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Div(Box::new(l), Box::new(r))),
            (inner.clone(), 0u32..5).prop_map(|(b, k)| Expr::Pow(Box::new(b), k)),
            (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

pub fn check_round_trip(e: Expr) -> Result<(), TestCaseError> {
    let text = e.to_string();
    let back = expr::parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
    prop_assert_eq!(&back, &e, "{}", text);
    prop_assert_eq!(back.to_string(), text);
    Ok(())
}

/// Run a property with `CASES` cases; `Err` carries the failure.
pub fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(config());
    runner.run(&strategy, test).map_err(|e| e.to_string())
}
