//! Sweep r over (r_min, 1], locate conjugate points and check M = Σ m(r).

use std::f64::consts::PI;
use std::time::Instant;

use morse_shrink::discretize::build_grid;
use morse_shrink::geometry::Domain;
use morse_shrink::potential::PotentialField;
use morse_shrink::sweep::{locate_conjugate_points, smale_check, sweep_eigenvalues, uniform_r_grid, Problem};

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(Ok(2000), |s| s.parse())?;
    let grid = build_grid(&Domain::interval(-1.0, 1.0)?, n, 0)?;
    let problem = Problem::new(grid, PotentialField::constant(-100.0, 1), None)?;
    let start = Instant::now();
    let trace = sweep_eigenvalues(&problem, &uniform_r_grid(0.02, 1.0, 200), 8)?;
    let crossings = locate_conjugate_points(&problem, &trace, 1e-10, 60)?;
    println!("n = {n}, tol_zero = {:.3e}, {:.2}s", problem.tol_zero, start.elapsed().as_secs_f64());
    for (k, c) in crossings.iter().enumerate() {
        let exact = (k + 1) as f64 * PI / 20.0;
        println!("  r* = {:.10}  kπ/20 = {:.10}  error {:.2e}  m = {}", c.r_star, exact, (c.r_star - exact).abs(), c.multiplicity);
    }
    let report = smale_check(&trace, &crossings);
    println!("M = {}, Σ m(r) = {}, identity holds: {}", report.morse_index, report.sum_m, report.identity_holds);
    Ok(())
}
