//! Crossing forms by the volume integral and by the boundary flux, against
//! the closed form Γ = -10kπ for f = -100 on (-1, 1).

use std::f64::consts::PI;

use morse_shrink::crossing_form::{evaluate_all, DEFAULT_FD_DELTA};
use morse_shrink::discretize::build_grid;
use morse_shrink::geometry::{boundary_sample, Domain};
use morse_shrink::potential::PotentialField;
use morse_shrink::sweep::{locate_conjugate_points, sweep_eigenvalues, uniform_r_grid, Problem};

fn main() -> anyhow::Result<()> {
    let domain = Domain::interval(-1.0, 1.0)?;
    let grid = build_grid(&domain, 2000, 0)?;
    let problem = Problem::new(grid, PotentialField::constant(-100.0, 1), None)?;
    let trace = sweep_eigenvalues(&problem, &uniform_r_grid(0.02, 1.0, 200), 8)?;
    let mut crossings = locate_conjugate_points(&problem, &trace, 1e-10, 60)?;
    evaluate_all(&problem, &boundary_sample(&domain, 2), &mut crossings, DEFAULT_FD_DELTA)?;
    println!("{:>10} {:>14} {:>14} {:>14} {:>10} {:>10}", "r*", "Γ volume", "Γ boundary", "-10kπ", "rel. diff", "fd/|Γ|");
    for (k, c) in crossings.iter().enumerate() {
        let g = c.gamma.as_ref().expect("evaluated");
        println!(
            "{:>10.6} {:>14.6} {:>14.6} {:>14.6} {:>10.2e} {:>10.2e}  signature {}",
            c.r_star,
            g.gamma_volume[(0, 0)],
            g.gamma_boundary[(0, 0)],
            -10.0 * (k + 1) as f64 * PI,
            g.relative_discrepancy,
            g.fd_check_relative,
            g.signature
        );
    }
    Ok(())
}
