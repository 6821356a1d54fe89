//! Lowest eigenvalues of -Δ + r²f(rx) on (-1, 1) against (kπ/2)² - r²c².

use std::f64::consts::PI;

use morse_shrink::discretize::{build_grid, OperatorTriple};
use morse_shrink::geometry::Domain;
use morse_shrink::potential::PotentialField;
use morse_shrink::spectrum::{default_tol_zero, lowest_eigenpairs, morse_index};

fn main() -> anyhow::Result<()> {
    let c = 10.0;
    let grid = build_grid(&Domain::interval(-1.0, 1.0)?, 2000, 0)?;
    let f = PotentialField::constant(-c * c, 1);
    let tol = default_tol_zero(grid.spacing(), c * c);
    for r in [0.1, 0.5, 1.0] {
        let op = OperatorTriple::assemble(&grid, &f, r)?;
        println!("r = {r}: Morse index {}", morse_index(&op, tol)?);
        for p in lowest_eigenpairs(&op, 7)? {
            let k = (p.index + 1) as f64;
            let exact = (k * PI / 2.0).powi(2) - r * r * c * c;
            println!("  μ_{} = {:>14.8}   exact {:>14.8}   error {:.2e}", p.index + 1, p.mu, exact, (p.mu - exact).abs());
        }
    }
    Ok(())
}
