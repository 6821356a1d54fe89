//! The unit disk with f = -36: conjugate points at j/6 for the Bessel zeros
//! j below 6, double where the angular mode has a sine partner.

use morse_shrink::crossing_form::{evaluate_all, DEFAULT_FD_DELTA};
use morse_shrink::discretize::build_grid;
use morse_shrink::geometry::{boundary_sample, Domain};
use morse_shrink::potential::PotentialField;
use morse_shrink::sweep::{locate_conjugate_points, smale_check, sweep_eigenvalues, uniform_r_grid, Problem};

// j_{0,1}, j_{1,1}, j_{2,1}, j_{0,2}
const ZEROS: [f64; 4] = [2.404825557695773, 3.831705970207512, 5.135622301840683, 5.520078110286311];

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(Ok(1000), |s| s.parse())?;
    let domain = Domain::disk(1.0)?;
    let grid = build_grid(&domain, n, 4)?;
    let problem = Problem::new(grid, PotentialField::constant(-36.0, 2), None)?;
    let trace = sweep_eigenvalues(&problem, &uniform_r_grid(0.02, 1.0, 200), 8)?;
    let mut crossings = locate_conjugate_points(&problem, &trace, 1e-9, 60)?;
    evaluate_all(&problem, &boundary_sample(&domain, 64), &mut crossings, DEFAULT_FD_DELTA)?;
    for (c, j) in crossings.iter().zip(ZEROS) {
        let g = c.gamma.as_ref().expect("evaluated");
        println!(
            "r* = {:.7}  j/6 = {:.7}  m = {}  Γ eigenvalues {:?}  volume/boundary discrepancy {:.1e}",
            c.r_star,
            j / 6.0,
            c.multiplicity,
            g.eigenvalues,
            g.relative_discrepancy
        );
    }
    let s = smale_check(&trace, &crossings);
    println!("M = {}, Σ m(r) = {}, Σ sgn Γ = {:?}", s.morse_index, s.sum_m, s.signed_sum);
    Ok(())
}
