//! Star-shaped domains, boundary samples and the support function <x, n>.

use morse_shrink::geometry::{boundary_sample, check_star_shaped, make_domain, DomainSpec};

fn main() -> anyhow::Result<()> {
    for spec in [
        DomainSpec::Interval { a: -1.0, b: 1.0 },
        DomainSpec::Interval { a: -0.5, b: 2.0 },
        DomainSpec::Disk { radius: 1.0 },
    ] {
        let d = make_domain(&spec)?;
        let margin = check_star_shaped(&d)?;
        let bs = boundary_sample(&d, 8);
        println!(
            "{spec:?}: |Ω| = {:.6}, |∂Ω| = {:.6}, min <x,n> = {margin}",
            d.measure(),
            d.boundary_measure()
        );
        for i in 0..bs.len() {
            println!(
                "  x = ({:+.4}, {:+.4})  n = ({:+.4}, {:+.4})  w = {:.4}  <x,n> = {:.4}",
                bs.points[i][0], bs.points[i][1], bs.normals[i][0], bs.normals[i][1], bs.weights[i], bs.support_values[i]
            );
        }
    }
    // the origin must be interior
    match make_domain(&DomainSpec::Interval { a: 0.2, b: 1.0 }) {
        Ok(_) => println!("unexpected: (0.2, 1) accepted"),
        Err(e) => println!("(0.2, 1): {e} (exit code {})", e.exit_code()),
    }
    Ok(())
}
