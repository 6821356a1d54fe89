//! Potential expressions: parsing, evaluation, gradients and radiality.

use morse_shrink::config::parse_potential_expr;
use morse_shrink::expr;

fn main() -> anyhow::Result<()> {
    for (src, dim) in [
        ("-100", 1),
        ("-(10 + rho^2)^2", 2),
        ("-50*(1 + 0.5*cos(3*x))", 1),
        ("-36*exp(-rho^2)", 2),
    ] {
        let f = parse_potential_expr(src, dim)?;
        let x = [0.3, 0.4];
        let g = f.gradient(&x);
        println!(
            "{src:<24} dim {dim}: f(0.3, 0.4) = {:>12.6}  ∇f = ({:.6}, {:.6})  radial = {}",
            f.value(&x),
            g[0],
            g[1],
            f.is_radial()
        );
    }
    let e = expr::parse("sin(x)^2 - 2*rho/(1 + y)")?;
    println!("rendered: {e}");
    assert_eq!(expr::parse(&e.to_string())?, e);
    for bad in ["sin(x", "x ^ 1.5", "2 * * x"] {
        println!("{bad:<10} -> {}", expr::parse(bad).unwrap_err());
    }
    println!("'y' in 1D -> {}", expr::parse_in_dimension("x + y", 1).unwrap_err());
    Ok(())
}
