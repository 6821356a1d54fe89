//! Scalar coefficient fields `f(x)` and their gradients.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};

/// How a coefficient field is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `f(x) = c0`.
    Constant(f64),
    /// `f(x) = Σ_k c_k |x|^{2k}`.
    RadialPoly(Vec<f64>),
    /// A parsed expression; gradient by central differences.
    Expression { source: String, expr: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    family: PotentialFamily,
    dim: usize,
    fd_step: f64,
}

impl PotentialField {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            family: PotentialFamily::Constant(value),
            dim,
            fd_step: 0.0,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(0.0, dim)
    }

    /// `coeffs[k]` multiplies `|x|^{2k}`.
    pub fn radial_poly(coeffs: Vec<f64>, dim: usize) -> Self {
        Self {
            family: PotentialFamily::RadialPoly(coeffs),
            dim,
            fd_step: 0.0,
        }
    }

    /// Parse an expression for a domain of dimension `dim` and diameter
    /// `diameter`. The finite-difference step is `1e-5 * diameter`.
    pub fn parse(source: &str, dim: usize, diameter: f64) -> Result<Self> {
        let expr = expr::parse_in_dimension(source, dim)?;
        Ok(Self {
            family: PotentialFamily::Expression {
                source: source.to_string(),
                expr,
            },
            dim,
            fd_step: 1e-5 * diameter,
        })
    }

    /// Like [`PotentialField::parse`], but expressions free of `x`, `y` and
    /// `rho` become constant fields.
    pub fn from_source(source: &str, dim: usize, diameter: f64) -> Result<Self> {
        let field = Self::parse(source, dim, diameter)?;
        if let PotentialFamily::Expression { expr, .. } = &field.family {
            if expr.is_constant() {
                let c = expr.eval(&[0.0, 0.0]);
                if !c.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "constant expression '{source}' evaluates to {c}"
                    )));
                }
                return Ok(Self::constant(c, dim));
            }
        }
        Ok(field)
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        match &self.family {
            PotentialFamily::Constant(c) => *c == 0.0,
            PotentialFamily::RadialPoly(cs) => cs.iter().all(|c| *c == 0.0),
            PotentialFamily::Expression { .. } => false,
        }
    }

    /// True if the field depends on `x` only through `|x|`.
    pub fn is_radial(&self) -> bool {
        match &self.family {
            PotentialFamily::Constant(_) | PotentialFamily::RadialPoly(_) => true,
            PotentialFamily::Expression { expr, .. } => expr.is_radial(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.family {
            PotentialFamily::Constant(c) => *c,
            PotentialFamily::RadialPoly(cs) => {
                let s = norm_sq(x, self.dim);
                cs.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            PotentialFamily::Expression { expr, .. } => expr.eval(&x[..self.dim]),
        }
    }

    /// Gradient; the trailing entry is zero in one dimension.
    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        match &self.family {
            PotentialFamily::Constant(_) => [0.0, 0.0],
            PotentialFamily::RadialPoly(cs) => {
                // d/dx_i p(|x|^2) = 2 x_i p'(|x|^2)
                let s = norm_sq(x, self.dim);
                let dp = cs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * s + k as f64 * c);
                let mut g = [0.0; 2];
                for i in 0..self.dim {
                    g[i] = 2.0 * x[i] * dp;
                }
                g
            }
            PotentialFamily::Expression { .. } => {
                let h = self.fd_step;
                let mut g = [0.0; 2];
                let mut p = [0.0; 2];
                p[..self.dim].copy_from_slice(&x[..self.dim]);
                for i in 0..self.dim {
                    let xi = p[i];
                    p[i] = xi + h;
                    let fp = self.value(&p);
                    p[i] = xi - h;
                    let fm = self.value(&p);
                    p[i] = xi;
                    g[i] = (fp - fm) / (2.0 * h);
                }
                g
            }
        }
    }

    /// `d/ds (s² f(s x))` at `s = r`, i.e. `2 r f(r x) + r² <∇f(r x), x>`.
    pub fn scaling_derivative(&self, r: f64, x: &[f64]) -> f64 {
        let mut rx = [0.0; 2];
        for i in 0..self.dim {
            rx[i] = r * x[i];
        }
        let g = self.gradient(&rx);
        let dot: f64 = (0..self.dim).map(|i| g[i] * x[i]).sum();
        2.0 * r * self.value(&rx) + r * r * dot
    }

    /// Evaluate and reject non-finite values.
    pub fn checked_value(&self, node: usize, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::PotentialEvaluation {
                node,
                point: x[..self.dim].to_vec(),
                message: format!("value is {v}"),
            })
        }
    }

    /// Source form understood by the configuration reader.
    pub fn render(&self) -> String {
        match &self.family {
            PotentialFamily::Constant(c) => format!("{c:?}"),
            PotentialFamily::RadialPoly(cs) => cs
                .iter()
                .map(|c| format!("{c:?}"))
                .collect::<Vec<_>>()
                .join(", "),
            PotentialFamily::Expression { source, .. } => source.clone(),
        }
    }
}

fn norm_sq(x: &[f64], dim: usize) -> f64 {
    x[..dim].iter().map(|c| c * c).sum()
}
