//! Grids on the fixed domain Ω and the matrices of the Hessian form
//! `h_r(u) = ∫|∇u|² + r² ∫ f(r·x) u²`.
//!
//! The interval uses a uniform second-order finite-difference grid. The disk
//! is decomposed into angular Fourier modes `v(ρ)·cos νθ` and `v(ρ)·sin νθ`;
//! for a radial potential each mode is an independent radial problem
//!
//! ```text
//! −(ρ v')' + ν² v / ρ + r² f(rρ) ρ v = μ ρ v,   v(R) = 0,
//! ```
//!
//! discretised in flux form on `ρ_j = j·h`. Mode ν ≥ 1 uses `v(0) = 0`;
//! mode 0 uses the symmetric (zero-flux) stencil at the centre.
//! Every block is a symmetric tridiagonal stiffness with diagonal mass, and
//! the angular normalisation `∮ cos² νθ dθ` (2π for ν = 0, π otherwise) is
//! folded into both, so `uᵀ K u` and `uᵀ B u` are the true energy and L²
//! norm of the represented function.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind};
use crate::linalg::{Pencil, SymTridiag};
use crate::potential::PotentialField;

/// Angular modes retained on the disk unless configured otherwise.
pub const DEFAULT_NU_MAX: usize = 12;

/// One decoupled block of the discrete operator.
#[derive(Debug, Clone)]
pub struct ModeBlock {
    /// Angular frequency (always 0 on the interval).
    pub nu: usize,
    /// Number of angular copies sharing this block (1, or 2 for cos/sin).
    pub copies: usize,
    /// `∮ Θ² dθ` for the angular factor Θ (1 on the interval).
    pub angular_norm: f64,
    /// Node coordinate: `x` on the interval, `ρ` on the disk.
    pub nodes: Vec<f64>,
    /// Diagonal mass `B`, i.e. L² quadrature weights of the block.
    pub mass: Vec<f64>,
    pub stiffness: SymTridiag,
}

impl ModeBlock {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Interior nodes used for the one-sided normal derivative at a boundary
/// point: `∂_n u ≈ sign · (3u_b − 4u[near] + u[far]) / (2h)` with `u_b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryStencil {
    pub near: usize,
    pub far: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    n: usize,
    spacing: f64,
    nu_max: usize,
    blocks: Vec<ModeBlock>,
    /// Volume quadrature weights of the physical grid (interval nodes, or
    /// rings `2π ρ_j h` on the disk).
    quadrature_weights: Vec<f64>,
    /// Interval: stencil at `a` then at `b`. Disk: the single radial stencil
    /// at `ρ = R`, shared by every angle.
    boundary_stencils: Vec<BoundaryStencil>,
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Nodes per direction (radial nodes on the disk).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nu_max(&self) -> usize {
        self.nu_max
    }

    pub fn blocks(&self) -> &[ModeBlock] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ModeBlock {
        &self.blocks[i]
    }

    /// Positions of the degrees of freedom along the line / radius.
    pub fn interior_nodes(&self) -> &[f64] {
        &self.blocks[0].nodes
    }

    pub fn quadrature_weights(&self) -> &[f64] {
        &self.quadrature_weights
    }

    pub fn boundary_stencils(&self) -> &[BoundaryStencil] {
        &self.boundary_stencils
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.domain.kind(), DomainKind::Disk { .. })
    }

    /// Total number of scalar unknowns, counting angular copies.
    pub fn dof(&self) -> usize {
        self.blocks.iter().map(|b| b.len() * b.copies).sum()
    }

    /// Physical point of node `j` (on the ray θ = 0 for the disk).
    pub fn point(&self, j: usize) -> [f64; 2] {
        [self.blocks[0].nodes[j], 0.0]
    }
}

/// Build the grid with `n` nodes per direction; `nu_max` is ignored on the
/// interval. Production runs use `n ≥ 8`; three nodes is the hard minimum
/// for the one-sided boundary stencil.
pub fn build_grid(domain: &Domain, n: usize, nu_max: usize) -> Result<Grid> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 3 nodes per direction, got {n}"
        )));
    }
    match domain.kind() {
        DomainKind::Interval { a, b } => {
            let h = (b - a) / (n as f64 + 1.0);
            let nodes: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
            let stiffness = SymTridiag::new(vec![2.0 / h; n], vec![-1.0 / h; n - 1]);
            let block = ModeBlock {
                nu: 0,
                copies: 1,
                angular_norm: 1.0,
                nodes,
                mass: vec![h; n],
                stiffness,
            };
            Ok(Grid {
                domain: *domain,
                n,
                spacing: h,
                nu_max: 0,
                quadrature_weights: vec![h; n],
                blocks: vec![block],
                boundary_stencils: vec![
                    BoundaryStencil {
                        near: 0,
                        far: 1,
                        spacing: h,
                    },
                    BoundaryStencil {
                        near: n - 1,
                        far: n - 2,
                        spacing: h,
                    },
                ],
            })
        }
        DomainKind::Disk { radius } => {
            let h = radius / (n as f64 + 1.0);
            let nodes: Vec<f64> = (1..=n).map(|j| j as f64 * h).collect();
            let blocks = (0..=nu_max)
                .map(|nu| radial_block(&nodes, h, nu))
                .collect();
            Ok(Grid {
                domain: *domain,
                n,
                spacing: h,
                nu_max,
                quadrature_weights: nodes.iter().map(|rho| 2.0 * PI * rho * h).collect(),
                blocks,
                boundary_stencils: vec![BoundaryStencil {
                    near: n - 1,
                    far: n - 2,
                    spacing: h,
                }],
            })
        }
    }
}

fn radial_block(nodes: &[f64], h: f64, nu: usize) -> ModeBlock {
    let n = nodes.len();
    let c = if nu == 0 { 2.0 * PI } else { PI };
    let nu2 = (nu * nu) as f64;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for j in 0..n {
        let rho = nodes[j];
        let inner = rho - 0.5 * h;
        let outer = rho + 0.5 * h;
        // ν = 0: no flux through ρ = h/2 (symmetric centre stencil)
        let inner_flux = if nu == 0 && j == 0 { 0.0 } else { inner / h };
        diag[j] = c * (inner_flux + outer / h + h * nu2 / rho);
        if j + 1 < n {
            off[j] = -c * outer / h;
        }
    }
    ModeBlock {
        nu,
        copies: if nu == 0 { 1 } else { 2 },
        angular_norm: c,
        nodes: nodes.to_vec(),
        mass: nodes.iter().map(|rho| c * rho * h).collect(),
        stiffness: SymTridiag::new(diag, off),
    }
}

/// Stiffness matrices, one per block.
pub fn assemble_stiffness(grid: &Grid) -> Vec<SymTridiag> {
    grid.blocks.iter().map(|b| b.stiffness.clone()).collect()
}

/// Diagonal of `W(r)` for each block: `r² f(r·x_j) B_j`.
pub fn assemble_potential(grid: &Grid, f: &PotentialField, r: f64) -> Result<Vec<Vec<f64>>> {
    if !(r > 0.0 && r <= 1.0) && r != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "shrink parameter must lie in (0, 1], got {r}"
        )));
    }
    if grid.is_disk() && !f.is_radial() {
        return Err(Error::InvalidParameter(
            "disk potentials must be radial (write them in terms of rho)".into(),
        ));
    }
    // f is radial on the disk, so one evaluation per radial node serves all modes
    let nodes = grid.interior_nodes();
    let mut scaled = Vec::with_capacity(nodes.len());
    for (j, x) in nodes.iter().enumerate() {
        let v = f.checked_value(j, &[r * x, 0.0])?;
        scaled.push(r * r * v);
    }
    Ok(grid
        .blocks
        .iter()
        .map(|b| b.mass.iter().zip(&scaled).map(|(m, s)| s * m).collect())
        .collect())
}

/// `K`, `W(r)` and `B` for every block.
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    pub r: f64,
    pub blocks: Vec<BlockTriple>,
}

#[derive(Debug, Clone)]
pub struct BlockTriple {
    pub nu: usize,
    pub copies: usize,
    pub stiffness: SymTridiag,
    pub potential: Vec<f64>,
    pub mass: Vec<f64>,
}

impl BlockTriple {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn pencil(&self) -> Pencil<'_> {
        Pencil::new(&self.stiffness, &self.potential, &self.mass)
    }
}

impl OperatorTriple {
    pub fn assemble(grid: &Grid, f: &PotentialField, r: f64) -> Result<Self> {
        let potentials = assemble_potential(grid, f, r)?;
        Ok(Self {
            r,
            blocks: grid
                .blocks
                .iter()
                .zip(potentials)
                .map(|(b, w)| BlockTriple {
                    nu: b.nu,
                    copies: b.copies,
                    stiffness: b.stiffness.clone(),
                    potential: w,
                    mass: b.mass.clone(),
                })
                .collect(),
        })
    }
}

/// `uᵀ (K + W(r)) u` for a vector living in block `block`.
pub fn evaluate_hessian_form(
    grid: &Grid,
    f: &PotentialField,
    r: f64,
    block: usize,
    u: &[f64],
) -> Result<f64> {
    let b = &grid.blocks[block];
    let mut form = b.stiffness.quad_form(u);
    for (j, (x, m)) in b.nodes.iter().zip(&b.mass).enumerate() {
        form += r * r * f.checked_value(j, &[r * x, 0.0])? * m * u[j] * u[j];
    }
    Ok(form)
}
