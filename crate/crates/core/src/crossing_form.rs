//! The crossing form `Γ(h, r)[u] = (d/dr h_r)[u]` on the kernel at a
//! conjugate point, evaluated two independent ways.
//!
//! * volume: `Σ_j B_j · (2r f(r x_j) + r² <∇f(r x_j), x_j>) · u_j v_j`, the
//!   definition;
//! * boundary: `−(1/r) Σ_k w_k · ∂_n u(x_k) ∂_n v(x_k) · <x_k, n(x_k)>`, with
//!   the normal derivative taken by a second-order one-sided stencil.
//!
//! For a genuine kernel both agree up to discretisation error and are
//! negative definite on a star-shaped domain.

use nalgebra::DMatrix;

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::geometry::BoundarySample;
use crate::linalg::mass_inner;
use crate::potential::PotentialField;
use crate::spectrum::ModeVector;
use crate::sweep::{ConjugatePoint, Problem};

/// Default step of the finite-difference probe in `r`.
pub const DEFAULT_FD_DELTA: f64 = 1e-3;

/// Inertia `(n₊, n₋, n₀)` of a symmetric matrix at a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    /// `n₊ − n₋`.
    pub fn sgn(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }

    pub fn is_regular(&self) -> bool {
        self.zero == 0
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.positive, self.negative, self.zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingFormResult {
    pub gamma_volume: DMatrix<f64>,
    pub gamma_boundary: DMatrix<f64>,
    /// Eigenvalues of `gamma_volume`, ascending.
    pub eigenvalues: Vec<f64>,
    /// `‖Γ_vol − Γ_bdy‖_F / ‖Γ_vol‖_F`.
    pub relative_discrepancy: f64,
    pub signature: Signature,
    pub tol_sig: f64,
    /// Largest absolute deviation of the central difference in `r` from the
    /// volume form, over the kernel basis.
    pub fd_check_error: f64,
    /// `fd_check_error` divided by the largest |Γ[u]|.
    pub fd_check_relative: f64,
    /// Largest discrete L² residual of the rescaling derivative
    /// `u̇ = <∇u, x>/r` in the differentiated equation (diagnostic).
    pub rescaling_residual: f64,
}

fn angular_factor(nu: usize, copy: usize, theta: f64) -> f64 {
    let t = nu as f64 * theta;
    if copy == 0 {
        t.cos()
    } else {
        t.sin()
    }
}

/// `Γ_ij = Σ_j B_j d/ds(s² f(s x))|_{s=r} u_i u_j` on same-mode pairs;
/// distinct angular modes are orthogonal under a radial potential.
pub fn crossing_form_volume(
    grid: &Grid,
    f: &PotentialField,
    r: f64,
    kernel: &[ModeVector],
) -> Result<DMatrix<f64>> {
    let m = kernel.len();
    let mut gamma = DMatrix::zeros(m, m);
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(grid.blocks().len());
    for b in grid.blocks() {
        let mut w = Vec::with_capacity(b.len());
        for (j, (x, mass)) in b.nodes.iter().zip(&b.mass).enumerate() {
            let d = f.scaling_derivative(r, &[*x, 0.0]);
            if !d.is_finite() {
                return Err(Error::NumericalFailure {
                    r,
                    mode: b.nu,
                    message: format!("potential derivative is {d} at node {j}"),
                });
            }
            w.push(mass * d);
        }
        weights.push(w);
    }
    for i in 0..m {
        for j in 0..=i {
            let (u, v) = (&kernel[i], &kernel[j]);
            let g = if u.same_mode(v) {
                mass_inner(&weights[u.block], &u.values, &v.values)
            } else {
                0.0
            };
            gamma[(i, j)] = g;
            gamma[(j, i)] = g;
        }
    }
    Ok(gamma)
}

/// Outward normal derivative of `u` at each boundary sample point.
pub fn normal_derivatives(grid: &Grid, bs: &BoundarySample, u: &ModeVector) -> Vec<f64> {
    let stencils = grid.boundary_stencils();
    // inward one-sided derivative (−3u_b + 4u_near − u_far)/(2h), u_b = 0
    let inward = |s: &crate::discretize::BoundaryStencil| {
        (4.0 * u.values[s.near] - u.values[s.far]) / (2.0 * s.spacing)
    };
    if grid.is_disk() {
        let nu = grid.block(u.block).nu;
        let radial = -inward(&stencils[0]);
        bs.points
            .iter()
            .map(|p| radial * angular_factor(nu, u.copy, p[1].atan2(p[0])))
            .collect()
    } else {
        stencils.iter().map(|s| -inward(s)).collect()
    }
}

/// `Γ_ij = −(1/r) Σ_k w_k ∂_n u_i ∂_n u_j <x_k, n_k>`.
///
/// On the disk the sample must resolve the angular products exactly, i.e.
/// contain more than `2 ν_max` equispaced points.
pub fn crossing_form_boundary(
    grid: &Grid,
    bs: &BoundarySample,
    r: f64,
    kernel: &[ModeVector],
) -> Result<DMatrix<f64>> {
    if grid.is_disk() && bs.len() <= 2 * grid.nu_max() {
        return Err(Error::InvalidParameter(format!(
            "boundary sample of {} points cannot resolve angular modes up to {}",
            bs.len(),
            grid.nu_max()
        )));
    }
    let m = kernel.len();
    let dn: Vec<Vec<f64>> = kernel
        .iter()
        .map(|u| normal_derivatives(grid, bs, u))
        .collect();
    let mut gamma = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..bs.len())
                .map(|k| bs.weights[k] * dn[i][k] * dn[j][k] * bs.support_values[k])
                .sum();
            gamma[(i, j)] = -s / r;
            gamma[(j, i)] = -s / r;
        }
    }
    Ok(gamma)
}

/// Default signature tolerance `1e-4 · max|Γ_ij| + 1e-12`.
pub fn default_tol_sig(gamma: &DMatrix<f64>) -> f64 {
    1e-4 * gamma.amax() + 1e-12
}

fn sorted_eigenvalues(gamma: &DMatrix<f64>) -> Vec<f64> {
    if gamma.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = gamma.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn signature(gamma: &DMatrix<f64>, tol_sig: f64) -> Signature {
    let mut s = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for ev in sorted_eigenvalues(gamma) {
        if ev > tol_sig {
            s.positive += 1;
        } else if ev < -tol_sig {
            s.negative += 1;
        } else {
            s.zero += 1;
        }
    }
    s
}

/// `|Γ_vol[u] − (h_{r+δ}(u) − h_{r−δ}(u)) / (2δ)|`.
pub fn finite_difference_check(
    grid: &Grid,
    f: &PotentialField,
    r: f64,
    u: &ModeVector,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < r.min(1.0 - r)) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step {delta} must lie in (0, min(r, 1 − r)) for r = {r}"
        )));
    }
    let volume = crossing_form_volume(grid, f, r, std::slice::from_ref(u))?[(0, 0)];
    let plus = crate::discretize::evaluate_hessian_form(grid, f, r + delta, u.block, &u.values)?;
    let minus = crate::discretize::evaluate_hessian_form(grid, f, r - delta, u.block, &u.values)?;
    Ok((volume - (plus - minus) / (2.0 * delta)).abs())
}

/// Discrete L² norm of
/// `−Δu̇ + d/ds(s² f(s x))|_r u + r² f(r x) u̇` with `u̇ = <∇u, x>/r`.
///
/// `u̇` does not vanish on ∂Ω, so its boundary values enter the stencil
/// explicitly. The residual tends to zero under refinement.
pub fn rescaling_derivative_residual(
    grid: &Grid,
    f: &PotentialField,
    r: f64,
    u: &ModeVector,
) -> f64 {
    let b = grid.block(u.block);
    let n = b.len();
    let h = grid.spacing();
    let v = &u.values;
    let s = &b.nodes;
    // derivative along the line / radius, with v = 0 on the outer boundary
    let at = |i: isize| -> f64 {
        if i < 0 {
            if grid.is_disk() {
                if b.nu == 0 {
                    v[0]
                } else {
                    0.0
                }
            } else {
                0.0
            }
        } else if i as usize >= n {
            0.0
        } else {
            v[i as usize]
        }
    };
    let mut udot = vec![0.0; n];
    for i in 0..n {
        let dv = (at(i as isize + 1) - at(i as isize - 1)) / (2.0 * h);
        udot[i] = s[i] * dv / r;
    }
    // boundary values of u̇ from one-sided derivatives
    let outer = {
        let dv = (3.0 * 0.0 - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        (s[n - 1] + h) * dv / r
    };
    let k = &b.stiffness;
    let mut applied = k.matvec(&udot);
    if grid.is_disk() {
        let rim = grid.domain().diameter() / 2.0;
        applied[n - 1] += -b.angular_norm * (rim - 0.5 * h) / h * outer;
    } else {
        let inner = {
            let dv = (-3.0 * 0.0 + 4.0 * v[0] - v[1]) / (2.0 * h);
            (s[0] - h) * dv / r
        };
        applied[0] += -inner / h;
        applied[n - 1] += -outer / h;
    }
    let mut norm2 = 0.0;
    for i in 0..n {
        let x = [s[i], 0.0];
        let res = applied[i] / b.mass[i]
            + f.scaling_derivative(r, &x) * v[i]
            + r * r * f.value(&[r * s[i], 0.0]) * udot[i];
        norm2 += b.mass[i] * res * res;
    }
    norm2.sqrt()
}

/// Evaluate both crossing forms, the signature and the diagnostics at a
/// conjugate point.
pub fn evaluate_crossing(
    problem: &Problem,
    bs: &BoundarySample,
    cp: &ConjugatePoint,
    fd_delta: f64,
) -> Result<CrossingFormResult> {
    let grid = &problem.grid;
    let f = &problem.potential;
    let r = cp.r_star;
    let kernel: Vec<ModeVector> = cp.kernel.iter().map(|p| p.vector.clone()).collect();
    let gamma_volume = crossing_form_volume(grid, f, r, &kernel)?;
    let gamma_boundary = crossing_form_boundary(grid, bs, r, &kernel)?;
    let scale = gamma_volume.norm();
    let relative_discrepancy = if scale > 0.0 {
        (&gamma_volume - &gamma_boundary).norm() / scale
    } else {
        (&gamma_volume - &gamma_boundary).norm()
    };
    let tol_sig = default_tol_sig(&gamma_volume);
    let signature = signature(&gamma_volume, tol_sig);
    let delta = fd_delta.min(0.5 * r.min(1.0 - r));
    let mut fd_check_error = 0.0f64;
    let mut rescaling_residual = 0.0f64;
    for u in &kernel {
        fd_check_error = fd_check_error.max(finite_difference_check(grid, f, r, u, delta)?);
        rescaling_residual = rescaling_residual.max(rescaling_derivative_residual(grid, f, r, u));
    }
    let diag_max = (0..kernel.len())
        .map(|i| gamma_volume[(i, i)].abs())
        .fold(0.0, f64::max);
    Ok(CrossingFormResult {
        eigenvalues: sorted_eigenvalues(&gamma_volume),
        gamma_volume,
        gamma_boundary,
        relative_discrepancy,
        signature,
        tol_sig,
        fd_check_error,
        fd_check_relative: if diag_max > 0.0 {
            fd_check_error / diag_max
        } else {
            fd_check_error
        },
        rescaling_residual,
    })
}

/// Fill in the crossing form of every conjugate point.
pub fn evaluate_all(
    problem: &Problem,
    bs: &BoundarySample,
    crossings: &mut [ConjugatePoint],
    fd_delta: f64,
) -> Result<()> {
    use rayon::prelude::*;
    let results: Vec<CrossingFormResult> = crossings
        .par_iter()
        .map(|cp| evaluate_crossing(problem, bs, cp, fd_delta))
        .collect::<Result<_>>()?;
    for (cp, g) in crossings.iter_mut().zip(results) {
        cp.gamma = Some(g);
    }
    Ok(())
}
