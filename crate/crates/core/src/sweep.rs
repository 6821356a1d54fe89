//! Sweeps the shrink parameter over `(r_min, 1]`, localises conjugate points
//! by bisection on jumps of the Morse index, and checks `M = Σ m(r)`.

use rayon::prelude::*;

use crate::crossing_form::CrossingFormResult;
use crate::discretize::{Grid, OperatorTriple};
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::spectrum::{self, EigenPair};

pub const DEFAULT_R_MIN: f64 = 0.02;
pub const DEFAULT_R_POINTS: usize = 200;
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_BISECTIONS: usize = 60;

/// The linearised problem on a fixed grid.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub potential: PotentialField,
    pub tol_zero: f64,
    pub tol_kernel: f64,
}

impl Problem {
    /// `tol_zero = None` selects the grid-scaled default; `tol_kernel` is
    /// always `5 · tol_zero`.
    pub fn new(grid: Grid, potential: PotentialField, tol_zero: Option<f64>) -> Result<Self> {
        if grid.is_disk() && !potential.is_radial() {
            return Err(Error::InvalidParameter(
                "disk potentials must be radial (write them in terms of rho)".into(),
            ));
        }
        let tol_zero = match tol_zero {
            Some(t) if t > 0.0 => t,
            Some(t) => {
                return Err(Error::InvalidParameter(format!(
                    "tol_zero must be positive, got {t}"
                )))
            }
            None => spectrum::default_tol_zero(
                grid.spacing(),
                spectrum::potential_sup(&grid, &potential),
            ),
        };
        Ok(Self {
            grid,
            potential,
            tol_zero,
            tol_kernel: 5.0 * tol_zero,
        })
    }

    pub fn operator(&self, r: f64) -> Result<OperatorTriple> {
        OperatorTriple::assemble(&self.grid, &self.potential, r)
    }
}

/// `points` uniformly spaced values from `r_min` to `r_max` inclusive.
pub fn uniform_r_grid(r_min: f64, r_max: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let step = (r_max - r_min) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                r_max
            } else {
                r_min + i as f64 * step
            }
        })
        .collect()
}

/// Lowest eigenvalues and Morse indices along the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTrace {
    pub r_values: Vec<f64>,
    /// `mu_matrix[i]` holds the lowest `k` eigenvalues at `r_values[i]`.
    pub mu_matrix: Vec<Vec<f64>>,
    /// Morse index (eigenvalues below `−tol_zero`).
    pub index_trace: Vec<usize>,
    /// Eigenvalues strictly below zero; bisection acts on this count.
    pub sign_count: Vec<usize>,
    /// Grid points with an eigenvalue inside `[−tol_zero, tol_zero]`.
    pub indeterminate: Vec<bool>,
    pub tol_zero: f64,
}

impl EigenTrace {
    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }

    pub fn index_at_start(&self) -> usize {
        self.index_trace[0]
    }

    pub fn index_at_end(&self) -> usize {
        *self.index_trace.last().expect("non-empty trace")
    }
}

/// Eigenvalues and indices at every grid value of `r`.
///
/// Fails with [`Error::AssumptionViolated`] when the last grid point (the
/// full domain) carries an eigenvalue within `tol_zero` of zero.
pub fn sweep_eigenvalues(problem: &Problem, r_grid: &[f64], k: usize) -> Result<EigenTrace> {
    if r_grid.len() < 2 {
        return Err(Error::InvalidParameter("r grid needs at least 2 points".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] <= 0.0 || r_grid[r_grid.len() - 1] > 1.0 {
        return Err(Error::InvalidParameter(
            "r grid must be strictly ascending inside (0, 1]".into(),
        ));
    }
    let tol = problem.tol_zero;
    let rows: Vec<(Vec<f64>, usize, usize, bool)> = r_grid
        .par_iter()
        .map(|&r| {
            let op = problem.operator(r)?;
            let negative = spectrum::count_below(&op, -tol);
            let nonpositive = spectrum::count_below(&op, tol);
            let strict = spectrum::count_below(&op, 0.0);
            Ok((
                spectrum::lowest_eigenvalues(&op, k),
                negative,
                strict,
                negative != nonpositive,
            ))
        })
        .collect::<Result<_>>()?;

    let last = rows.last().expect("non-empty");
    if last.3 {
        let op = problem.operator(r_grid[r_grid.len() - 1])?;
        let mu = spectrum::nearest_to_zero(&op, tol).unwrap_or(0.0);
        return Err(Error::AssumptionViolated {
            mu,
            tol,
            suggested_r_max: 1.0 - 1e-3,
        });
    }

    let mut trace = EigenTrace {
        r_values: r_grid.to_vec(),
        mu_matrix: Vec::with_capacity(rows.len()),
        index_trace: Vec::with_capacity(rows.len()),
        sign_count: Vec::with_capacity(rows.len()),
        indeterminate: Vec::with_capacity(rows.len()),
        tol_zero: tol,
    };
    for (mu, negative, strict, indeterminate) in rows {
        trace.mu_matrix.push(mu);
        trace.index_trace.push(negative);
        trace.sign_count.push(strict);
        trace.indeterminate.push(indeterminate);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CrossingFlags {
    /// Several crossings closer than `2 · refine_tol` were merged.
    pub merged: bool,
    /// The index decreased across the crossing, or oscillated inside a
    /// grid bracket.
    pub nonmonotone: bool,
    /// Index jump and kernel dimension disagree.
    pub kernel_mismatch: bool,
}

#[derive(Debug, Clone)]
pub struct ConjugatePoint {
    pub r_star: f64,
    pub bracket: (f64, f64),
    /// `m(r*)`: the absolute jump of the Morse index across the crossing.
    pub multiplicity: usize,
    /// Signed index change from left to right.
    pub index_jump: i64,
    /// B-orthonormal kernel basis at `r*`.
    pub kernel: Vec<EigenPair>,
    /// Largest eigen-residual ‖(K+W)u − μBu‖ over the kernel basis.
    pub kernel_residual: f64,
    pub gamma: Option<CrossingFormResult>,
    pub flags: CrossingFlags,
}

impl ConjugatePoint {
    /// `(n₊, n₋, n₀)` of the crossing form, once evaluated.
    pub fn signature(&self) -> Option<crate::crossing_form::Signature> {
        self.gamma.as_ref().map(|g| g.signature)
    }
}

struct RawCrossing {
    lo: f64,
    hi: f64,
    jump: i64,
    nonmonotone: bool,
}

fn refine(
    problem: &Problem,
    (lo, clo): (f64, usize),
    (hi, chi): (f64, usize),
    tol: f64,
    depth_left: usize,
    out: &mut Vec<RawCrossing>,
) -> Result<()> {
    if clo == chi {
        return Ok(());
    }
    if hi - lo <= tol || depth_left == 0 {
        out.push(RawCrossing {
            lo,
            hi,
            jump: chi as i64 - clo as i64,
            nonmonotone: chi < clo,
        });
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    let cmid = spectrum::count_below(&problem.operator(mid)?, 0.0);
    let oscillates = cmid < clo.min(chi) || cmid > clo.max(chi);
    let start = out.len();
    refine(problem, (lo, clo), (mid, cmid), tol, depth_left - 1, out)?;
    refine(problem, (mid, cmid), (hi, chi), tol, depth_left - 1, out)?;
    if oscillates {
        for c in &mut out[start..] {
            c.nonmonotone = true;
        }
    }
    Ok(())
}

/// Refine every index jump of the trace to a bracket of width
/// `≤ refine_tol`, then extract the kernel at the bracket midpoint.
pub fn locate_conjugate_points(
    problem: &Problem,
    trace: &EigenTrace,
    refine_tol: f64,
    max_bisections: usize,
) -> Result<Vec<ConjugatePoint>> {
    let brackets: Vec<usize> = (0..trace.len() - 1)
        .filter(|&i| trace.sign_count[i] != trace.sign_count[i + 1])
        .collect();
    let raw: Vec<Vec<RawCrossing>> = brackets
        .par_iter()
        .map(|&i| {
            let mut out = Vec::new();
            refine(
                problem,
                (trace.r_values[i], trace.sign_count[i]),
                (trace.r_values[i + 1], trace.sign_count[i + 1]),
                refine_tol,
                max_bisections,
                &mut out,
            )?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    // merge crossings closer than 2·refine_tol
    let mut merged: Vec<(RawCrossing, bool)> = Vec::new();
    for c in raw.into_iter().flatten() {
        if let Some((last, flag)) = merged.last_mut() {
            let mid_last = 0.5 * (last.lo + last.hi);
            let mid = 0.5 * (c.lo + c.hi);
            if mid - mid_last < 2.0 * refine_tol {
                last.hi = c.hi;
                last.jump += c.jump;
                last.nonmonotone |= c.nonmonotone;
                *flag = true;
                continue;
            }
        }
        merged.push((c, false));
    }

    merged
        .into_par_iter()
        .filter(|(c, _)| c.jump != 0)
        .map(|(c, was_merged)| {
            let r_star = 0.5 * (c.lo + c.hi);
            let op = problem.operator(r_star)?;
            let kernel = spectrum::kernel_basis(&op, problem.tol_kernel)?;
            let kernel_residual = kernel
                .iter()
                .map(|p| {
                    op.blocks[p.vector.block]
                        .pencil()
                        .residual_norm(p.mu, &p.vector.values)
                })
                .fold(0.0, f64::max);
            let multiplicity = c.jump.unsigned_abs() as usize;
            Ok(ConjugatePoint {
                r_star,
                bracket: (c.lo, c.hi),
                multiplicity,
                index_jump: c.jump,
                kernel_residual,
                flags: CrossingFlags {
                    merged: was_merged,
                    nonmonotone: c.nonmonotone || c.jump < 0,
                    kernel_mismatch: kernel.len() != multiplicity,
                },
                kernel,
                gamma: None,
            })
        })
        .collect()
}

/// Verification of `M = Σ m(r)` and of the signed identity
/// `M(r_min) − M(1) = Σ sgn Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmaleReport {
    /// Morse index at the end of the sweep (the full domain).
    pub morse_index: usize,
    /// Morse index at `r_min`; zero unless a crossing lies below `r_min`.
    pub index_at_start: usize,
    pub crossings: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub sum_m: usize,
    pub identity_holds: bool,
    /// `Σ sgn Γ` over regular crossings; `None` until crossing forms exist.
    pub signed_sum: Option<i64>,
    pub signed_identity_holds: Option<bool>,
    /// Crossings excluded from the signed sum (degenerate crossing form).
    pub irregular_crossings: usize,
    /// Per crossing: |index jump − kernel dimension| and kernel residual.
    pub residuals: Vec<(usize, f64)>,
}

pub fn smale_check(trace: &EigenTrace, crossings: &[ConjugatePoint]) -> SmaleReport {
    let morse_index = trace.index_at_end();
    let index_at_start = trace.index_at_start();
    let sum_m: usize = crossings.iter().map(|c| c.multiplicity).sum();
    let have_gamma = !crossings.is_empty() && crossings.iter().all(|c| c.gamma.is_some());
    let mut irregular = 0;
    let mut signed = 0i64;
    for c in crossings {
        if let Some(s) = c.signature() {
            if s.is_regular() {
                signed += s.sgn();
            } else {
                irregular += 1;
            }
        }
    }
    let signed_sum = if have_gamma || crossings.is_empty() {
        Some(signed)
    } else {
        None
    };
    SmaleReport {
        morse_index,
        index_at_start,
        crossings: crossings.iter().map(|c| c.r_star).collect(),
        multiplicities: crossings.iter().map(|c| c.multiplicity).collect(),
        sum_m,
        identity_holds: morse_index == sum_m,
        signed_identity_holds: signed_sum
            .map(|s| index_at_start as i64 - morse_index as i64 == s && irregular == 0),
        signed_sum,
        irregular_crossings: irregular,
        residuals: crossings
            .iter()
            .map(|c| (c.kernel.len().abs_diff(c.multiplicity), c.kernel_residual))
            .collect(),
    }
}
