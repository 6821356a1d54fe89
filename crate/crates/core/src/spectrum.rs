//! Generalized eigenproblem `(K + W(r)) u = μ B u`: lowest eigenpairs,
//! Morse index and kernel bases.

use crate::discretize::{Grid, OperatorTriple};
use crate::error::{Error, Result};
use crate::linalg::mass_inner;
use crate::potential::PotentialField;

/// A discrete function supported on one block and one angular copy.
///
/// On the interval `block == copy == 0`. On the disk the represented
/// function is `values(ρ) · cos(νθ)` for `copy == 0` and `· sin(νθ)` for
/// `copy == 1`, with ν the block's angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    pub block: usize,
    pub copy: usize,
    pub values: Vec<f64>,
}

impl ModeVector {
    pub fn same_mode(&self, other: &ModeVector) -> bool {
        self.block == other.block && self.copy == other.copy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub mu: f64,
    /// B-normalised eigenvector.
    pub vector: ModeVector,
    /// Position in ascending order (0-based).
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub r: f64,
    pub pairs: Vec<EigenPair>,
    pub negative_count: usize,
}

impl SpectrumSlice {
    pub fn compute(op: &OperatorTriple, k: usize, tol_zero: f64) -> Result<Self> {
        Ok(Self {
            r: op.r,
            pairs: lowest_eigenpairs(op, k)?,
            negative_count: count_below(op, -tol_zero),
        })
    }
}

/// `10 h² sup|f| + 1e-9`: the discrete spectrum moves by O(h²), so the
/// zero tolerance scales with the grid.
pub fn default_tol_zero(spacing: f64, potential_sup: f64) -> f64 {
    10.0 * spacing * spacing * potential_sup + 1e-9
}

/// `sup |f|` over the grid nodes of the full domain.
pub fn potential_sup(grid: &Grid, f: &PotentialField) -> f64 {
    let mut sup = 0.0f64;
    if grid.is_disk() {
        for rho in grid.interior_nodes() {
            sup = sup.max(f.value(&[*rho, 0.0]).abs());
        }
        sup = sup.max(f.value(&[0.0, 0.0]).abs());
    } else {
        for x in grid.interior_nodes() {
            sup = sup.max(f.value(&[*x]).abs());
        }
    }
    sup
}

/// Generalized eigenvalues strictly below `sigma`, with angular multiplicity.
pub fn count_below(op: &OperatorTriple, sigma: f64) -> usize {
    op.blocks
        .iter()
        .map(|b| b.copies * b.pencil().count_below(sigma))
        .sum()
}

/// The `k` algebraically smallest eigenvalues, with multiplicity.
pub fn lowest_eigenvalues(op: &OperatorTriple, k: usize) -> Vec<f64> {
    let mut all: Vec<f64> = Vec::new();
    for b in &op.blocks {
        // at most k/copies eigenvalues of this block can make the cut
        let want = k.div_ceil(b.copies);
        for mu in b.pencil().lowest_eigenvalues(want) {
            for _ in 0..b.copies {
                all.push(mu);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    all
}

fn block_eigenpairs(op: &OperatorTriple, block: usize, indices: std::ops::Range<usize>) -> Result<Vec<(f64, Vec<f64>)>> {
    let b = &op.blocks[block];
    let pencil = b.pencil();
    let norm = pencil.operator_norm();
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for j in indices {
        let mu = pencil.eigenvalue(j);
        let mut u = pencil.eigenvector(mu).ok_or_else(|| Error::NumericalFailure {
            r: op.r,
            mode: b.nu,
            message: format!("inverse iteration failed for eigenvalue {mu:e}"),
        })?;
        // clustered eigenvalues within a block: B-orthogonalise
        for (_, prev) in &out {
            let c = mass_inner(&b.mass, prev, &u);
            u.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
        }
        let nrm = mass_inner(&b.mass, &u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= nrm);
        let res = pencil.residual_norm(mu, &u);
        if !(res <= 1e-8 * norm) {
            return Err(Error::NumericalFailure {
                r: op.r,
                mode: b.nu,
                message: format!("eigenpair residual {res:e} exceeds 1e-8·‖K+W‖ = {:e}", 1e-8 * norm),
            });
        }
        out.push((mu, u));
    }
    Ok(out)
}

/// The `k` smallest eigenpairs, B-orthonormal, ascending.
pub fn lowest_eigenpairs(op: &OperatorTriple, k: usize) -> Result<Vec<EigenPair>> {
    let cut = lowest_eigenvalues(op, k);
    let Some(&top) = cut.last() else {
        return Ok(Vec::new());
    };
    let mut pairs = Vec::new();
    for (bi, b) in op.blocks.iter().enumerate() {
        let pencil = b.pencil();
        let m = pencil.count_below(top).min(b.len());
        // include the block's eigenvalue equal to `top` when it is the cutoff
        let m = if m < b.len() && pencil.eigenvalue(m) <= top { m + 1 } else { m };
        for (mu, u) in block_eigenpairs(op, bi, 0..m)? {
            for copy in 0..b.copies {
                pairs.push(EigenPair {
                    mu,
                    vector: ModeVector {
                        block: bi,
                        copy,
                        values: u.clone(),
                    },
                    index: 0,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.mu
            .total_cmp(&b.mu)
            .then(a.vector.block.cmp(&b.vector.block))
            .then(a.vector.copy.cmp(&b.vector.copy))
    });
    pairs.truncate(k);
    for (i, p) in pairs.iter_mut().enumerate() {
        p.index = i;
    }
    Ok(pairs)
}

/// Number of eigenvalues below `−tol_zero`, or [`Error::IndeterminateIndex`]
/// when some eigenvalue lies in `[−tol_zero, tol_zero]`.
pub fn morse_index(op: &OperatorTriple, tol_zero: f64) -> Result<usize> {
    let negative = count_below(op, -tol_zero);
    let nonpositive = count_below(op, tol_zero);
    if negative == nonpositive {
        return Ok(negative);
    }
    let mu = nearest_to_zero(op, tol_zero).unwrap_or(0.0);
    Err(Error::IndeterminateIndex {
        r: op.r,
        mu,
        tol: tol_zero,
    })
}

/// Eigenvalue of smallest magnitude inside `[−tol, tol]`, if any.
pub fn nearest_to_zero(op: &OperatorTriple, tol: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for b in &op.blocks {
        let p = b.pencil();
        for j in p.count_below(-tol)..p.count_below(tol) {
            let mu = p.eigenvalue(j);
            if best.is_none_or(|m: f64| mu.abs() < m.abs()) {
                best = Some(mu);
            }
        }
    }
    best
}

/// B-orthonormal basis of the eigenspace `{|μ| ≤ tol_kernel}`; its length
/// is the multiplicity of the crossing.
pub fn kernel_basis(op: &OperatorTriple, tol_kernel: f64) -> Result<Vec<EigenPair>> {
    let mut basis = Vec::new();
    for (bi, b) in op.blocks.iter().enumerate() {
        let p = b.pencil();
        let range = p.count_below(-tol_kernel)..p.count_below(tol_kernel);
        for (mu, u) in block_eigenpairs(op, bi, range)? {
            for copy in 0..b.copies {
                basis.push(EigenPair {
                    mu,
                    vector: ModeVector {
                        block: bi,
                        copy,
                        values: u.clone(),
                    },
                    index: basis.len(),
                });
            }
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptyKernel {
            r: op.r,
            tol: tol_kernel,
        });
    }
    Ok(basis)
}

/// `uᵀ B v` between mode vectors; distinct modes are orthogonal.
pub fn mode_inner(op: &OperatorTriple, u: &ModeVector, v: &ModeVector) -> f64 {
    if !u.same_mode(v) {
        return 0.0;
    }
    mass_inner(&op.blocks[u.block].mass, &u.values, &v.values)
}
