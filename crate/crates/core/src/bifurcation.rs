//! Newton solver for the rescaled semilinear problem
//! `−Δu + r² g(r·x, u) = 0` with `g(x, ξ) = f ξ + q ξ² + κ ξ³`, and branch
//! probes near conjugate points.
//!
//! On the disk the unknowns are the cosine harmonics `a_ν(ρ)`, ν ≤ ν_max,
//! of `u(ρ, θ) = Σ a_ν(ρ) cos(νθ)`. The nonlinear terms are projected back
//! onto the harmonics by trapezoidal quadrature in θ with enough points to
//! be exact for quartic products. Solutions containing `sin(νθ)` are
//! rotations of cosine solutions and are not represented separately.

use rayon::prelude::*;

use crate::discretize::{Grid, OperatorTriple};
use crate::error::{Error, Result};
use crate::linalg::{BandMatrix, SymTridiag};
use crate::potential::PotentialField;
use crate::spectrum::{self, ModeVector};
use crate::sweep::{ConjugatePoint, Problem};

pub const DEFAULT_TOL_NEWTON: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_MATCH_TOL: f64 = 5e-3;
pub const DEFAULT_DELTA_MAX: f64 = 0.08;
/// Fractions of `δ_max` probed on each side of a crossing.
pub const DELTA_FRACTIONS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
/// Minimal B-overlap between a branch solution and the kernel mode.
pub const WITNESS_OVERLAP: f64 = 0.5;

/// Polynomial nonlinearity `g(x, ξ) = f(x) ξ + q(x) ξ² + κ(x) ξ³`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pub f: PotentialField,
    pub q: PotentialField,
    pub kappa: PotentialField,
}

impl NonlinearitySpec {
    pub fn new(f: PotentialField, q: PotentialField, kappa: PotentialField) -> Self {
        Self { f, q, kappa }
    }

    /// `g(x, ξ) = f ξ + κ ξ³`.
    pub fn cubic(f: PotentialField, kappa: f64) -> Self {
        let dim = f.dimension();
        Self {
            f,
            q: PotentialField::zero(dim),
            kappa: PotentialField::constant(kappa, dim),
        }
    }

    /// `g = f ξ`: no nontrivial solutions off the kernel.
    pub fn linear(f: PotentialField) -> Self {
        let dim = f.dimension();
        Self {
            f,
            q: PotentialField::zero(dim),
            kappa: PotentialField::zero(dim),
        }
    }

    pub fn is_odd(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_linear(&self) -> bool {
        self.q.is_zero() && self.kappa.is_zero()
    }

    pub fn g(&self, x: &[f64], xi: f64) -> f64 {
        xi * (self.f.value(x) + xi * (self.q.value(x) + xi * self.kappa.value(x)))
    }

    pub fn dg(&self, x: &[f64], xi: f64) -> f64 {
        self.f.value(x) + xi * (2.0 * self.q.value(x) + 3.0 * xi * self.kappa.value(x))
    }

    /// Primitive `G(x, t) = ½ f t² + ⅓ q t³ + ¼ κ t⁴`.
    #[allow(non_snake_case)]
    pub fn G(&self, x: &[f64], t: f64) -> f64 {
        t * t * (0.5 * self.f.value(x) + t * (self.q.value(x) / 3.0 + 0.25 * t * self.kappa.value(x)))
    }
}

/// Unknowns `a_ν(ρ_j)` stored at `j · harmonics + ν`; one harmonic on the
/// interval.
#[derive(Debug, Clone)]
pub struct NewtonSpace {
    n: usize,
    harmonics: usize,
    /// Radial quadrature weight per node (`ρ_j h` on the disk).
    weights: Vec<f64>,
    /// Radial coordinate per node.
    nodes: Vec<f64>,
    /// `cos(ν θ_k)` for each quadrature angle, row-major `[k][ν]`.
    cosines: Vec<f64>,
    angle_weight: f64,
    angles: usize,
    stiffness: Vec<SymTridiag>,
}

impl NewtonSpace {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let stiffness: Vec<SymTridiag> = grid.blocks().iter().map(|b| b.stiffness.clone()).collect();
        if grid.is_disk() {
            let harmonics = grid.nu_max() + 1;
            let angles = 4 * harmonics + 2;
            let dtheta = 2.0 * std::f64::consts::PI / angles as f64;
            let mut cosines = Vec::with_capacity(angles * harmonics);
            for k in 0..angles {
                for nu in 0..harmonics {
                    cosines.push((nu as f64 * k as f64 * dtheta).cos());
                }
            }
            let b0 = grid.block(0);
            Self {
                n,
                harmonics,
                weights: b0.mass.iter().map(|m| m / b0.angular_norm).collect(),
                nodes: b0.nodes.clone(),
                cosines,
                angle_weight: dtheta,
                angles,
                stiffness,
            }
        } else {
            let b0 = grid.block(0);
            Self {
                n,
                harmonics: 1,
                weights: b0.mass.clone(),
                nodes: b0.nodes.clone(),
                cosines: vec![1.0],
                angle_weight: 1.0,
                angles: 1,
                stiffness,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n * self.harmonics
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    fn idx(&self, j: usize, nu: usize) -> usize {
        j * self.harmonics + nu
    }

    fn harmonic(&self, u: &[f64], nu: usize) -> Vec<f64> {
        (0..self.n).map(|j| u[self.idx(j, nu)]).collect()
    }

    /// Place a mode vector in the cosine space; a sine copy is rotated onto
    /// the cosine.
    pub fn embed(&self, grid: &Grid, v: &ModeVector) -> Vec<f64> {
        let nu = grid.block(v.block).nu;
        let mut u = vec![0.0; self.dim()];
        for (j, x) in v.values.iter().enumerate() {
            u[self.idx(j, nu)] = *x;
        }
        u
    }

    /// Discrete H¹₀ norm `(Σ_ν a_νᵀ K_ν a_ν)^½`.
    pub fn h1_norm(&self, u: &[f64]) -> f64 {
        (0..self.harmonics)
            .map(|nu| self.stiffness[nu].quad_form(&self.harmonic(u, nu)))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// Discrete L² norm `(Σ_ν a_νᵀ B_ν a_ν)^½`.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.mass_inner(u, u).max(0.0).sqrt()
    }

    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for nu in 0..self.harmonics {
                let c = if self.harmonics == 1 {
                    1.0
                } else if nu == 0 {
                    2.0 * std::f64::consts::PI
                } else {
                    std::f64::consts::PI
                };
                let i = self.idx(j, nu);
                s += c * self.weights[j] * u[i] * v[i];
            }
        }
        s
    }

    /// Per node and harmonic, the projected nonlinear part
    /// `r² w_j ∫ (q u² + κ u³) cos(νθ) dθ`, and optionally its Jacobian.
    fn nonlinear(
        &self,
        gs: &NonlinearitySpec,
        r: f64,
        u: &[f64],
        mut jac: Option<&mut BandMatrix>,
    ) -> Vec<f64> {
        let h = self.harmonics;
        let mut out = vec![0.0; self.dim()];
        if gs.q.is_zero() && gs.kappa.is_zero() {
            return out;
        }
        let mut dvals = vec![0.0; self.angles];
        for j in 0..self.n {
            let x = [r * self.nodes[j], 0.0];
            let (q, kappa) = (gs.q.value(&x), gs.kappa.value(&x));
            let scale = r * r * self.weights[j] * self.angle_weight;
            let base = self.idx(j, 0);
            for k in 0..self.angles {
                let cos = &self.cosines[k * h..(k + 1) * h];
                let uk: f64 = cos.iter().zip(&u[base..base + h]).map(|(c, a)| c * a).sum();
                let p = uk * uk * (q + kappa * uk);
                dvals[k] = uk * (2.0 * q + 3.0 * kappa * uk);
                for nu in 0..h {
                    out[base + nu] += scale * p * cos[nu];
                }
            }
            if let Some(jm) = jac.as_deref_mut() {
                for nu in 0..h {
                    for mu in 0..h {
                        let s: f64 = (0..self.angles)
                            .map(|k| dvals[k] * self.cosines[k * h + nu] * self.cosines[k * h + mu])
                            .sum();
                        jm.add(base + nu, base + mu, scale * s);
                    }
                }
            }
        }
        out
    }

    fn linear_apply(&self, op: &OperatorTriple, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for nu in 0..self.harmonics {
            let a = self.harmonic(u, nu);
            let b = &op.blocks[nu];
            let ka = b.stiffness.matvec(&a);
            for j in 0..self.n {
                out[self.idx(j, nu)] = ka[j] + b.potential[j] * a[j];
            }
        }
        out
    }

    fn linear_jacobian(&self, op: &OperatorTriple) -> BandMatrix {
        let h = self.harmonics;
        let mut m = BandMatrix::new(self.dim(), h, h);
        for nu in 0..h {
            let b = &op.blocks[nu];
            for j in 0..self.n {
                let i = self.idx(j, nu);
                m.set(i, i, b.stiffness.diag[j] + b.potential[j]);
                if j + 1 < self.n {
                    let i2 = self.idx(j + 1, nu);
                    m.set(i, i2, b.stiffness.off[j]);
                    m.set(i2, i, b.stiffness.off[j]);
                }
            }
        }
        m
    }
}

fn check_problem(grid: &Grid, gs: &NonlinearitySpec, r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1], got {r}")));
    }
    if grid.is_disk() && !(gs.f.is_radial() && gs.q.is_radial() && gs.kappa.is_radial()) {
        return Err(Error::InvalidParameter(
            "disk nonlinearity coefficients must be radial".into(),
        ));
    }
    Ok(())
}

/// `K u + r² B g(r·x, u)` nodewise (projected onto harmonics on the disk).
pub fn residual(
    grid: &Grid,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    r: f64,
    u: &[f64],
) -> Result<Vec<f64>> {
    check_problem(grid, gs, r)?;
    let op = OperatorTriple::assemble(grid, &gs.f, r)?;
    Ok(residual_with(space, &op, gs, r, u))
}

fn residual_with(
    space: &NewtonSpace,
    op: &OperatorTriple,
    gs: &NonlinearitySpec,
    r: f64,
    u: &[f64],
) -> Vec<f64> {
    let mut res = space.linear_apply(op, u);
    let nl = space.nonlinear(gs, r, u, None);
    res.iter_mut().zip(nl).for_each(|(a, b)| *a += b);
    res
}

/// `K + r² B ∂g/∂ξ(r·x, u)` as a band matrix of half-width `harmonics`.
/// At `u = 0` the entries are exactly those of `K + W(r)`.
pub fn jacobian(
    grid: &Grid,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    r: f64,
    u: &[f64],
) -> Result<BandMatrix> {
    check_problem(grid, gs, r)?;
    let op = OperatorTriple::assemble(grid, &gs.f, r)?;
    Ok(jacobian_with(space, &op, gs, r, u))
}

fn jacobian_with(
    space: &NewtonSpace,
    op: &OperatorTriple,
    gs: &NonlinearitySpec,
    r: f64,
    u: &[f64],
) -> BandMatrix {
    let mut m = space.linear_jacobian(op);
    space.nonlinear(gs, r, u, Some(&mut m));
    m
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Residual norm before each iteration and at the end.
    pub history: Vec<f64>,
}

/// Full Newton steps with step-halving on the residual norm until
/// `‖R(u)‖ ≤ tol · (1 + ‖u‖)` (Euclidean norms of the nodal vectors).
pub fn newton_solve(
    grid: &Grid,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    r: f64,
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonSolution> {
    check_problem(grid, gs, r)?;
    if u0.len() != space.dim() || u0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial guess must be finite and match the Newton space".into(),
        ));
    }
    let op = OperatorTriple::assemble(grid, &gs.f, r)?;
    let mut u = u0.to_vec();
    let mut res = residual_with(space, &op, gs, r, &u);
    let mut rn = norm2(&res);
    let mut history = vec![rn];
    for it in 0..=max_iter {
        if rn <= tol * (1.0 + norm2(&u)) {
            return Ok(NewtonSolution {
                u,
                iterations: it,
                residual_norm: rn,
                history,
            });
        }
        if it == max_iter {
            break;
        }
        let lu = jacobian_with(space, &op, gs, r, &u)
            .factor()
            .map_err(|_| Error::NoConvergence {
                history: history.clone(),
            })?;
        let mut step: Vec<f64> = res.iter().map(|x| -x).collect();
        lu.solve_in_place(&mut step);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let tres = residual_with(space, &op, gs, r, &trial);
            let tn = norm2(&tres);
            if tn < rn || tn <= tol * (1.0 + norm2(&trial)) {
                u = trial;
                res = tres;
                rn = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(rn);
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence { history })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Branch on `r > r*`.
    Above,
    /// Branch on `r < r*`.
    Below,
}

impl Side {
    pub fn symbol(&self) -> &'static str {
        match self {
            Side::Above => "+",
            Side::Below => "-",
        }
    }
}

/// Nontrivial solutions at a sequence of `r` approaching `r*` from one side.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSample {
    pub side: Side,
    /// Offsets `δ`, decreasing.
    pub deltas: Vec<f64>,
    pub r_values: Vec<f64>,
    pub solutions: Vec<Vec<f64>>,
    /// `(uᵀ K u)^½`.
    pub norms_h1: Vec<f64>,
    pub norms_l2: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `|<u, φ>_B| / ‖u‖_B` with φ the kernel mode.
    pub overlaps: Vec<f64>,
    /// One-mode amplitude predicted at each `r`.
    pub predicted_amplitudes: Vec<f64>,
}

impl BranchSample {
    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }

    /// Norms strictly decrease as `δ` decreases.
    pub fn norms_decrease(&self) -> bool {
        self.norms_h1.windows(2).all(|w| w[1] < w[0])
    }

    /// Root of the line through the two samples closest to `r*` in
    /// `‖u‖²` (pitchfork) or `‖u‖` (transcritical).
    pub fn extrapolated_root(&self, transcritical: bool) -> Option<f64> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let (ra, rb) = (self.r_values[n - 1], self.r_values[n - 2]);
        let p = if transcritical { 1 } else { 2 };
        let (na, nb) = (self.norms_h1[n - 1].powi(p), self.norms_h1[n - 2].powi(p));
        if na == nb {
            return None;
        }
        Some(ra - na * (rb - ra) / (nb - na))
    }
}

#[derive(Debug, Clone)]
pub struct ProbeSettings {
    pub epsilon: f64,
    /// Largest offset from `r*`; the effective value also respects
    /// neighbouring crossings and the ends of `(r_min, 1]`.
    pub delta_max: f64,
    pub tol_newton: f64,
    pub max_iter: usize,
    pub match_tol: f64,
}

impl ProbeSettings {
    /// `ε = 0.1 · diameter^{−1/2}`.
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            epsilon: 0.1 / grid.domain().diameter().sqrt(),
            delta_max: DEFAULT_DELTA_MAX,
            tol_newton: DEFAULT_TOL_NEWTON,
            max_iter: DEFAULT_MAX_ITER,
            match_tol: DEFAULT_MATCH_TOL,
        }
    }
}

/// Coefficients of the one-mode reduction `μ a + β₂ a² + β₃ a³ = 0`
/// along a B-normalised mode φ at shrink factor `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneModeReduction {
    pub mu: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl OneModeReduction {
    pub fn new(grid: &Grid, space: &NewtonSpace, gs: &NonlinearitySpec, r: f64, phi: &[f64]) -> Result<Self> {
        let op = OperatorTriple::assemble(grid, &gs.f, r)?;
        let lin = space.linear_apply(&op, phi);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mu = dot(phi, &lin);
        let q_only = NonlinearitySpec::new(gs.f.clone(), gs.q.clone(), PotentialField::zero(gs.f.dimension()));
        let k_only = NonlinearitySpec::new(gs.f.clone(), PotentialField::zero(gs.f.dimension()), gs.kappa.clone());
        let beta2 = dot(phi, &space.nonlinear(&q_only, r, phi, None));
        let beta3 = dot(phi, &space.nonlinear(&k_only, r, phi, None));
        Ok(Self { mu, beta2, beta3 })
    }

    /// Nonzero real amplitudes, smallest magnitude first.
    pub fn amplitudes(&self) -> Vec<f64> {
        let Self { mu, beta2, beta3 } = *self;
        let mut roots = Vec::new();
        if beta3 != 0.0 {
            let disc = beta2 * beta2 - 4.0 * beta3 * mu;
            if disc >= 0.0 {
                let s = disc.sqrt();
                roots.push((-beta2 + s) / (2.0 * beta3));
                roots.push((-beta2 - s) / (2.0 * beta3));
            }
        } else if beta2 != 0.0 {
            roots.push(-mu / beta2);
        }
        roots.retain(|a| *a != 0.0 && a.is_finite());
        roots.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        roots
    }
}

fn nontrivial(space: &NewtonSpace, u: &[f64], tol: f64) -> bool {
    space.h1_norm(u) > 10.0 * tol && norm2(u) > 1e3 * tol
}

/// Look for nontrivial solutions at `r* ± δ` for each `δ` in `deltas`
/// (decreasing). Seeds are the one-mode amplitudes along φ, then `±ε φ`.
#[allow(clippy::too_many_arguments)]
pub fn branch_probe_with(
    grid: &Grid,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    r_star: f64,
    phi: &[f64],
    deltas: &[f64],
    settings: &ProbeSettings,
) -> Result<Vec<BranchSample>> {
    let mut found = Vec::new();
    for side in [Side::Above, Side::Below] {
        let mut sample = BranchSample {
            side,
            deltas: Vec::new(),
            r_values: Vec::new(),
            solutions: Vec::new(),
            norms_h1: Vec::new(),
            norms_l2: Vec::new(),
            residuals: Vec::new(),
            overlaps: Vec::new(),
            predicted_amplitudes: Vec::new(),
        };
        for &delta in deltas {
            let r = match side {
                Side::Above => r_star + delta,
                Side::Below => r_star - delta,
            };
            if !(r > 0.0 && r <= 1.0) {
                continue;
            }
            let reduction = OneModeReduction::new(grid, space, gs, r, phi)?;
            let amps = reduction.amplitudes();
            let mut seeds: Vec<f64> = amps.clone();
            seeds.push(settings.epsilon);
            seeds.push(-settings.epsilon);
            for a in seeds {
                let u0: Vec<f64> = phi.iter().map(|x| a * x).collect();
                let Ok(sol) = newton_solve(grid, space, gs, r, &u0, settings.tol_newton, settings.max_iter) else {
                    continue;
                };
                if !nontrivial(space, &sol.u, settings.tol_newton) {
                    continue;
                }
                let l2 = space.l2_norm(&sol.u);
                let overlap = space.mass_inner(&sol.u, phi).abs() / l2;
                if overlap < WITNESS_OVERLAP {
                    continue;
                }
                sample.deltas.push(delta);
                sample.r_values.push(r);
                sample.norms_h1.push(space.h1_norm(&sol.u));
                sample.norms_l2.push(l2);
                sample.residuals.push(sol.residual_norm);
                sample.overlaps.push(overlap);
                sample.predicted_amplitudes.push(amps.first().copied().unwrap_or(0.0).abs());
                sample.solutions.push(sol.u);
                break;
            }
        }
        if !sample.is_empty() {
            found.push(sample);
        }
    }
    Ok(found)
}

/// Offsets `δ_max · {1, ½, ¼, ⅛}` with `δ_max ≤ half the distance from r*
/// to its nearest neighbour among the other crossings, r_min and 1`.
pub fn delta_list(r_star: f64, neighbours: &[f64], settings: &ProbeSettings) -> Vec<f64> {
    let gap = neighbours
        .iter()
        .map(|x| (x - r_star).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let dmax = settings.delta_max.min(0.5 * gap);
    DELTA_FRACTIONS.iter().map(|f| f * dmax).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPoint {
    pub r_star_detected: f64,
    /// Index into the conjugate-point list.
    pub matched_conjugate: usize,
    pub matched_conjugate_r: f64,
    pub distance: f64,
    pub witness: BranchSample,
    /// Other branch samples found at the same crossing.
    pub extra_branches: Vec<BranchSample>,
}

impl BifurcationPoint {
    pub fn matched(&self, match_tol: f64) -> bool {
        self.distance <= match_tol
    }
}

/// Midpoint between consecutive conjugate points, expected to carry only
/// the trivial solution near zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointProbe {
    pub r: f64,
    pub seed_norm: f64,
    pub final_norm: f64,
    pub converged: bool,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corollary2Check {
    pub morse_index: usize,
    pub max_multiplicity: usize,
    /// `⌊M / max m(r)⌋`, zero without crossings.
    pub bound: usize,
    pub distinct_detected: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationScan {
    pub points: Vec<BifurcationPoint>,
    /// Conjugate points without a detected branch, with the reason.
    pub missed: Vec<(usize, String)>,
    pub midpoints: Vec<MidpointProbe>,
    pub corollary2: Corollary2Check,
    pub match_tol: f64,
}

impl BifurcationScan {
    /// Every conjugate point carries a matched bifurcation point and every
    /// midpoint probe returned to the trivial solution.
    pub fn equivalence_holds(&self) -> bool {
        self.missed.is_empty()
            && self.points.iter().all(|p| p.matched(self.match_tol))
            && self.midpoints.iter().all(|m| m.trivial)
    }
}

/// Probe one conjugate point. On the disk each distinct angular block of
/// the kernel is tried in turn; any branch counts as a detection.
pub fn branch_probe(
    problem: &Problem,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    cp: &ConjugatePoint,
    deltas: &[f64],
    settings: &ProbeSettings,
) -> Result<Vec<BranchSample>> {
    let grid = &problem.grid;
    let mut tried: Vec<usize> = Vec::new();
    for pair in &cp.kernel {
        if tried.contains(&pair.vector.block) {
            continue;
        }
        tried.push(pair.vector.block);
        let mut phi = space.embed(grid, &pair.vector);
        let nrm = space.l2_norm(&phi);
        phi.iter_mut().for_each(|x| *x /= nrm);
        let found = branch_probe_with(grid, space, gs, cp.r_star, &phi, deltas, settings)?;
        if !found.is_empty() {
            return Ok(found);
        }
    }
    Err(Error::BranchNotFound { r_star: cp.r_star })
}

fn midpoint_probe(
    problem: &Problem,
    space: &NewtonSpace,
    gs: &NonlinearitySpec,
    r: f64,
    settings: &ProbeSettings,
) -> Result<MidpointProbe> {
    let grid = &problem.grid;
    let op = problem.operator(r)?;
    let lowest = spectrum::lowest_eigenpairs(&op, 1)?;
    let mut u0 = space.embed(grid, &lowest[0].vector);
    let nrm = space.l2_norm(&u0);
    u0.iter_mut().for_each(|x| *x *= settings.epsilon / nrm);
    let seed_norm = space.h1_norm(&u0);
    match newton_solve(grid, space, gs, r, &u0, settings.tol_newton, settings.max_iter) {
        Ok(sol) => {
            let final_norm = space.h1_norm(&sol.u);
            Ok(MidpointProbe {
                r,
                seed_norm,
                final_norm,
                converged: true,
                trivial: !nontrivial(space, &sol.u, settings.tol_newton),
            })
        }
        Err(Error::NoConvergence { .. }) => Ok(MidpointProbe {
            r,
            seed_norm,
            final_norm: f64::NAN,
            converged: false,
            trivial: false,
        }),
        Err(e) => Err(e),
    }
}

/// Probe every conjugate point and the midpoints between consecutive ones,
/// then evaluate the lower bound `⌊M / max m(r)⌋` on the number of
/// distinct bifurcation points.
pub fn bifurcation_scan(
    problem: &Problem,
    gs: &NonlinearitySpec,
    crossings: &[ConjugatePoint],
    r_min: f64,
    morse_index: usize,
    settings: &ProbeSettings,
) -> Result<BifurcationScan> {
    let grid = &problem.grid;
    if gs.f != problem.potential {
        return Err(Error::InvalidParameter(
            "the nonlinearity's linear part must equal the swept potential".into(),
        ));
    }
    let space = NewtonSpace::new(grid);
    let transcritical = !gs.q.is_zero();
    let mut anchors: Vec<f64> = crossings.iter().map(|c| c.r_star).collect();
    anchors.push(r_min);
    anchors.push(1.0);

    let outcomes: Vec<Result<Vec<BranchSample>>> = crossings
        .par_iter()
        .map(|cp| {
            let deltas = delta_list(cp.r_star, &anchors, settings);
            branch_probe(problem, &space, gs, cp, &deltas, settings)
        })
        .collect();

    let mut points = Vec::new();
    let mut missed = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(mut samples) => {
                // prefer the sample with the most points as the witness
                samples.sort_by_key(|s| std::cmp::Reverse(s.len()));
                let witness = samples.remove(0);
                let detected = witness
                    .extrapolated_root(transcritical)
                    .unwrap_or(witness.r_values[witness.len() - 1]);
                // nearest conjugate point
                let (j, dist) = crossings
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (j, (c.r_star - detected).abs()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("non-empty crossing list");
                points.push(BifurcationPoint {
                    r_star_detected: detected,
                    matched_conjugate: j,
                    matched_conjugate_r: crossings[j].r_star,
                    distance: dist,
                    witness,
                    extra_branches: samples,
                });
            }
            Err(Error::BranchNotFound { .. }) => {
                missed.push((i, "no nontrivial solution near the crossing".to_string()));
            }
            Err(e) => missed.push((i, e.to_string())),
        }
    }

    let mids: Vec<f64> = crossings
        .windows(2)
        .map(|w| 0.5 * (w[0].r_star + w[1].r_star))
        .collect();
    let midpoints: Vec<MidpointProbe> = mids
        .par_iter()
        .map(|&r| midpoint_probe(problem, &space, gs, r, settings))
        .collect::<Result<_>>()?;

    let max_multiplicity = crossings.iter().map(|c| c.multiplicity).max().unwrap_or(0);
    let bound = if max_multiplicity == 0 {
        0
    } else {
        morse_index / max_multiplicity
    };
    let mut matched: Vec<usize> = points
        .iter()
        .filter(|p| p.matched(settings.match_tol))
        .map(|p| p.matched_conjugate)
        .collect();
    matched.sort_unstable();
    matched.dedup();
    let distinct_detected = matched.len();
    Ok(BifurcationScan {
        points,
        missed,
        midpoints,
        corollary2: Corollary2Check {
            morse_index,
            max_multiplicity,
            bound,
            distinct_detected,
            holds: distinct_detected >= bound,
        },
        match_tol: settings.match_tol,
    })
}
