//! Symmetric tridiagonal pencils with diagonal mass, and a banded LU solver.
//!
//! Every operator in this crate is, after Fourier decomposition in angle,
//! a symmetric tridiagonal stiffness `K` plus a diagonal potential `W`,
//! weighted by a diagonal positive mass `B`. Eigenvalues of the pencil
//! `(K + W, B)` are found by Sturm-sequence bisection and eigenvectors by
//! inverse iteration on the symmetrically scaled matrix
//! `B^{-1/2} (K + W) B^{-1/2}`.

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * u[i + 1];
            }
            out[i] = s;
        }
        out
    }

    pub fn quad_form(&self, u: &[f64]) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * u[i] * u[i];
            if i + 1 < n {
                s += 2.0 * self.off[i] * u[i] * u[i + 1];
            }
        }
        s
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// The pencil `(K + diag(w), diag(b))` with `b > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Pencil<'a> {
    pub stiffness: &'a SymTridiag,
    pub potential: &'a [f64],
    pub mass: &'a [f64],
}

impl<'a> Pencil<'a> {
    pub fn new(stiffness: &'a SymTridiag, potential: &'a [f64], mass: &'a [f64]) -> Self {
        debug_assert_eq!(stiffness.len(), potential.len());
        debug_assert_eq!(stiffness.len(), mass.len());
        Self {
            stiffness,
            potential,
            mass,
        }
    }

    pub fn len(&self) -> usize {
        self.stiffness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stiffness.is_empty()
    }

    /// The scaled matrix `B^{-1/2}(K+W)B^{-1/2}` as (diagonal, off-diagonal).
    pub fn scaled(&self) -> SymTridiag {
        let k = self.stiffness;
        let diag = (0..self.len())
            .map(|i| (k.diag[i] + self.potential[i]) / self.mass[i])
            .collect();
        let off = (0..k.off.len())
            .map(|i| k.off[i] / (self.mass[i] * self.mass[i + 1]).sqrt())
            .collect();
        SymTridiag { diag, off }
    }

    /// Number of generalized eigenvalues strictly below `sigma`.
    ///
    /// Counts negative pivots of the LDLᵀ factorisation of `K + W - σB`
    /// (Sylvester's law of inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        let k = self.stiffness;
        let n = self.len();
        if n == 0 {
            return 0;
        }
        let scale = k.norm_inf().max(1.0);
        let pivmin = f64::MIN_POSITIVE.max(scale * 1e-300);
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let a = k.diag[i] + self.potential[i] - sigma * self.mass[i];
            d = if i == 0 {
                a
            } else {
                a - k.off[i - 1] * k.off[i - 1] / d
            };
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval enclosing the spectrum of the pencil.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let a = self.scaled();
        let n = a.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += a.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += a.off[i].abs();
            }
            lo = lo.min(a.diag[i] - rad);
            hi = hi.max(a.diag[i] + rad);
        }
        let pad = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        (lo - pad, hi + pad)
    }

    /// The `j`-th smallest eigenvalue (0-based), by bisection to roughly
    /// machine precision relative to the spectral radius.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        self.eigenvalue_in(j, lo, hi)
    }

    fn eigenvalue_in(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        let tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        if k == 0 {
            return Vec::new();
        }
        let (lo, hi) = self.spectral_bounds();
        let mut out = Vec::with_capacity(k);
        let mut floor = lo;
        for j in 0..k {
            let mu = self.eigenvalue_in(j, floor, hi);
            out.push(mu);
            // eigenvalues are ascending; the next one cannot lie below this
            floor = floor.max(mu - 8.0 * f64::EPSILON * hi.abs().max(lo.abs()));
        }
        out
    }

    /// B-normalised eigenvector for an (accurately known) eigenvalue `mu`,
    /// by inverse iteration on the scaled matrix.
    pub fn eigenvector(&self, mu: f64) -> Option<Vec<f64>> {
        let a = self.scaled();
        let n = a.len();
        if n == 0 {
            return None;
        }
        let norm = a.norm_inf().max(f64::MIN_POSITIVE);
        // shift slightly off the eigenvalue so the factorisation is regular
        let shift = mu + norm * 1e-14;
        let mut band = BandMatrix::new(n, 1, 1);
        for i in 0..n {
            band.set(i, i, a.diag[i] - shift);
            if i + 1 < n {
                band.set(i, i + 1, a.off[i]);
                band.set(i + 1, i, a.off[i]);
            }
        }
        let lu = band.factor().ok()?;
        // deterministic start vector with components along every eigenvector
        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7548776662466927).fract())
            .collect();
        for _ in 0..4 {
            lu.solve_in_place(&mut y);
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                return None;
            }
            y.iter_mut().for_each(|v| *v /= nrm);
        }
        // fix the sign so that the largest component is positive
        let imax = (0..n)
            .max_by(|&i, &j| y[i].abs().total_cmp(&y[j].abs()))
            .unwrap_or(0);
        let sign = if y[imax] < 0.0 { -1.0 } else { 1.0 };
        Some(
            y.iter()
                .zip(self.mass)
                .map(|(v, b)| sign * v / b.sqrt())
                .collect(),
        )
    }

    /// `(K + W) u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.stiffness.matvec(u);
        for (o, (w, x)) in out.iter_mut().zip(self.potential.iter().zip(u)) {
            *o += w * x;
        }
        out
    }

    /// `uᵀ (K + W) u`.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        self.stiffness.quad_form(u)
            + self
                .potential
                .iter()
                .zip(u)
                .map(|(w, x)| w * x * x)
                .sum::<f64>()
    }

    /// `‖(K + W) u − μ B u‖₂`.
    pub fn residual_norm(&self, mu: f64, u: &[f64]) -> f64 {
        self.apply(u)
            .iter()
            .zip(u.iter().zip(self.mass))
            .map(|(a, (x, b))| {
                let r = a - mu * b * x;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `‖K + W‖_∞`.
    pub fn operator_norm(&self) -> f64 {
        let k = self.stiffness;
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = (k.diag[i] + self.potential[i]).abs();
                if i > 0 {
                    s += k.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += k.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// `uᵀ B v` for diagonal `B`.
pub fn mass_inner(mass: &[f64], u: &[f64], v: &[f64]) -> f64 {
    mass.iter().zip(u.iter().zip(v)).map(|(b, (x, y))| b * x * y).sum()
}

#[derive(Debug)]
pub struct SingularMatrix {
    pub column: usize,
}

/// General band matrix with `kl` sub- and `ku` super-diagonals, stored by
/// rows with room for the fill produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorisation with partial pivoting (row interchanges).
    pub fn factor(mut self) -> Result<BandLu, SingularMatrix> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || best <= scale * f64::EPSILON * 1e-6 {
                return Err(SingularMatrix { column: k });
            }
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { band: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    band: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let a = &self.band;
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            let xk = x[k];
            for i in k + 1..=last {
                x[i] -= a.data[a.idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + kl + ku).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= a.data[a.idx(k, j)] * x[j];
            }
            x[k] = s / a.data[a.idx(k, k)];
        }
    }
}
