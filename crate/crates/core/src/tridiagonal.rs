//! Symmetric tridiagonal matrices: Sturm-sequence bisection for
//! individual eigenvalues and inverse iteration for eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and first
/// off-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Validation(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Returns `self + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + shift).collect(),
            off: self.off.clone(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of the
    /// `LDLᵀ` factorization of `T − xI`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.norm_bound();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::Validation(format!(
                "eigenvalue index {index} out of range for order {}",
                self.len()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * self.norm_bound();
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for the approximate eigenvalue `lambda` by inverse
    /// iteration. `index` only labels errors.
    pub fn eigenvector(&self, lambda: f64, index: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = self.norm_bound();
        let tol = 1e3 * f64::EPSILON * scale;
        let lu = TridiagonalLu::factor(&self.shifted(-lambda), f64::EPSILON * scale);
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i as f64) * 0.618).sin()).collect();
        normalize(&mut y);
        let mut residual = f64::INFINITY;
        for _ in 0..8 {
            y = lu.solve(&y);
            if y.iter().any(|v| !v.is_finite()) {
                break;
            }
            normalize(&mut y);
            let ty = self.matvec(&y);
            residual = ty
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - lambda * b).abs())
                .fold(0.0, f64::max);
            if residual <= tol {
                return Ok(y);
            }
        }
        Err(Error::convergence(
            format!("inverse iteration for eigenvalue index {index}"),
            8,
            residual,
        ))
    }

    /// Solves `T x = b` by LU with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.len() {
            return Err(Error::Validation(format!(
                "right-hand side has length {}, matrix has order {}",
                rhs.len(),
                self.len()
            )));
        }
        let lu = TridiagonalLu::factor(self, 0.0);
        let x = lu.solve(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("tridiagonal matrix is singular".into()));
        }
        Ok(x)
    }

    /// The `k` smallest eigenpairs in ascending order.
    pub fn smallest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        if k > self.len() {
            return Err(Error::Validation(format!(
                "requested {k} eigenpairs of an order-{} matrix",
                self.len()
            )));
        }
        (0..k)
            .map(|i| {
                let lambda = self.eigenvalue(i)?;
                let v = self.eigenvector(lambda, i)?;
                Ok((lambda, v))
            })
            .collect()
    }
}

fn normalize(y: &mut [f64]) {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    y.iter_mut().for_each(|v| *v /= norm);
}

/// Gaussian elimination with partial pivoting for a general tridiagonal
/// matrix; row interchanges create one extra superdiagonal.
struct TridiagonalLu {
    // U has diagonal `u0`, superdiagonals `u1`, `u2`.
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    // Multipliers and interchange flags per elimination step.
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &SymTridiagonal, tiny: f64) -> Self {
        let n = t.len();
        let mut u0 = t.diag.clone();
        let mut u1: Vec<f64> = t.off.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        // Row i+1 before elimination: (sub = off[i], diag, super).
        let mut sub: Vec<f64> = t.off.clone();
        for i in 0..n.saturating_sub(1) {
            let next_diag = u0[i + 1];
            let next_sup = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
            if sub[i].abs() > u0[i].abs() {
                // Swap row i with row i+1.
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = sub[i];
                u1[i] = next_diag;
                u2[i] = next_sup;
                let m = a0 / u0[i];
                mult[i] = m;
                swapped[i] = true;
                u0[i + 1] = a1 - m * next_diag;
                u1[i + 1] = a2 - m * next_sup;
            } else {
                if u0[i] == 0.0 {
                    u0[i] = tiny;
                }
                let m = sub[i] / u0[i];
                mult[i] = m;
                u0[i + 1] = next_diag - m * u1[i];
                if i + 1 < n - 1 {
                    u1[i + 1] = next_sup - m * u2[i];
                }
            }
            sub[i] = 0.0;
        }
        if n > 0 && u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        for v in u0.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}
