//! Finite differences for the transported problem on the unit square,
//! `D_t u = f(u)` with `D_t = −(tL)⁻²∂²ₓ′ − ∂²ₓ_N`, Dirichlet on `x_N = 1`
//! and ghost-node Neumann on the other three sides.
//!
//! Grid vectors hold all `nx·ny` nodes at index `j·nx + i` (`i` along `x′`,
//! `j` along `x_N`). The Dirichlet row `j = ny − 1` is zero, so the unknowns
//! are the first `nx·(ny − 1)` entries. Ghost-node rows are not symmetric;
//! scaling by square roots of the trapezoidal weights makes them so, and all
//! linear algebra runs in those scaled coordinates.

mod banded;
mod branch;
mod eigen;
mod minres;
mod newton;

use serde::{Deserialize, Serialize};

pub use banded::{BandedCholesky, SymBanded};
pub use branch::{
    backtrack, build_kernel_mode, continue_branch, reflection_defect, verify_decomposition, BranchPoint, BranchSwitch,
    ContinuationConfig, CylinderSetup, DecompositionRow, KernelMode,
};
pub use eigen::{EigenConfig, Eigenpairs};
pub use newton::{newton_solve, NewtonConfig, NewtonOutcome};

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;

pub const MIN_NODES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        let g = Grid2D { nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < MIN_NODES || self.ny < MIN_NODES {
            return Err(Error::Validation(format!(
                "grid needs at least {MIN_NODES} nodes per direction, got {} x {}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unknowns(&self) -> usize {
        self.nx * (self.ny - 1)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    fn wx(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx - 1 {
            0.5
        } else {
            1.0
        }
    }

    fn wy(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// Trapezoidal weight of node `p` without the `hx·hy` factor.
    pub(crate) fn node_weight(&self, p: usize) -> f64 {
        self.wx(p % self.nx) * self.wy(p / self.nx)
    }

    pub fn quadrature_weight(&self, p: usize) -> f64 {
        self.node_weight(p) * self.hx() * self.hy()
    }

    pub fn check_vector(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Validation(format!(
                "grid vector has length {}, grid has {} nodes",
                u.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Samples `f(x′, x_N)`; the Dirichlet row is set to zero.
    pub fn from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut u = vec![0.0; self.len()];
        for j in 0..self.ny - 1 {
            for i in 0..self.nx {
                u[self.index(i, j)] = f(self.x(i), self.y(j));
            }
        }
        u
    }

    /// Extends a profile on the `ny` nodes of `[0, 1]` constantly in `x′`.
    pub fn embed_profile(&self, profile: &[f64]) -> Result<Vec<f64>> {
        if profile.len() != self.ny {
            return Err(Error::Validation(format!(
                "profile has {} nodes, grid has {} in x_N",
                profile.len(),
                self.ny
            )));
        }
        let mut u = vec![0.0; self.len()];
        for j in 0..self.ny - 1 {
            u[j * self.nx..(j + 1) * self.nx].fill(profile[j]);
        }
        Ok(u)
    }

    /// Trapezoidal `L²` inner product on the unit square.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = (0..self.len()).map(|p| self.node_weight(p) * a[p] * b[p]).sum();
        s * self.hx() * self.hy()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Node `(i, j)` mirrored to `(nx − 1 − i, j)`.
    pub fn reflect_x(&self, u: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                r[self.index(i, j)] = u[self.index(self.nx - 1 - i, j)];
            }
        }
        r
    }
}

/// `D_t` on the unit square for the base interval of length `l_base`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransportedOperator {
    pub t: f64,
    pub l_base: f64,
    pub grid: Grid2D,
}

impl TransportedOperator {
    pub fn new(t: f64, l_base: f64, grid: Grid2D) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Validation(format!("scaling t must be positive, got {t}")));
        }
        if !(l_base > 0.0 && l_base.is_finite()) {
            return Err(Error::Validation(format!("base length must be positive, got {l_base}")));
        }
        grid.validate()?;
        Ok(TransportedOperator { t, l_base, grid })
    }

    /// Coefficient `(tL)⁻²` of `−∂²ₓ′`.
    pub fn coef_x(&self) -> f64 {
        (self.t * self.l_base).powi(-2)
    }

    fn cx(&self) -> f64 {
        self.coef_x() / (self.grid.hx() * self.grid.hx())
    }

    fn cy(&self) -> f64 {
        1.0 / (self.grid.hy() * self.grid.hy())
    }

    /// Upper bound on the norm of the symmetrized operator.
    pub fn norm_bound(&self) -> f64 {
        4.0 * (self.cx() + self.cy())
    }

    /// `D_t u` with ghost-node Neumann rows; zero on the Dirichlet row.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let (cx, cy) = (self.cx(), self.cy());
        let mut out = vec![0.0; g.len()];
        for j in 0..ny - 1 {
            for i in 0..nx {
                let p = g.index(i, j);
                let left = if i == 0 { u[p + 1] } else { u[p - 1] };
                let right = if i == nx - 1 { u[p - 1] } else { u[p + 1] };
                let down = if j == 0 { u[p + nx] } else { u[p - nx] };
                let up = if j + 1 == ny - 1 { 0.0 } else { u[p + nx] };
                out[p] = cx * (2.0 * u[p] - left - right) + cy * (2.0 * u[p] - down - up);
            }
        }
        out
    }

    /// `D_t u − f(u)`; zero on the Dirichlet row.
    pub fn residual(&self, u: &[f64], model: &NonlinearityModel) -> Vec<f64> {
        let mut r = self.apply(u);
        for (ri, ui) in r.iter_mut().zip(u).take(self.grid.unknowns()) {
            *ri -= model.eval_f(*ui);
        }
        r
    }

    fn sx(&self, i: usize) -> f64 {
        let edge = i == 0 || i + 1 == self.grid.nx - 1;
        -self.cx() * if edge { std::f64::consts::SQRT_2 } else { 1.0 }
    }

    fn sy(&self, j: usize) -> f64 {
        -self.cy() * if j == 0 { std::f64::consts::SQRT_2 } else { 1.0 }
    }

    /// Symmetrized `D_t − diag(potential) + shift` on unknown-length vectors.
    pub(crate) fn apply_sym(&self, y: &[f64], potential: &[f64], shift: f64) -> Vec<f64> {
        let g = self.grid;
        let (nx, rows) = (g.nx, g.ny - 1);
        let d0 = 2.0 * (self.cx() + self.cy()) + shift;
        let mut out = vec![0.0; g.unknowns()];
        for j in 0..rows {
            for i in 0..nx {
                let p = g.index(i, j);
                let mut v = (d0 - potential[p]) * y[p];
                if i > 0 {
                    v += self.sx(i - 1) * y[p - 1];
                }
                if i + 1 < nx {
                    v += self.sx(i) * y[p + 1];
                }
                if j > 0 {
                    v += self.sy(j - 1) * y[p - nx];
                }
                if j + 1 < rows {
                    v += self.sy(j) * y[p + nx];
                }
                out[p] = v;
            }
        }
        out
    }

    pub(crate) fn banded_sym(&self, potential: &[f64], shift: f64) -> SymBanded {
        let g = self.grid;
        let nx = g.nx;
        let d0 = 2.0 * (self.cx() + self.cy()) + shift;
        let mut b = SymBanded::zeros(g.unknowns(), nx);
        for j in 0..g.ny - 1 {
            for i in 0..nx {
                let p = g.index(i, j);
                b.set(p, p, d0 - potential[p]);
                if i > 0 {
                    b.set(p, p - 1, self.sx(i - 1));
                }
                if j > 0 {
                    b.set(p, p - nx, self.sy(j - 1));
                }
            }
        }
        b
    }

    /// Square roots of the node weights on the unknowns.
    pub(crate) fn sqrt_weights(&self) -> Vec<f64> {
        (0..self.grid.unknowns())
            .map(|p| self.grid.node_weight(p).sqrt())
            .collect()
    }
}

/// `D_t − f′(u) + shift`, symmetric in the scaled coordinates.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    op: TransportedOperator,
    potential: Vec<f64>,
    shift: f64,
}

pub fn assemble_linearized(
    u: &[f64],
    t: f64,
    l_base: f64,
    model: &NonlinearityModel,
    grid: Grid2D,
) -> Result<LinearizedOperator> {
    grid.check_vector(u)?;
    let op = TransportedOperator::new(t, l_base, grid)?;
    let potential: Vec<f64> = u[..grid.unknowns()].iter().map(|&v| model.eval_fprime(v)).collect();
    if potential.iter().any(|q| !q.is_finite()) {
        return Err(Error::Domain("f' is not finite on the grid".into()));
    }
    Ok(LinearizedOperator {
        op,
        potential,
        shift: 0.0,
    })
}

impl LinearizedOperator {
    pub fn transported(&self) -> &TransportedOperator {
        &self.op
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn shifted(&self, c: f64) -> Self {
        LinearizedOperator {
            shift: self.shift + c,
            ..self.clone()
        }
    }

    /// `(D_t − f′(u) + shift) v` with ghost-node rows; zero on the Dirichlet row.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.op.apply(v);
        for (p, o) in out.iter_mut().take(self.potential.len()).enumerate() {
            *o += (self.shift - self.potential[p]) * v[p];
        }
        out
    }

    /// Symmetric form in the scaled coordinates.
    pub fn symmetric_apply(&self, y: &[f64]) -> Vec<f64> {
        self.op.apply_sym(y, &self.potential, self.shift)
    }

    pub fn to_banded(&self) -> SymBanded {
        self.op.banded_sym(&self.potential, self.shift)
    }

    pub fn smallest_eigenpairs(&self, k: usize, cfg: &EigenConfig) -> Result<Eigenpairs> {
        let n = self.potential.len();
        let qmax = self.potential.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let qmin = self.potential.iter().cloned().fold(f64::INFINITY, f64::min);
        // The unshifted Laplacian part is positive definite.
        let sigma = self.shift - qmax.max(0.0) - 1.0;
        let factor = self.shifted(-sigma).to_banded().cholesky()?;
        let norm = self.op.norm_bound() + qmax.abs().max(qmin.abs()) + self.shift.abs();
        let mut e = eigen::subspace_smallest(n, k, |y| self.symmetric_apply(y), &factor, norm, cfg)?;
        let sw = self.op.sqrt_weights();
        let g = self.op.grid;
        for v in e.vectors.iter_mut() {
            let mut full = vec![0.0; g.len()];
            for p in 0..n {
                full[p] = v[p] / sw[p];
            }
            let nrm = g.norm(&full);
            full.iter_mut().for_each(|x| *x /= nrm);
            *v = full;
        }
        Ok(e)
    }

    /// Number of negative eigenvalues.
    pub fn negative_count(&self, cfg: &EigenConfig) -> Result<usize> {
        let n = self.potential.len();
        let mut k = 4.min(n);
        loop {
            let e = self.smallest_eigenpairs(k, cfg)?;
            let neg = e.values.iter().filter(|v| **v < 0.0).count();
            if neg < k || k == n {
                return Ok(neg);
            }
            k = (2 * k).min(n);
        }
    }
}

/// The `k` smallest eigenvalues with the default solver settings.
pub fn smallest_eigenvalues(op: &LinearizedOperator, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    Ok(op.smallest_eigenpairs(k, &EigenConfig::default())?.values)
}

/// `‖u − ū‖₂/‖u‖₂` with `ū` the `x′`-average of `u` on each level.
pub fn one_dimensionality_deviation(u: &[f64], grid: Grid2D) -> Result<f64> {
    grid.check_vector(u)?;
    let norm = grid.norm(u);
    if norm == 0.0 {
        return Err(Error::DegenerateInput("deviation of the zero function".into()));
    }
    let mut diff = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        let row = &u[j * grid.nx..(j + 1) * grid.nx];
        let mean = row.iter().enumerate().map(|(i, v)| grid.wx(i) * v).sum::<f64>() * grid.hx();
        for (i, v) in row.iter().enumerate() {
            diff[grid.index(i, j)] = v - mean;
        }
    }
    Ok((grid.norm(&diff) / norm).min(1.0))
}

/// Number of 4-connected components of `{|u| > tol}` with constant sign.
pub fn count_nodal_domains_2d(u: &[f64], grid: Grid2D, tol: f64) -> Result<usize> {
    grid.check_vector(u)?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Validation(format!("nodal tolerance must be >= 0, got {tol}")));
    }
    let sign = |p: usize| -> i8 {
        if u[p] > tol {
            1
        } else if u[p] < -tol {
            -1
        } else {
            0
        }
    };
    let mut seen = vec![false; grid.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        let s = sign(start);
        if s == 0 || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (i, j) = (p % grid.nx, p / grid.nx);
            let mut visit = |q: usize| {
                if !seen[q] && sign(q) == s {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if i > 0 {
                visit(p - 1);
            }
            if i + 1 < grid.nx {
                visit(p + 1);
            }
            if j > 0 {
                visit(p - grid.nx);
            }
            if j + 1 < grid.ny {
                visit(p + grid.nx);
            }
        }
    }
    if components == 0 {
        return Err(Error::DegenerateInput(format!("all nodes are within {tol:e} of zero")));
    }
    Ok(components)
}

/// Relative nodal threshold used by [`default_nodal_tol`].
pub const NODAL_TOL_REL_2D: f64 = 1e-6;

/// Default nodal tolerance `1e-6·‖u‖∞`.
pub fn default_nodal_tol(u: &[f64]) -> f64 {
    NODAL_TOL_REL_2D * u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `∫ ½((tL)⁻²u²ₓ′ + u²ₓ_N) − F(u)` over the unit square, with edge
/// differences for the gradient and trapezoidal weights for `F`.
pub fn eval_energy(u: &[f64], t: f64, l_base: f64, model: &NonlinearityModel, grid: Grid2D) -> Result<f64> {
    grid.check_vector(u)?;
    let op = TransportedOperator::new(t, l_base, grid)?;
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut grad = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.index(i, j);
            if i + 1 < grid.nx {
                let d = (u[p + 1] - u[p]) / hx;
                grad += grid.wy(j) * op.coef_x() * d * d;
            }
            if j + 1 < grid.ny {
                let d = (u[p + grid.nx] - u[p]) / hy;
                grad += grid.wx(i) * d * d;
            }
        }
    }
    let pot: f64 = (0..grid.len()).map(|p| grid.node_weight(p) * model.eval_F(u[p])).sum();
    Ok(hx * hy * (0.5 * grad - pot))
}
