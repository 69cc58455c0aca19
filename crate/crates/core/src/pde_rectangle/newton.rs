//! Newton's method for `D_t u = f(u)`.
//!
//! Each step solves the symmetric, generally indefinite Jacobian system by
//! MINRES preconditioned with a Cholesky factorization of `D_t` itself (SPD
//! because of the Dirichlet face); `f′(u)` is a bounded perturbation of it.

use serde::{Deserialize, Serialize};

use super::minres::minres;
use super::TransportedOperator;
use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    /// Converged when `‖D_t u − f(u)‖∞ ≤ tol` ...
    pub tol: f64,
    /// ... and the last update was at most `step_tol·‖u‖₂`.
    pub step_tol: f64,
    pub max_iters: usize,
    pub linear_rtol: f64,
    pub linear_max_iters: usize,
    /// Gives up once the residual or `‖u‖∞` exceeds this multiple of its
    /// starting value.
    pub divergence_factor: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-8,
            step_tol: 1e-6,
            max_iters: 40,
            linear_rtol: 1e-12,
            linear_max_iters: 500,
            divergence_factor: 1e6,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.step_tol > 0.0) || !(self.linear_rtol > 0.0) || !(self.divergence_factor > 1.0) {
            return Err(Error::Validation("Newton tolerances must be positive".into()));
        }
        if self.max_iters == 0 || self.linear_max_iters == 0 {
            return Err(Error::Validation("Newton iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Final `‖D_t u − f(u)‖∞`.
    pub residual: f64,
}

/// Newton iteration from `initial`. With `deflate = Some(u*)` the residual
/// is multiplied by `1/‖u − u*‖₂² + 1`, which repels the iteration from the
/// known solution `u*`.
pub fn newton_solve(
    initial: &[f64],
    op: &TransportedOperator,
    model: &NonlinearityModel,
    cfg: &NewtonConfig,
    deflate: Option<&[f64]>,
) -> Result<NewtonOutcome> {
    cfg.validate()?;
    let g = op.grid;
    g.check_vector(initial)?;
    if let Some(d) = deflate {
        g.check_vector(d)?;
    }
    let n = g.unknowns();
    let mut u = initial.to_vec();
    u[n..].fill(0.0);
    let precond = op.banded_sym(&vec![0.0; n], 0.0).cholesky()?;
    let sw = op.sqrt_weights();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let size_limit = cfg.divergence_factor * sup(&u).max(1.0);
    let mut residual_limit = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iters {
        let r = op.residual(&u, model);
        residual = sup(&r);
        if it == 0 {
            residual_limit = cfg.divergence_factor * residual.max(cfg.tol);
        }
        if !residual.is_finite() || residual > residual_limit || sup(&u) > size_limit {
            return Err(Error::convergence("Newton iteration (diverged)", it, residual));
        }
        if residual <= cfg.tol && last_step <= cfg.step_tol {
            return Ok(NewtonOutcome {
                u,
                iterations: it,
                residual,
            });
        }
        if it == cfg.max_iters {
            break;
        }
        let q: Vec<f64> = u[..n].iter().map(|&v| model.eval_fprime(v)).collect();
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("f' is not finite at the current iterate".into()));
        }
        let rhs: Vec<f64> = (0..n).map(|p| -sw[p] * r[p]).collect();
        let lin = minres(
            |y| op.apply_sym(y, &q, 0.0),
            |v| precond.solve(v),
            &rhs,
            cfg.linear_rtol,
            cfg.linear_max_iters,
        );
        log::debug!(
            "Newton {it}: residual {residual:.3e}, MINRES {} iterations, relative residual {:.1e}",
            lin.iterations,
            lin.relative_residual
        );
        let mut delta: Vec<f64> = lin.x.iter().zip(&sw).map(|(y, s)| y / s).collect();
        delta.resize(g.len(), 0.0);
        if let Some(known) = deflate {
            let diff: Vec<f64> = u.iter().zip(known).map(|(a, b)| a - b).collect();
            let d2 = g.inner(&diff, &diff);
            if d2 > 0.0 {
                let eta = 1.0 / d2 + 1.0;
                let grad_dot = -2.0 * g.inner(&diff, &delta) / (d2 * d2);
                let scale = 1.0 / (1.0 - grad_dot / eta);
                delta.iter_mut().for_each(|v| *v *= scale);
            }
        }
        for (a, d) in u.iter_mut().zip(&delta) {
            *a += d;
        }
        let un = g.norm(&u);
        let dn = g.norm(&delta);
        last_step = if un > 0.0 { dn / un } else { dn };
    }
    Err(Error::convergence("Newton iteration", cfg.max_iters, residual))
}

#[cfg(test)]
mod tests {
    use super::super::Grid2D;
    use super::*;

    #[test]
    fn zero_is_a_fixed_point() {
        let g = Grid2D::new(20, 20).unwrap();
        let op = TransportedOperator::new(1.0, 1.0, g).unwrap();
        let out = newton_solve(
            &vec![0.0; g.len()],
            &op,
            &NonlinearityModel::pure_cubic(),
            &NewtonConfig::default(),
            None,
        )
        .unwrap();
        assert!(out.u.iter().all(|v| *v == 0.0));
        assert!(out.iterations <= 1);
    }

    #[test]
    fn small_initial_guess_converges_to_zero() {
        let g = Grid2D::new(24, 24).unwrap();
        let op = TransportedOperator::new(1.0, 1.0, g).unwrap();
        let init = g.from_fn(|x, y| 0.1 * (1.0 + x) * (1.0 - y));
        let out = newton_solve(
            &init,
            &op,
            &NonlinearityModel::pure_cubic(),
            &NewtonConfig::default(),
            None,
        )
        .unwrap();
        assert!(out.u.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = NewtonConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
