//! Preconditioned MINRES for symmetric, possibly indefinite systems.

use super::banded::dot;

pub(crate) struct MinresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Preconditioned residual norm relative to that of `b`.
    pub relative_residual: f64,
}

/// Solves `A x = b` with `A` symmetric and `M` symmetric positive definite
/// (`precond` applies `M⁻¹`). Stops once the preconditioned residual drops
/// below `rtol` times its initial value.
pub(crate) fn minres<A, P>(apply: A, precond: P, b: &[f64], rtol: f64, max_iters: usize) -> MinresOutcome
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = precond(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return MinresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let v: Vec<f64> = y.iter().map(|yi| yi / beta).collect();
        y = apply(&v);
        if iterations >= 2 {
            let c = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= c * ri);
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= c * ri);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        y = precond(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        // w ← (v − oldeps·w₁ − delta·w₂)/gamma with (w₁, w₂) the previous two.
        let w1 = std::mem::replace(&mut w2, w.clone());
        for k in 0..n {
            w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) / gamma;
            x[k] += phi * w[k];
        }
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    MinresOutcome {
        x,
        iterations,
        relative_residual: phibar / beta1,
    }
}
