//! Smallest eigenpairs of a large symmetric operator by shift-invert
//! subspace iteration with Rayleigh–Ritz.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::{dot, BandedCholesky};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Subspace size; `None` picks `max(2k, k + 8)`.
    pub block: Option<usize>,
    /// Residual tolerance relative to the operator norm bound.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            block: None,
            tol: 1e-10,
            max_iters: 400,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit vectors in the operator's own (symmetric) coordinates.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// `k` smallest eigenpairs of `A`, given `apply = A·` and `factor` of
/// `A − σI` with `σ` below the spectrum. `norm_bound ≥ ‖A‖`.
pub(crate) fn subspace_smallest<F>(
    n: usize,
    k: usize,
    apply: F,
    factor: &BandedCholesky,
    norm_bound: f64,
    cfg: &EigenConfig,
) -> Result<Eigenpairs>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let p = cfg.block.unwrap_or((2 * k).max(k + 8)).min(n);
    if k == 0 || k > p {
        return Err(Error::Validation(format!(
            "cannot compute {k} eigenpairs with a block of {p} on {n} unknowns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut x)?;
    let tol = cfg.tol * norm_bound;
    let mut worst = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        x.par_iter_mut().for_each(|col| factor.solve_in_place(col));
        orthonormalize(&mut x)?;
        let ax: Vec<Vec<f64>> = x.par_iter().map(|col| apply(col)).collect();
        let mut h = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                let v = 0.5 * (dot(&x[a], &ax[b]) + dot(&x[b], &ax[a]));
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let combine = |basis: &[Vec<f64>], c: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (m, col) in basis.iter().enumerate() {
                let s = eig.eigenvectors[(m, c)];
                out.iter_mut().zip(col).for_each(|(o, v)| *o += s * v);
            }
            out
        };
        let new_x: Vec<Vec<f64>> = order.par_iter().map(|&c| combine(&x, c)).collect();
        let new_ax: Vec<Vec<f64>> = order.par_iter().map(|&c| combine(&ax, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let residuals: Vec<f64> = (0..k)
            .map(|c| {
                new_ax[c]
                    .iter()
                    .zip(&new_x[c])
                    .map(|(a, v)| (a - values[c] * v).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        x = new_x;
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst <= tol {
            x.truncate(k);
            return Ok(Eigenpairs {
                values: values[..k].to_vec(),
                vectors: x,
                residuals,
                iterations: it,
            });
        }
    }
    Err(Error::convergence(
        format!("subspace iteration for {k} eigenpairs"),
        cfg.max_iters,
        worst,
    ))
}

/// Modified Gram–Schmidt, applied twice for stability.
fn orthonormalize(cols: &mut [Vec<f64>]) -> Result<()> {
    for _ in 0..2 {
        for a in 0..cols.len() {
            let (done, rest) = cols.split_at_mut(a);
            let col = &mut rest[0];
            for q in done.iter() {
                let c = dot(q, col);
                col.iter_mut().zip(q).for_each(|(v, qv)| *v -= c * qv);
            }
            let norm = dot(col, col).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::DegenerateInput("subspace basis lost rank".into()));
            }
            col.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(())
}
