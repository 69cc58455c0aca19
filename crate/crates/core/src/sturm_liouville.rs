//! The linearized one-dimensional eigenproblem
//! `−z″ − q(x) z = α z` on `(0, 1)`, `z′(0) = 0`, `z(1) = 0`,
//! with `q = f′(u_ω)`.
//!
//! Second-order central differences on the uniform grid `x_k = k/M`. The
//! Neumann end uses a mirrored ghost node, which makes the first row
//! `(2, −2)/h²`; the similarity `S = diag(√2, 1, …, 1)` turns that into the
//! symmetric tridiagonal matrix with `(0,1)` entry `−√2/h²`. Eigenvectors of
//! the symmetric matrix are orthonormal in the plain inner product, which
//! is the trapezoidal inner product for the grid functions `z = S y`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;
use crate::ode_shooting::{count_nodal_domains_1d, sample_profile};
use crate::richardson::extrapolate_h2;
use crate::tridiagonal::SymTridiagonal;

/// Minimum RK4 steps used when re-sampling a profile on an eigen-grid.
pub const PROFILE_MIN_STEPS: usize = 10_000;
/// Zeros of eigenfunctions are sign changes above this fraction of `‖z‖∞`.
pub const ZERO_TOL_REL: f64 = 1e-8;

/// The discretized operator together with its grid data.
#[derive(Clone, Debug)]
pub struct SlOperator {
    matrix: SymTridiagonal,
    intervals: usize,
    potential: Vec<f64>,
}

impl SlOperator {
    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SturmSpectrum {
    pub alphas: Vec<f64>,
    /// Grid functions on all `M + 1` nodes (the Dirichlet node is 0),
    /// normalized in the trapezoidal `L²` norm with `z(0) > 0`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub zero_counts: Vec<usize>,
    pub grid_size: usize,
    pub potential: Vec<f64>,
}

/// Checks that `grid` is the uniform partition of `[0, 1]`.
pub fn check_uniform_grid(grid: &[f64]) -> Result<usize> {
    if grid.len() < 3 {
        return Err(Error::Validation("grid needs at least 3 nodes".into()));
    }
    let m = grid.len() - 1;
    let h = 1.0 / m as f64;
    for (k, x) in grid.iter().enumerate() {
        if (x - k as f64 * h).abs() > 1e-9 * h {
            return Err(Error::Validation(format!(
                "grid is not the uniform partition of [0, 1] (node {k} at {x})"
            )));
        }
    }
    Ok(m)
}

/// Uniform grid with `intervals` cells on `[0, 1]`.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|k| k as f64 / intervals as f64).collect()
}

/// Assembles `−D² − q` with the ghost-node Neumann row at `x = 0` and the
/// Dirichlet node `x = 1` removed. `potential` is sampled on `grid`.
pub fn assemble_sl_operator(grid: &[f64], potential: &[f64]) -> Result<SlOperator> {
    let m = check_uniform_grid(grid)?;
    if potential.len() != grid.len() {
        return Err(Error::Validation(format!(
            "potential has {} samples for {} grid nodes",
            potential.len(),
            grid.len()
        )));
    }
    let inv_h2 = (m * m) as f64;
    let diag: Vec<f64> = potential[..m].iter().map(|q| 2.0 * inv_h2 - q).collect();
    let mut off = vec![-inv_h2; m - 1];
    off[0] = -std::f64::consts::SQRT_2 * inv_h2;
    Ok(SlOperator {
        matrix: SymTridiagonal::new(diag, off)?,
        intervals: m,
        potential: potential.to_vec(),
    })
}

/// Potential `q = f′(u)` of the profile with amplitude `amplitude`,
/// re-integrated so that every eigen-grid node is an RK4 node.
pub fn potential_for_profile(model: &NonlinearityModel, amplitude: f64, intervals: usize) -> Result<Vec<f64>> {
    let u = sample_profile(model, amplitude, intervals, PROFILE_MIN_STEPS)?;
    Ok(u.iter().map(|&v| model.eval_fprime(v)).collect())
}

/// Trapezoidal weights (without the factor `h`) on the unknown nodes.
fn weight(k: usize) -> f64 {
    if k == 0 {
        0.5
    } else {
        1.0
    }
}

/// Rayleigh quotient in difference form, which keeps small eigenvalues
/// accurate relative to their size rather than to `‖T‖`.
fn rayleigh_quotient(z: &[f64], potential: &[f64], h: f64) -> f64 {
    let m = z.len() - 1;
    let mut grad = 0.0;
    let mut pot = 0.0;
    let mut mass = 0.0;
    for k in 0..m {
        let d = z[k + 1] - z[k];
        grad += d * d;
        pot += weight(k) * potential[k] * z[k] * z[k];
        mass += weight(k) * z[k] * z[k];
    }
    (grad / (h * h) - pot) / mass
}

/// Discrete `L²` inner product with trapezoidal weights.
pub fn inner_product(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() - 1;
    let h = 1.0 / m as f64;
    let interior: f64 = (1..m).map(|k| a[k] * b[k]).sum();
    h * (interior + 0.5 * (a[0] * b[0] + a[m] * b[m]))
}

/// The `k` smallest eigenpairs, by Sturm-sequence bisection and inverse
/// iteration, with eigenvalues refined by the Rayleigh quotient.
pub fn sl_eigenpairs(op: &SlOperator, k: usize) -> Result<SturmSpectrum> {
    let m = op.intervals;
    if k == 0 || k > m.saturating_sub(1) {
        return Err(Error::Validation(format!(
            "can compute between 1 and {} eigenpairs on {m} intervals, asked for {k}",
            m.saturating_sub(1)
        )));
    }
    let h = op.spacing();
    let mut alphas = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    let mut zero_counts = Vec::with_capacity(k);
    for i in 0..k {
        let approx = op.matrix.eigenvalue(i)?;
        let y = op.matrix.eigenvector(approx, i + 1)?;
        let mut z = Vec::with_capacity(m + 1);
        z.push(std::f64::consts::SQRT_2 * y[0]);
        z.extend_from_slice(&y[1..]);
        z.push(0.0);
        let scale = inner_product(&z, &z).sqrt().copysign(z[0]);
        z.iter_mut().for_each(|v| *v /= scale);
        alphas.push(rayleigh_quotient(&z, &op.potential, h));
        zero_counts.push(interior_zero_count(&z)?);
        eigenfunctions.push(z);
    }
    Ok(SturmSpectrum {
        alphas,
        eigenfunctions,
        zero_counts,
        grid_size: m,
        potential: op.potential.clone(),
    })
}

fn interior_zero_count(z: &[f64]) -> Result<usize> {
    let inner = &z[..z.len() - 1];
    let tol = ZERO_TOL_REL * inner.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(count_nodal_domains_1d(inner, tol)? - 1)
}

/// `true` iff the `i`-th eigenfunction (1-based) has `i − 1` interior
/// sign changes, recounted from the stored grid functions.
pub fn oscillation_check(spec: &SturmSpectrum) -> bool {
    spec.eigenfunctions
        .iter()
        .enumerate()
        .all(|(i, z)| interior_zero_count(z).is_ok_and(|c| c == i))
}

/// Number of negative eigenvalues of the one-dimensional linearization.
pub fn one_dim_morse(spec: &SturmSpectrum) -> Result<usize> {
    match spec.alphas.last() {
        Some(&a) if a > 0.0 => Ok(spec.alphas.iter().filter(|a| **a < 0.0).count()),
        _ => Err(Error::InsufficientSpectrum(format!(
            "all {} computed eigenvalues are non-positive; compute more",
            spec.alphas.len()
        ))),
    }
}

/// `minᵢ |αᵢ|`.
pub fn nondegeneracy_margin(spec: &SturmSpectrum) -> f64 {
    spec.alphas.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()))
}

/// Default number of eigenvalues to compute for a profile with `n` nodal domains.
pub fn default_eigen_count(n: usize) -> usize {
    (n + 5).max(12)
}

/// Spectrum of the profile with amplitude `amplitude` on `intervals` cells.
pub fn spectrum_for_profile(
    model: &NonlinearityModel,
    amplitude: f64,
    intervals: usize,
    k: usize,
) -> Result<SturmSpectrum> {
    let q = potential_for_profile(model, amplitude, intervals)?;
    let op = assemble_sl_operator(&uniform_grid(intervals), &q)?;
    sl_eigenpairs(&op, k)
}

/// Eigenvalues on a sequence of doubling grids, extrapolated to `h → 0`.
#[derive(Clone, Debug, Serialize)]
pub struct ExtrapolatedSpectrum {
    pub grids: Vec<usize>,
    /// `raw[g][i]`: eigenvalue `i` on grid `g`.
    pub raw: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    /// `|αᵢ(finest grid) − αᵢ(extrapolated)|`: error of the finest raw value.
    pub raw_error: Vec<f64>,
    /// Difference between full extrapolation and the two-finest-grid one.
    pub extrapolation_error: Vec<f64>,
}

/// Runs [`spectrum_for_profile`] on each grid of `grids` (each twice the
/// previous) and extrapolates the first `k` eigenvalues.
pub fn extrapolated_spectrum(
    model: &NonlinearityModel,
    amplitude: f64,
    grids: &[usize],
    k: usize,
) -> Result<ExtrapolatedSpectrum> {
    if grids.len() < 2 || grids.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Validation(format!(
            "extrapolation needs at least two grids each doubling the previous, got {grids:?}"
        )));
    }
    let raw: Vec<Vec<f64>> = grids
        .iter()
        .map(|&m| spectrum_for_profile(model, amplitude, m, k).map(|s| s.alphas))
        .collect::<Result<_>>()?;
    extrapolate_columns(grids.to_vec(), raw)
}

/// Same as [`extrapolated_spectrum`] for an explicit potential function
/// `q(x)`.
pub fn extrapolated_spectrum_for_potential<Q: Fn(f64) -> f64>(
    potential: Q,
    grids: &[usize],
    k: usize,
) -> Result<ExtrapolatedSpectrum> {
    let raw: Vec<Vec<f64>> = grids
        .iter()
        .map(|&m| {
            let grid = uniform_grid(m);
            let q: Vec<f64> = grid.iter().map(|&x| potential(x)).collect();
            sl_eigenpairs(&assemble_sl_operator(&grid, &q)?, k).map(|s| s.alphas)
        })
        .collect::<Result<_>>()?;
    extrapolate_columns(grids.to_vec(), raw)
}

fn extrapolate_columns(grids: Vec<usize>, raw: Vec<Vec<f64>>) -> Result<ExtrapolatedSpectrum> {
    let k = raw[0].len();
    let g = raw.len();
    let mut alphas = Vec::with_capacity(k);
    let mut raw_error = Vec::with_capacity(k);
    let mut extrapolation_error = Vec::with_capacity(k);
    for i in 0..k {
        let column: Vec<f64> = raw.iter().map(|r| r[i]).collect();
        let full = extrapolate_h2(&column);
        let partial = extrapolate_h2(&column[g - 2..]);
        alphas.push(full);
        raw_error.push((column[g - 1] - full).abs());
        extrapolation_error.push((full - partial).abs());
    }
    Ok(ExtrapolatedSpectrum {
        grids,
        raw,
        alphas,
        raw_error,
        extrapolation_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_shooting::{find_one_dim_solution, ShootingConfig};
    use std::f64::consts::PI;

    fn free(m: usize) -> SlOperator {
        assemble_sl_operator(&uniform_grid(m), &vec![0.0; m + 1]).unwrap()
    }

    #[test]
    fn discrete_cosine_modes_at_m4() {
        let op = free(4);
        let h = 0.25;
        let spec = sl_eigenpairs(&op, 3).unwrap();
        for (i, alpha) in spec.alphas.iter().enumerate() {
            let theta = (2 * i + 1) as f64 * PI * h / 2.0;
            let exact = 2.0 / (h * h) * (1.0 - theta.cos());
            assert!((alpha - exact).abs() < 1e-12 * exact, "{alpha} vs {exact}");
        }
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let m = 200;
        let base = sl_eigenpairs(&free(m), 6).unwrap();
        let c = 3.25;
        let op = assemble_sl_operator(&uniform_grid(m), &vec![c; m + 1]).unwrap();
        let shifted = sl_eigenpairs(&op, 6).unwrap();
        for (a, b) in base.alphas.iter().zip(&shifted.alphas) {
            assert!((b - (a - c)).abs() < 1e-9 * a.abs());
        }
    }

    #[test]
    fn zero_profile_gives_fprime_at_zero() {
        let m = NonlinearityModel::cubic(0.7, 1.0).unwrap();
        let q = potential_for_profile(&m, 0.0, 50).unwrap();
        assert!(q.iter().all(|v| *v == m.eval_fprime(0.0)));
    }

    #[test]
    fn rejects_non_uniform_grid_and_bad_k() {
        let mut g = uniform_grid(10);
        g[3] += 0.01;
        assert!(assemble_sl_operator(&g, &[0.0; 11]).is_err());
        assert!(assemble_sl_operator(&uniform_grid(10), &[0.0; 5]).is_err());
        assert!(sl_eigenpairs(&free(10), 10).is_err());
        assert!(sl_eigenpairs(&free(10), 0).is_err());
    }

    #[test]
    fn free_operator_properties() {
        let spec = sl_eigenpairs(&free(400), 8).unwrap();
        assert!(oscillation_check(&spec));
        assert_eq!(one_dim_morse(&spec).unwrap(), 0);
        assert!((nondegeneracy_margin(&spec) - (PI / 2.0).powi(2)).abs() < 1e-4);
        for i in 0..8 {
            assert!(spec.eigenfunctions[i][0] > 0.0);
            for j in 0..8 {
                let ip = inner_product(&spec.eigenfunctions[i], &spec.eigenfunctions[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() <= 1e-8, "<z{i}, z{j}> = {ip}");
            }
        }
        // Eigenfunction approximates the normalized cosine √2 cos(πx/2).
        let z = &spec.eigenfunctions[0];
        let g = uniform_grid(400);
        let err = z
            .iter()
            .zip(&g)
            .map(|(v, x)| (v - 2f64.sqrt() * (PI * x / 2.0).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn swapped_eigenfunctions_fail_oscillation_check() {
        let mut spec = sl_eigenpairs(&free(100), 4).unwrap();
        spec.eigenfunctions.swap(1, 2);
        assert!(!oscillation_check(&spec));
    }

    #[test]
    fn insufficient_spectrum() {
        let op = assemble_sl_operator(&uniform_grid(50), &vec![1e6; 51]).unwrap();
        let spec = sl_eigenpairs(&op, 2).unwrap();
        assert!(matches!(one_dim_morse(&spec), Err(Error::InsufficientSpectrum(_))));
    }

    #[test]
    fn eigenvalues_converge_at_second_order() {
        let model = NonlinearityModel::pure_cubic();
        let sol = find_one_dim_solution(&model, 1, &ShootingConfig::default()).unwrap();
        let ex = extrapolated_spectrum(&model, sol.amplitude, &[500, 1000, 2000], 4).unwrap();
        let fine = spectrum_for_profile(&model, sol.amplitude, 4000, 4).unwrap();
        for i in 0..4 {
            let rel = (fine.alphas[i] - ex.alphas[i]).abs() / ex.alphas[i].abs();
            // M = 4000 carries its own O(h²) error; the extrapolated value
            // must sit within that error, and the raw sequence is second order.
            let e1 = (ex.raw[0][i] - ex.alphas[i]).abs();
            let e2 = (ex.raw[1][i] - ex.alphas[i]).abs();
            let order = (e1 / e2).log2();
            assert!((order - 2.0).abs() < 0.1, "order {order} for alpha_{}", i + 1);
            let e4000 = e2 / 16.0;
            assert!(rel * ex.alphas[i].abs() < 2.0 * e4000 + 1e-10);
        }
    }
}
