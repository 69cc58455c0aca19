//! The embedded one-dimensional solution, kernel directions, branch
//! switching and natural-parameter continuation.

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::{
    assemble_linearized, count_nodal_domains_2d, eval_energy, newton_solve, one_dimensionality_deviation,
    smallest_eigenvalues, EigenConfig, Grid2D, NewtonConfig, NewtonOutcome, TransportedOperator, NODAL_TOL_REL_2D,
};
use crate::base_spectrum::{neumann_eigenvalues, BaseDomain};
use crate::error::{Error, Result};
use crate::morse_bifurcation::{compose_spectrum, default_tol_zero, BifurcationPoint};
use crate::nonlinearity::NonlinearityModel;
use crate::ode_shooting::{find_one_dim_solution, sample_profile, ShootingConfig};
use crate::sturm_liouville::{
    assemble_sl_operator, default_eigen_count, sl_eigenpairs, uniform_grid, SturmSpectrum, PROFILE_MIN_STEPS,
};

/// Everything tied to one embedded solution `u_ω` on one grid.
#[derive(Clone, Debug)]
pub struct CylinderSetup {
    pub model: NonlinearityModel,
    pub nodal_n: usize,
    pub l_base: f64,
    pub grid: Grid2D,
    /// Exact solution of the discrete one-dimensional problem on the `ny` nodes.
    pub profile: Vec<f64>,
    pub u_omega: Vec<f64>,
    /// Discrete spectrum of the linearization of `profile`.
    pub spectrum: SturmSpectrum,
    pub newton: NewtonConfig,
    /// Nodes with `|u| ≤ nodal_tol_rel·‖u‖∞` count as zero when counting nodal domains.
    pub nodal_tol_rel: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchPoint {
    pub t: f64,
    #[serde(skip)]
    pub solution: Vec<f64>,
    pub deviation: f64,
    pub nodal_count_2d: usize,
    pub newton_iters: usize,
    pub distance_to_1d: f64,
    pub residual: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct KernelMode {
    pub i: usize,
    pub j: usize,
    /// `zᵢ(x_N)·cos(jπx′)` on the unit square, unit `L²` norm.
    pub w: Vec<f64>,
}

/// A simple degeneracy resolved on the grid.
#[derive(Clone, Debug)]
pub struct BranchSwitch {
    pub i: usize,
    pub j: usize,
    /// Scaling at which the discrete operator is singular.
    pub t_bar: f64,
    pub t_bar_continuum: f64,
    pub kernel: KernelMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    pub steps: usize,
    /// First offset `dt0 = dt0_rel·t̄`.
    pub dt0_rel: f64,
    /// Kernel perturbation `eps0 = eps0_rel·‖u_ω‖₂`; the sign picks the half-branch.
    pub eps0_rel: f64,
    pub eps_ladder: Vec<f64>,
    pub max_halvings: usize,
    /// Retry each rung with `u_ω` deflated when plain Newton falls back to it.
    pub deflation: bool,
    pub t_limit: Option<f64>,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            steps: 5,
            dt0_rel: 1e-2,
            eps0_rel: 1e-2,
            eps_ladder: vec![1.0, 2.0, 4.0],
            max_halvings: 6,
            deflation: true,
            t_limit: None,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !(self.dt0_rel > 0.0) || self.eps0_rel == 0.0 || !self.eps0_rel.is_finite() {
            return Err(Error::Validation(
                "continuation needs steps >= 1, dt0_rel > 0 and a nonzero eps0_rel".into(),
            ));
        }
        if self.eps_ladder.is_empty() || self.eps_ladder.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Validation("eps ladder must be nonempty and positive".into()));
        }
        Ok(())
    }
}

/// Newton on the discrete one-dimensional problem, started from `profile`.
fn polish_profile(model: &NonlinearityModel, profile: &mut [f64]) -> Result<()> {
    let m = profile.len() - 1;
    let h = 1.0 / m as f64;
    let grid = uniform_grid(m);
    let sw: Vec<f64> = (0..m).map(|k| if k == 0 { 0.5f64.sqrt() } else { 1.0 }).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..30 {
        let r: Vec<f64> = (0..m)
            .map(|k| {
                let down = if k == 0 { profile[1] } else { profile[k - 1] };
                (2.0 * profile[k] - down - profile[k + 1]) / (h * h) - model.eval_f(profile[k])
            })
            .collect();
        residual = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let q: Vec<f64> = profile.iter().map(|&v| model.eval_fprime(v)).collect();
        let op = assemble_sl_operator(&grid, &q)?;
        let rhs: Vec<f64> = (0..m).map(|k| -sw[k] * r[k]).collect();
        let y = op.matrix().solve(&rhs)?;
        let mut step = 0.0f64;
        let mut size = 0.0f64;
        for k in 0..m {
            let d = y[k] / sw[k];
            profile[k] += d;
            step = step.max(d.abs());
            size = size.max(profile[k].abs());
        }
        if step <= 1e-14 * size.max(1.0) {
            return Ok(());
        }
    }
    Err(Error::convergence("discrete profile polishing", 30, residual))
}

/// `zᵢ` sampled on `ny` nodes by linear interpolation of the spectrum grid.
fn sample_eigenfunction(spec: &SturmSpectrum, i: usize, ny: usize) -> Vec<f64> {
    let z = &spec.eigenfunctions[i - 1];
    let m = z.len() - 1;
    (0..ny)
        .map(|j| {
            let pos = j as f64 / (ny - 1) as f64 * m as f64;
            let k = (pos.floor() as usize).min(m - 1);
            let frac = pos - k as f64;
            (1.0 - frac) * z[k] + frac * z[k + 1]
        })
        .collect()
}

/// `w = zᵢ(x_N)·cos(jπx′)` normalized in `L²` of the unit square.
pub fn build_kernel_mode(spec: &SturmSpectrum, i: usize, j: usize, l_base: f64, grid: Grid2D) -> Result<KernelMode> {
    grid.validate()?;
    if !(l_base > 0.0) {
        return Err(Error::Validation(format!("base length must be positive, got {l_base}")));
    }
    if i == 0 || i > spec.alphas.len() {
        return Err(Error::Validation(format!(
            "eigenfunction index {i} outside 1..={}",
            spec.alphas.len()
        )));
    }
    let alpha = spec.alphas[i - 1];
    if j == 0 && alpha.abs() > default_tol_zero(&spec.alphas) {
        return Err(Error::InvalidKernel(format!(
            "j = 0 with alpha_{i} = {alpha} is not a kernel direction"
        )));
    }
    let z = sample_eigenfunction(spec, i, grid.ny);
    let mut w = grid.from_fn(|_, _| 0.0);
    for jy in 0..grid.ny - 1 {
        for ix in 0..grid.nx {
            w[grid.index(ix, jy)] = z[jy] * (j as f64 * std::f64::consts::PI * grid.x(ix)).cos();
        }
    }
    let norm = grid.norm(&w);
    w.iter_mut().for_each(|v| *v /= norm);
    Ok(KernelMode { i, j, w })
}

impl CylinderSetup {
    pub fn new(
        model: &NonlinearityModel,
        nodal_n: usize,
        l_base: f64,
        grid: Grid2D,
        newton: NewtonConfig,
        shooting: &ShootingConfig,
    ) -> Result<Self> {
        grid.validate()?;
        newton.validate()?;
        if !(l_base > 0.0) {
            return Err(Error::Validation(format!("base length must be positive, got {l_base}")));
        }
        let sol = find_one_dim_solution(model, nodal_n, shooting)?;
        let mut profile = sample_profile(model, sol.amplitude, grid.ny - 1, PROFILE_MIN_STEPS)?;
        polish_profile(model, &mut profile)?;
        let q: Vec<f64> = profile.iter().map(|&v| model.eval_fprime(v)).collect();
        let op = assemble_sl_operator(&uniform_grid(grid.ny - 1), &q)?;
        let spectrum = sl_eigenpairs(&op, default_eigen_count(nodal_n).min(grid.ny - 2))?;
        let u_omega = grid.embed_profile(&profile)?;
        Ok(CylinderSetup {
            model: *model,
            nodal_n,
            l_base,
            grid,
            profile,
            u_omega,
            spectrum,
            newton,
            nodal_tol_rel: NODAL_TOL_REL_2D,
        })
    }

    pub fn operator(&self, t: f64) -> Result<TransportedOperator> {
        TransportedOperator::new(t, self.l_base, self.grid)
    }

    pub fn distance_to_1d(&self, u: &[f64]) -> f64 {
        let diff: Vec<f64> = u.iter().zip(&self.u_omega).map(|(a, b)| a - b).collect();
        self.grid.norm(&diff) / self.grid.norm(&self.u_omega)
    }

    pub fn evaluate(&self, t: f64, out: NewtonOutcome) -> Result<BranchPoint> {
        let g = self.grid;
        let nonzero = out.u.iter().any(|v| *v != 0.0);
        let deviation = if nonzero {
            one_dimensionality_deviation(&out.u, g)?
        } else {
            0.0
        };
        let nodal_count_2d = if nonzero {
            {
                let sup = out.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                count_nodal_domains_2d(&out.u, g, self.nodal_tol_rel * sup)?
            }
        } else {
            0
        };
        Ok(BranchPoint {
            t,
            deviation,
            nodal_count_2d,
            newton_iters: out.iterations,
            distance_to_1d: self.distance_to_1d(&out.u),
            residual: out.residual,
            energy: eval_energy(&out.u, t, self.l_base, &self.model, g)?,
            solution: out.u,
        })
    }

    pub fn newton_solve(&self, initial: &[f64], t: f64) -> Result<BranchPoint> {
        let out = newton_solve(initial, &self.operator(t)?, &self.model, &self.newton, None)?;
        self.evaluate(t, out)
    }

    /// True when a converged point is `u_ω` or another one-dimensional solution.
    pub fn is_trivial(&self, p: &BranchPoint) -> bool {
        let tol = 10.0 * self.newton.tol;
        p.distance_to_1d <= tol || p.deviation <= tol
    }

    /// Scaling at which `αᵢ + λⱼ(tω) = 0` for the discrete spectra.
    pub fn discrete_t_bar(&self, i: usize, j: usize) -> Result<f64> {
        let alpha = *self
            .spectrum
            .alphas
            .get(i.wrapping_sub(1))
            .ok_or_else(|| Error::Validation(format!("no alpha_{i} computed")))?;
        if alpha >= 0.0 || j == 0 {
            return Err(Error::Validation(format!(
                "(i, j) = ({i}, {j}) has no degeneracy: alpha_{i} = {alpha}"
            )));
        }
        let hx = self.grid.hx();
        let mu = 2.0 / (hx * hx) * (1.0 - (j as f64 * std::f64::consts::PI * hx).cos());
        Ok((mu / -alpha).sqrt() / self.l_base)
    }

    pub fn kernel_mode(&self, i: usize, j: usize) -> Result<KernelMode> {
        build_kernel_mode(&self.spectrum, i, j, self.l_base, self.grid)
    }

    pub fn branch_switch(&self, point: &BifurcationPoint) -> Result<BranchSwitch> {
        if !point.simple || point.pairs.len() != 1 {
            return Err(Error::Validation(format!(
                "branch switching needs a simple degeneracy, t = {} has kernel multiplicity {}",
                point.t_bar, point.kernel_multiplicity
            )));
        }
        let (i, j) = point.pairs[0];
        let kernel = self.kernel_mode(i, j)?;
        Ok(BranchSwitch {
            i,
            j,
            t_bar: self.discrete_t_bar(i, j)?,
            t_bar_continuum: point.t_bar,
            kernel,
        })
    }

    /// Negative eigenvalue count of the linearization at `p`.
    pub fn morse_index_at(&self, p: &BranchPoint) -> Result<usize> {
        assemble_linearized(&p.solution, p.t, self.l_base, &self.model, self.grid)?
            .negative_count(&EigenConfig::default())
    }
}

fn try_solve(setup: &CylinderSetup, guess: &[f64], t: f64, deflate: bool) -> Option<BranchPoint> {
    let op = setup.operator(t).ok()?;
    let known = deflate.then_some(setup.u_omega.as_slice());
    match newton_solve(guess, &op, &setup.model, &setup.newton, known) {
        Ok(out) => {
            let p = setup.evaluate(t, out).ok()?;
            if setup.is_trivial(&p) {
                debug!("t = {t}: converged to a one-dimensional solution");
                None
            } else {
                Some(p)
            }
        }
        Err(e) => {
            debug!("t = {t}: {e}");
            None
        }
    }
}

/// Leaves `u_ω` along `±eps0·w` at `t̄ + direction·dt0`, then continues the
/// branch away from `t̄` by natural-parameter steps.
pub fn continue_branch(
    setup: &CylinderSetup,
    switch: &BranchSwitch,
    direction: i32,
    cfg: &ContinuationConfig,
) -> Result<Vec<BranchPoint>> {
    cfg.validate()?;
    if direction != 1 && direction != -1 {
        return Err(Error::Validation(format!(
            "direction must be +1 or -1, got {direction}"
        )));
    }
    let sign = direction as f64;
    let dt0 = cfg.dt0_rel * switch.t_bar;
    let eps0 = cfg.eps0_rel * setup.grid.norm(&setup.u_omega);
    let t1 = switch.t_bar + sign * dt0;
    let mut first = None;
    'ladder: for factor in &cfg.eps_ladder {
        let guess: Vec<f64> = setup
            .u_omega
            .iter()
            .zip(&switch.kernel.w)
            .map(|(u, w)| u + factor * eps0 * w)
            .collect();
        for deflate in [false, true] {
            if deflate && !cfg.deflation {
                continue;
            }
            if let Some(p) = try_solve(setup, &guess, t1, deflate) {
                info!(
                    "branch found at t = {t1} (eps factor {factor}, deflation {deflate}): distance {:.3e}",
                    p.distance_to_1d
                );
                first = Some(p);
                break 'ladder;
            }
        }
    }
    let Some(first) = first else {
        return Err(Error::BranchNotFound(format!(
            "every start near t = {t1} returned to a one-dimensional solution or failed"
        )));
    };
    let mut branch = vec![first];
    let mut dt = dt0;
    while branch.len() < cfg.steps {
        let last = branch.last().unwrap();
        let mut accepted = None;
        let mut step = dt;
        for _ in 0..=cfg.max_halvings {
            let t = last.t + sign * step;
            if cfg.t_limit.is_some_and(|lim| sign * (t - lim) > 0.0) {
                info!("continuation reached the t limit");
                return Ok(branch);
            }
            let guess: Vec<f64> = match branch.len() {
                1 => last.solution.clone(),
                n => {
                    let prev = &branch[n - 2];
                    let s = (t - last.t) / (last.t - prev.t);
                    last.solution
                        .iter()
                        .zip(&prev.solution)
                        .map(|(a, b)| a + s * (a - b))
                        .collect()
                }
            };
            if let Some(p) = try_solve(setup, &guess, t, false) {
                accepted = Some(p);
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some(p) => {
                dt = (p.t - last.t).abs();
                branch.push(p);
            }
            None => {
                warn!(
                    "continuation stopped at t = {} after {} halvings",
                    branch.last().unwrap().t,
                    cfg.max_halvings
                );
                break;
            }
        }
    }
    Ok(branch)
}

/// Walks from `start` toward `t̄` over offsets shrinking by `ratio`.
/// Near a pitchfork the branch scales like `√|t − t̄|`, which sets the predictor.
pub fn backtrack(
    setup: &CylinderSetup,
    switch: &BranchSwitch,
    start: &BranchPoint,
    ratio: f64,
    count: usize,
) -> Result<Vec<BranchPoint>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Validation(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    let mut out: Vec<BranchPoint> = Vec::with_capacity(count);
    let mut prev = start.clone();
    for _ in 0..count {
        let offset = (prev.t - switch.t_bar) * ratio;
        let t = switch.t_bar + offset;
        let s = ratio.sqrt();
        let guess: Vec<f64> = setup
            .u_omega
            .iter()
            .zip(&prev.solution)
            .map(|(u0, u)| u0 + s * (u - u0))
            .collect();
        let p = try_solve(setup, &guess, t, false)
            .ok_or_else(|| Error::BranchNotFound(format!("lost the branch at t = {t} (offset {offset:e})")))?;
        info!("t - t_bar = {offset:.3e}: distance {:.3e}", p.distance_to_1d);
        out.push(p.clone());
        prev = p;
    }
    Ok(out)
}

/// `‖a − Rb‖₂/‖a‖₂` with `R` the reflection `x′ ↦ 1 − x′`.
pub fn reflection_defect(a: &[f64], b: &[f64], grid: Grid2D) -> Result<f64> {
    grid.check_vector(a)?;
    grid.check_vector(b)?;
    let rb = grid.reflect_x(b);
    let diff: Vec<f64> = a.iter().zip(&rb).map(|(x, y)| x - y).collect();
    let na = grid.norm(a);
    if na == 0.0 {
        return Err(Error::DegenerateInput("reflection defect of the zero function".into()));
    }
    Ok(grid.norm(&diff) / na)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionRow {
    pub index: usize,
    pub direct: f64,
    pub composed: f64,
    pub relative_error: f64,
}

/// Compares the `k` smallest eigenvalues of the linearization at `u_ω` with
/// the sorted sums `αᵢ + λⱼ(tω)`.
pub fn verify_decomposition(setup: &CylinderSetup, t: f64, k: usize, alphas: &[f64]) -> Result<Vec<DecompositionRow>> {
    let cutoff = *alphas
        .last()
        .ok_or_else(|| Error::Validation("no alphas supplied".into()))?;
    let base = neumann_eigenvalues(
        &BaseDomain::Interval {
            length: t * setup.l_base,
        },
        cutoff - alphas[0],
    )?;
    let composed = compose_spectrum(alphas, &base, cutoff)?.values_with_multiplicity();
    if composed.len() < k {
        return Err(Error::InsufficientSpectrum(format!(
            "only {} composed eigenvalues below {cutoff}; supply more alphas",
            composed.len()
        )));
    }
    let op = assemble_linearized(&setup.u_omega, t, setup.l_base, &setup.model, setup.grid)?;
    let direct = smallest_eigenvalues(&op, k)?;
    Ok(direct
        .iter()
        .zip(&composed)
        .enumerate()
        .map(|(index, (&d, &c))| DecompositionRow {
            index: index + 1,
            direct: d,
            composed: c,
            relative_error: (d - c).abs() / c.abs(),
        })
        .collect())
}
