//! One-dimensional profiles: solutions of `−u″ = f(u)` on `(0, 1)` with
//! `u′(0) = 0`, `u(1) = 0`, found by shooting on the amplitude `u(0)`.
//!
//! The initial value problem is integrated with fixed-step classical RK4.
//! Amplitudes are classified by how many sign changes the trajectory has
//! on `[0, 1]`; the solution with `n` nodal domains sits where the `n`-th
//! zero of `u(·; a)` crosses `x = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{check_hypotheses, default_samples, NonlinearityModel};

/// Geometric factor between consecutive amplitudes of the bracket scan.
const SCAN_FACTOR: f64 = 1.25;
/// Sign changes are counted only between values above this fraction of `max|u|`.
pub const NODAL_TOL_REL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    /// RK4 steps over `[0, 1]`.
    pub steps: usize,
    pub amplitude_bracket: (f64, f64),
    pub tol_amplitude: f64,
    pub tol_terminal: f64,
    pub max_bisect: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            steps: 10_000,
            amplitude_bracket: (0.1, 1.0e4),
            tol_amplitude: 1e-12,
            tol_terminal: 1e-10,
            max_bisect: 200,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        let (low, high) = self.amplitude_bracket;
        if self.steps < 100 {
            return Err(Error::Validation(format!(
                "shooting needs at least 100 steps, got {}",
                self.steps
            )));
        }
        if !(low > 0.0 && low < high && high.is_finite()) {
            return Err(Error::Validation(format!(
                "amplitude bracket must satisfy 0 < low < high, got ({low}, {high})"
            )));
        }
        if !(self.tol_amplitude > 0.0 && self.tol_terminal > 0.0) {
            return Err(Error::Validation("shooting tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Samples of `u` and `u′` on the uniform grid `x_k = k / steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> f64 {
        *self.u.last().expect("trajectory is never empty")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneDimSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative_values: Vec<f64>,
    /// `u(0)`.
    pub amplitude: f64,
    pub nodal_count: usize,
    /// Largest finite-difference defect, filled in by [`residual_check`].
    pub residual: f64,
}

impl OneDimSolution {
    /// Number of grid intervals `M`.
    pub fn intervals(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Integrates `u″ = −f(u)`, `u(0) = amplitude`, `u′(0) = 0` on `[0, 1]`
/// with `steps` RK4 steps.
pub fn integrate_ivp(model: &NonlinearityModel, amplitude: f64, steps: usize) -> Result<Trajectory> {
    if steps < 2 {
        return Err(Error::Validation(format!("need at least 2 steps, got {steps}")));
    }
    let h = 1.0 / steps as f64;
    let mut x = Vec::with_capacity(steps + 1);
    let mut u = Vec::with_capacity(steps + 1);
    let mut du = Vec::with_capacity(steps + 1);
    let (mut y, mut v) = (amplitude, 0.0);
    x.push(0.0);
    u.push(y);
    du.push(v);
    let rhs = |y: f64| -model.eval_f(y);
    for k in 1..=steps {
        let k1y = v;
        let k1v = rhs(y);
        let k2y = v + 0.5 * h * k1v;
        let k2v = rhs(y + 0.5 * h * k1y);
        let k3y = v + 0.5 * h * k2v;
        let k3v = rhs(y + 0.5 * h * k2y);
        let k4y = v + h * k3v;
        let k4v = rhs(y + h * k3y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(y.is_finite() && v.is_finite()) {
            return Err(Error::Overflow { node: k });
        }
        x.push(k as f64 * h);
        u.push(y);
        du.push(v);
    }
    Ok(Trajectory { x, u, du })
}

/// Samples the profile with amplitude `a` on `intervals + 1` uniform nodes,
/// integrating with at least `min_steps` RK4 steps (a multiple of
/// `intervals`, so every node is an RK4 node).
pub fn sample_profile(
    model: &NonlinearityModel,
    amplitude: f64,
    intervals: usize,
    min_steps: usize,
) -> Result<Vec<f64>> {
    if intervals == 0 {
        return Err(Error::Validation("profile needs at least one interval".into()));
    }
    let sub = min_steps.div_ceil(intervals).max(1);
    let traj = integrate_ivp(model, amplitude, intervals * sub)?;
    Ok(traj.u.into_iter().step_by(sub).collect())
}

/// `1 +` the number of strict sign changes between consecutive values whose
/// magnitude exceeds `tol`.
pub fn count_nodal_domains_1d(values: &[f64], tol: f64) -> Result<usize> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Validation(format!("nodal tolerance must be >= 0, got {tol}")));
    }
    let mut signs = values.iter().filter(|v| v.abs() > tol).map(|v| v.is_sign_positive());
    let first = signs
        .next()
        .ok_or_else(|| Error::DegenerateInput("all values are below the nodal tolerance".into()))?;
    let (changes, _) = signs.fold((0, first), |(c, prev), s| (c + usize::from(s != prev), s));
    Ok(changes + 1)
}

/// Whether amplitude `a` lies past the `n`-th crossing of `x = 1`.
fn is_past_target(traj: &Trajectory, n: usize) -> bool {
    let m = traj.u.len() - 1;
    let interior = &traj.u[..m];
    let tol = NODAL_TOL_REL * interior.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut changes = 0;
    let mut last: Option<bool> = None;
    for v in interior.iter().filter(|v| v.abs() > tol) {
        let s = v.is_sign_positive();
        if let Some(p) = last {
            changes += usize::from(p != s);
        }
        last = Some(s);
    }
    if changes + 1 > n {
        return true;
    }
    if changes + 1 < n {
        return false;
    }
    let end = traj.terminal();
    match last {
        Some(s) => end != 0.0 && end.is_sign_positive() != s,
        None => false,
    }
}

/// The one-dimensional solution with `n` nodal domains.
pub fn find_one_dim_solution(model: &NonlinearityModel, n: usize, config: &ShootingConfig) -> Result<OneDimSolution> {
    config.validate()?;
    if n == 0 {
        return Err(Error::Validation("nodal count must be at least 1".into()));
    }
    let report = check_hypotheses(model, &default_samples())?;
    if !report.all_pass() {
        return Err(Error::Validation(format!(
            "nonlinearity {model:?} fails the hypotheses at {:?}",
            report.failures
        )));
    }

    let (low, high) = config.amplitude_bracket;
    let classify = |a: f64| -> Result<(bool, Trajectory)> {
        let traj = integrate_ivp(model, a, config.steps)?;
        Ok((is_past_target(&traj, n), traj))
    };

    // Geometric scan for the first amplitude past the target.
    let mut below = low;
    let (past_low, _) = classify(low)?;
    if past_low {
        return Err(Error::NoSolution(format!(
            "amplitude {low} already has more than {} nodal domains",
            n
        )));
    }
    let mut above = None;
    let mut a = low;
    while a < high {
        let next = (a * SCAN_FACTOR).min(high);
        let (past, _) = match classify(next) {
            Ok(c) => c,
            Err(Error::Overflow { .. }) => (true, empty_traj()),
            Err(e) => return Err(e),
        };
        if past {
            above = Some(next);
            break;
        }
        below = next;
        a = next;
    }
    let mut hi =
        above.ok_or_else(|| Error::NoSolution(format!("no amplitude in [{low}, {high}] gives {n} nodal domains")))?;
    let mut lo = below;

    let mut best: Option<Trajectory> = None;
    let mut iterations = 0;
    while hi - lo > config.tol_amplitude * lo.max(1.0) {
        if iterations >= config.max_bisect {
            let residual = best.as_ref().map_or(f64::NAN, |t| t.terminal().abs());
            return Err(Error::convergence("amplitude bisection", iterations, residual));
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let (past, traj) = classify(mid)?;
        if traj.terminal() == 0.0 {
            lo = mid;
            hi = mid;
            best = Some(traj);
            break;
        }
        if past {
            hi = mid;
        } else {
            lo = mid;
        }
        let better = best.as_ref().is_none_or(|b| traj.terminal().abs() < b.terminal().abs());
        if better {
            best = Some(traj);
        }
    }
    let traj = match best {
        Some(t) => t,
        None => integrate_ivp(model, 0.5 * (lo + hi), config.steps)?,
    };
    let terminal = traj.terminal().abs();
    if terminal > config.tol_terminal {
        return Err(Error::convergence("amplitude bisection", iterations, terminal));
    }

    let amplitude = traj.u[0];
    let tol = NODAL_TOL_REL * traj.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nodal_count = count_nodal_domains_1d(&traj.u, tol)?;
    if nodal_count != n {
        return Err(Error::NoSolution(format!(
            "bracket converged to a profile with {nodal_count} nodal domains, wanted {n}"
        )));
    }
    let mut sol = OneDimSolution {
        grid: traj.x,
        values: traj.u,
        derivative_values: traj.du,
        amplitude,
        nodal_count,
        residual: f64::NAN,
    };
    residual_check(&mut sol, model);
    Ok(sol)
}

fn empty_traj() -> Trajectory {
    Trajectory {
        x: vec![0.0],
        u: vec![0.0],
        du: vec![0.0],
    }
}

/// Largest `|−D²u − f(u)|` over interior nodes with the central second
/// difference; stored in `sol.residual` and returned.
pub fn residual_check(sol: &mut OneDimSolution, model: &NonlinearityModel) -> f64 {
    let u = &sol.values;
    let m = u.len() - 1;
    let h = 1.0 / m as f64;
    let inv_h2 = 1.0 / (h * h);
    let residual = (1..m)
        .map(|k| (-(u[k - 1] - 2.0 * u[k] + u[k + 1]) * inv_h2 - model.eval_f(u[k])).abs())
        .fold(0.0, f64::max);
    sol.residual = residual;
    residual
}
