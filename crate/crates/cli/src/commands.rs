//! One function per subcommand. Each writes `<subcommand>.csv` (plus any
//! extra dumps) and returns the scalar results that go into `summary.json`.

use anyhow::bail;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use cylbif_core::base_spectrum::{neumann_eigenvalues_with, scale_spectrum, BaseDomain, BaseSpectrum, NeumannOptions};
use cylbif_core::morse_bifurcation::{
    default_tol_zero, degeneracy_times, ground_state_flag, morse_index, morse_index_with_tol, morse_jumps, morse_vs_t,
    MorseReport,
};
use cylbif_core::nonlinearity::{check_hypotheses, default_samples};
use cylbif_core::ode_shooting::{find_one_dim_solution, OneDimSolution};
use cylbif_core::pde_rectangle::{
    backtrack, continue_branch, reflection_defect, verify_decomposition, BranchPoint, ContinuationConfig, CylinderSetup,
};
use cylbif_core::sturm_liouville::{
    default_eigen_count, extrapolated_spectrum, nondegeneracy_margin, oscillation_check, spectrum_for_profile,
};
use cylbif_core::Error;

use crate::config::RunConfig;
use crate::output::{num, Output};

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Output,
}

impl Context<'_> {
    fn solve_1d(&self) -> anyhow::Result<OneDimSolution> {
        Ok(find_one_dim_solution(
            &self.cfg.model,
            self.cfg.nodal_n,
            &self.cfg.shooting(),
        )?)
    }

    fn eigen_count(&self) -> usize {
        self.cfg
            .eigen_count
            .unwrap_or_else(|| default_eigen_count(self.cfg.nodal_n))
    }

    /// The configured spectrum if one is given, else the extrapolated one.
    fn alphas(&self) -> anyhow::Result<Vec<f64>> {
        if let Some(a) = &self.cfg.alphas {
            return Ok(a.clone());
        }
        let sol = self.solve_1d()?;
        let ex = extrapolated_spectrum(
            &self.cfg.model,
            sol.amplitude,
            &self.cfg.richardson_grids(),
            self.eigen_count(),
        )?;
        Ok(ex.alphas)
    }

    fn base(&self, cutoff: f64) -> anyhow::Result<BaseSpectrum> {
        let opts = NeumannOptions {
            radial_only: self.cfg.radial_only,
            ..NeumannOptions::default()
        };
        Ok(neumann_eigenvalues_with(&self.cfg.base, cutoff, &opts)?)
    }

    /// Smallest base cutoff that keeps every `λ_j/t² ≤ −α₁` up to `t_max`.
    fn covering_cutoff(&self, alphas: &[f64], t_max: f64) -> f64 {
        let need = (-alphas[0]).max(0.0) * t_max * t_max;
        self.cfg.cutoff.max(1.05 * need + 1.0)
    }

    fn tol_zero(&self, alphas: &[f64]) -> f64 {
        self.cfg.tolerances.tol_zero.unwrap_or_else(|| default_tol_zero(alphas))
    }

    fn interval_length(&self, command: &str) -> anyhow::Result<f64> {
        match self.cfg.base {
            BaseDomain::Interval { length } => Ok(length),
            _ => Err(Error::Validation(format!("{command} supports interval bases only")).into()),
        }
    }

    fn setup(&self, length: f64) -> anyhow::Result<CylinderSetup> {
        let mut setup = CylinderSetup::new(
            &self.cfg.model,
            self.cfg.nodal_n,
            length,
            self.cfg.grid()?,
            self.cfg.newton(),
            &self.cfg.shooting(),
        )?;
        setup.nodal_tol_rel = self.cfg.tolerances.nodal_rel;
        Ok(setup)
    }
}

pub fn check_f(ctx: &Context) -> anyhow::Result<Value> {
    let model = &ctx.cfg.model;
    let samples = default_samples();
    let report = check_hypotheses(model, &samples)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|&s| {
            let (f, fp) = (model.eval_f(s), model.eval_fprime(s));
            vec![
                num(s),
                num(f),
                num(fp),
                (fp * s * s > f * s).to_string(),
                (s * f > 0.0).to_string(),
            ]
        })
        .collect();
    ctx.out
        .csv("check-f.csv", &["s", "f", "fprime", "superlinear", "sign"], &rows)?;
    if !report.all_pass() {
        log::warn!("nonlinearity fails the hypotheses at {} samples", report.failures.len());
    }
    Ok(json!({
        "all_pass": report.all_pass(),
        "superlinear": report.superlinear,
        "sign": report.sign,
        "failures": report.failures,
    }))
}

pub fn solve_1d(ctx: &Context) -> anyhow::Result<Value> {
    let sol = ctx.solve_1d()?;
    let rows: Vec<Vec<String>> = (0..sol.grid.len())
        .map(|k| vec![num(sol.grid[k]), num(sol.values[k]), num(sol.derivative_values[k])])
        .collect();
    ctx.out.csv("solve-1d.csv", &["x", "u", "du"], &rows)?;
    Ok(json!({
        "amplitude": sol.amplitude,
        "nodal_count": sol.nodal_count,
        "residual": sol.residual,
        "max_abs": sol.max_abs(),
    }))
}

pub fn spectrum_1d(ctx: &Context) -> anyhow::Result<Value> {
    let cfg = ctx.cfg;
    let sol = ctx.solve_1d()?;
    let grids = cfg.richardson_grids();
    let k = ctx.eigen_count();
    let ex = extrapolated_spectrum(&cfg.model, sol.amplitude, &grids, k)?;
    let fine = spectrum_for_profile(&cfg.model, sol.amplitude, grids[2], k)?;
    let rows: Vec<Vec<String>> = (0..ex.alphas.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                num(ex.alphas[i]),
                num(ex.raw_error[i]),
                num(ex.extrapolation_error[i]),
                fine.zero_counts[i].to_string(),
            ]
        })
        .collect();
    ctx.out.csv(
        "spectrum-1d.csv",
        &["i", "alpha", "raw_error", "extrapolation_error", "zero_count"],
        &rows,
    )?;
    let m_xn = ex.alphas.iter().filter(|a| **a < 0.0).count();
    Ok(json!({
        "amplitude": sol.amplitude,
        "richardson_grids": grids,
        "m_xn": m_xn,
        "oscillation_ok": oscillation_check(&fine),
        "nondegeneracy_margin": nondegeneracy_margin(&fine),
    }))
}

pub fn base_eigs(ctx: &Context) -> anyhow::Result<Value> {
    let base = ctx.base(ctx.cfg.cutoff)?;
    let rows: Vec<Vec<String>> = base
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let labels: Vec<String> = e.labels.iter().map(|l| l.to_string()).collect();
            vec![
                j.to_string(),
                num(e.value),
                e.multiplicity.to_string(),
                labels.join(" "),
            ]
        })
        .collect();
    ctx.out
        .csv("base-eigs.csv", &["j", "value", "multiplicity", "labels"], &rows)?;
    Ok(json!({
        "cutoff": base.cutoff,
        "distinct": base.eigenvalues.len(),
        "total_multiplicity": base.total_multiplicity(),
    }))
}

fn morse_report(ctx: &Context, alphas: &[f64], base: &BaseSpectrum) -> anyhow::Result<MorseReport> {
    Ok(match ctx.cfg.tolerances.tol_zero {
        Some(tol) => morse_index_with_tol(alphas, base, tol)?,
        None => morse_index(alphas, base)?,
    })
}

/// Seeded synthetic spectra over random rectangles; the formula is checked
/// against the composed multiset inside `morse_index`.
fn random_morse_checks(count: usize, seed: u64) -> anyhow::Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let negatives = rng.gen_range(1..=4);
        let mut alphas: Vec<f64> = (0..negatives).map(|_| -rng.gen_range(0.1..300.0)).collect();
        alphas.extend((0..3).map(|_| rng.gen_range(0.1..400.0)));
        alphas.sort_by(f64::total_cmp);
        let domain = BaseDomain::Rectangle {
            a: rng.gen_range(0.2..4.0),
            b: rng.gen_range(0.2..4.0),
        };
        let base = neumann_eigenvalues_with(&domain, 400.0, &NeumannOptions::default())?;
        morse_index(&alphas, &base)?;
    }
    Ok(count)
}

pub fn morse(ctx: &Context) -> anyhow::Result<Value> {
    let cfg = ctx.cfg;
    let alphas = ctx.alphas()?;
    let t_grid = cfg.t_range.grid();
    let t_max = cfg.t_range.t_max.max(cfg.t_eval);
    let base = ctx.base(ctx.covering_cutoff(&alphas, t_max))?;
    let at = morse_report(ctx, &alphas, &scale_spectrum(&base, cfg.t_eval)?)?;
    let samples = morse_vs_t(&alphas, &base, &t_grid)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vec![num(s.t), s.m.to_string(), s.degenerate.to_string()])
        .collect();
    ctx.out.csv("morse.csv", &["t", "m", "degenerate"], &rows)?;
    let checked = random_morse_checks(cfg.random_checks, cfg.seed)?;
    Ok(json!({
        "alphas": alphas,
        "base_cutoff": base.cutoff,
        "t_eval": cfg.t_eval,
        "m": at.m,
        "m_xn": at.m_xn,
        "contributions": at.contributions,
        "brute_force_m": at.brute_force_m,
        "degenerate": at.degenerate,
        "zero_multiplicity": at.zero_multiplicity,
        "tol_zero": at.tol_zero,
        "jumps": morse_jumps(&samples),
        "random_checks_passed": checked,
    }))
}

pub fn bifurcation_points(ctx: &Context) -> anyhow::Result<Value> {
    let alphas = ctx.alphas()?;
    let t_max = ctx.cfg.t_range.t_max;
    let base = ctx.base(ctx.covering_cutoff(&alphas, t_max))?;
    let points = degeneracy_times(&alphas, &base, t_max)?;
    let mut rows = Vec::new();
    for p in &points {
        for &(i, j) in &p.pairs {
            rows.push(vec![
                num(p.t_bar),
                i.to_string(),
                j.to_string(),
                p.kernel_multiplicity.to_string(),
                p.simple.to_string(),
            ]);
        }
    }
    ctx.out.csv(
        "bifurcation-points.csv",
        &["t_bar", "i", "j", "multiplicity", "simple"],
        &rows,
    )?;
    Ok(json!({
        "alphas": alphas,
        "t_max": t_max,
        "count": points.len(),
        "ground_state_flag": ground_state_flag(&alphas, &base)?,
        "tol_zero": ctx.tol_zero(&alphas),
    }))
}

pub fn verify_decomposition_cmd(ctx: &Context) -> anyhow::Result<Value> {
    let cfg = ctx.cfg;
    let length = ctx.interval_length("verify-decomposition")?;
    let alphas = ctx.alphas()?;
    let setup = ctx.setup(length)?;
    let rows = verify_decomposition(&setup, cfg.t_eval, cfg.decomposition_count, &alphas)?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                num(r.direct),
                num(r.composed),
                num(r.relative_error),
            ]
        })
        .collect();
    ctx.out.csv(
        "verify-decomposition.csv",
        &["index", "direct", "composed", "relative_error"],
        &csv,
    )?;
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    Ok(json!({
        "t": cfg.t_eval,
        "count": rows.len(),
        "max_relative_error": worst,
    }))
}

fn branch_row(stage: &str, side: &str, p: &BranchPoint) -> Vec<String> {
    vec![
        stage.to_string(),
        side.to_string(),
        num(p.t),
        num(p.deviation),
        num(p.distance_to_1d),
        p.nodal_count_2d.to_string(),
        p.newton_iters.to_string(),
        num(p.energy),
        num(p.residual),
    ]
}

fn dump_branch_point(ctx: &Context, setup: &CylinderSetup, name: &str, p: &BranchPoint) -> anyhow::Result<()> {
    let g = setup.grid;
    let mut rows = Vec::with_capacity(g.len());
    for j in 0..g.ny {
        for i in 0..g.nx {
            rows.push(vec![num(g.x(i)), num(g.y(j)), num(p.solution[g.index(i, j)])]);
        }
    }
    ctx.out.csv(name, &["x", "x_N", "u"], &rows)?;
    Ok(())
}

pub fn continue_cmd(ctx: &Context) -> anyhow::Result<Value> {
    let cfg = ctx.cfg;
    let length = ctx.interval_length("continue")?;
    let alphas = ctx.alphas()?;
    let t_max = cfg.t_range.t_max;
    let base = ctx.base(ctx.covering_cutoff(&alphas, t_max))?;
    let points = degeneracy_times(&alphas, &base, t_max)?;
    let Some(point) = points.get(cfg.bifurcation_index - 1) else {
        bail!(Error::Validation(format!(
            "bifurcation_index {} requested but only {} points lie below t_max = {t_max}",
            cfg.bifurcation_index,
            points.len()
        )));
    };
    let setup = ctx.setup(length)?;
    let switch = setup.branch_switch(point)?;

    // The two half-branches leave u_ω along +w and -w.
    let mut rows = Vec::new();
    let mut sides = serde_json::Map::new();
    let mut found: Vec<(&str, Vec<BranchPoint>)> = Vec::new();
    let mut last_err = None;
    for (side, sign) in [("plus", 1.0), ("minus", -1.0)] {
        let side_cfg = ContinuationConfig {
            eps0_rel: sign * cfg.continuation.eps0_rel,
            ..cfg.continuation.clone()
        };
        match continue_branch(&setup, &switch, cfg.direction, &side_cfg) {
            Ok(branch) => {
                for (k, p) in branch.iter().enumerate() {
                    rows.push(branch_row("continue", side, p));
                    dump_branch_point(ctx, &setup, &format!("branch_{side}_{}.csv", k + 1), p)?;
                }
                let first = &branch[0];
                let morse = setup.morse_index_at(first)?;
                sides.insert(
                    side.into(),
                    json!({
                        "found": true,
                        "points": branch.len(),
                        "max_deviation": branch.iter().map(|p| p.deviation).fold(0.0, f64::max),
                        "first_point_morse_index": morse,
                        "first_point_nodal_count": first.nodal_count_2d,
                        "morse_at_least_nodal_count": morse >= first.nodal_count_2d,
                    }),
                );
                found.push((side, branch));
            }
            Err(e) => {
                log::warn!("{side} half-branch: {e}");
                sides.insert(side.into(), json!({ "found": false, "reason": e.to_string() }));
                last_err = Some(e);
            }
        }
    }

    let mut backtrack_distances = Vec::new();
    if cfg.backtrack_ratio > 0.0 && cfg.backtrack_steps > 0 {
        if let Some((side, branch)) = found.first() {
            let back = backtrack(&setup, &switch, &branch[0], cfg.backtrack_ratio, cfg.backtrack_steps)?;
            backtrack_distances.push(branch[0].distance_to_1d);
            for p in &back {
                rows.push(branch_row("backtrack", side, p));
                backtrack_distances.push(p.distance_to_1d);
            }
        }
    }

    ctx.out.csv(
        "continue.csv",
        &[
            "stage",
            "sign",
            "t",
            "deviation",
            "distance_to_1d",
            "nodal_count",
            "newton_iters",
            "energy",
            "residual",
        ],
        &rows,
    )?;

    if found.is_empty() {
        return Err(last_err.expect("both sides failed").into());
    }
    let reflection = match found.as_slice() {
        [(_, a), (_, b)] => Some(reflection_defect(&a[0].solution, &b[0].solution, setup.grid)?),
        _ => None,
    };
    let e1d = |t: f64| cylbif_core::pde_rectangle::eval_energy(&setup.u_omega, t, length, &setup.model, setup.grid);
    let first = &found[0].1[0];
    Ok(json!({
        "t_bar": switch.t_bar,
        "t_bar_continuum": switch.t_bar_continuum,
        "pair": [switch.i, switch.j],
        "direction": cfg.direction,
        "sides": sides,
        "reflection_defect": reflection,
        "energy_first_point": first.energy,
        "energy_one_dimensional": e1d(first.t)?,
        "backtrack_distances": backtrack_distances,
    }))
}
