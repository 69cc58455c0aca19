//! Morse index, degeneracy and bifurcation scalings of one-dimensional
//! solutions from the two factor spectra.
//!
//! The linearization at `u_ω` separates: its eigenvalues are exactly the
//! sums `αᵢ + λⱼ` of the one-dimensional spectrum and the Neumann spectrum
//! of `ω`, with the multiplicity of `λⱼ`. Scaling `ω ↦ tω` divides every
//! `λⱼ` by `t²`, so `αᵢ + λⱼ/t²` crosses zero at `t̄ = √(λⱼ/(−αᵢ))`.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::base_spectrum::{scale_spectrum, BaseSpectrum};
use crate::error::{Error, Result};

/// Relative tolerance for treating two bifurcation scalings as equal.
pub const T_BAR_MERGE_TOL: f64 = 1e-9;

/// Default zero tolerance `1e-8 · max(1, |α₁|)`.
pub fn default_tol_zero(alphas: &[f64]) -> f64 {
    1e-8 * alphas.first().map_or(1.0, |a| a.abs().max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComposedEntry {
    pub value: f64,
    /// 1-based index of `αᵢ`.
    pub i: usize,
    /// Index of the distinct base eigenvalue (0 is the constant mode).
    pub j: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComposedSpectrum {
    pub entries: Vec<ComposedEntry>,
    pub cutoff: f64,
}

impl ComposedSpectrum {
    /// Values repeated by multiplicity.
    pub fn values_with_multiplicity(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }

    /// Number of negative eigenvalues, with multiplicity.
    pub fn negative_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.value < 0.0)
            .map(|e| e.multiplicity)
            .sum()
    }
}

fn check_sorted(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Validation("one-dimensional spectrum is empty".into()));
    }
    if alphas.iter().any(|a| !a.is_finite()) || alphas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation("alphas must be finite and sorted ascending".into()));
    }
    Ok(())
}

fn check_base_covers(base: &BaseSpectrum, needed: f64) -> Result<()> {
    if base.cutoff < needed {
        return Err(Error::Coverage(format!(
            "base spectrum enumerated up to {} but {needed} is needed",
            base.cutoff
        )));
    }
    Ok(())
}

/// All sums `αᵢ + λⱼ ≤ cutoff`, where `alphas` are the lowest computed
/// eigenvalues of a longer spectrum. Completeness requires
/// `α_last ≥ cutoff` and `base.cutoff ≥ cutoff − α₁`.
pub fn compose_spectrum(alphas: &[f64], base: &BaseSpectrum, cutoff: f64) -> Result<ComposedSpectrum> {
    check_sorted(alphas)?;
    let last = *alphas.last().unwrap();
    if last < cutoff {
        return Err(Error::Coverage(format!(
            "largest computed alpha {last} is below the cutoff {cutoff}; unseen alphas could contribute"
        )));
    }
    compose_finite(alphas, base, cutoff)
}

/// Like [`compose_spectrum`] but treats `alphas` as the complete
/// one-dimensional spectrum (synthetic inputs).
pub fn compose_finite(alphas: &[f64], base: &BaseSpectrum, cutoff: f64) -> Result<ComposedSpectrum> {
    check_sorted(alphas)?;
    check_base_covers(base, cutoff - alphas[0])?;
    let mut entries = Vec::new();
    for (i, &a) in alphas.iter().enumerate() {
        for (j, lam) in base.eigenvalues.iter().enumerate() {
            let value = a + lam.value;
            if value > cutoff {
                break;
            }
            entries.push(ComposedEntry {
                value,
                i: i + 1,
                j,
                multiplicity: lam.multiplicity,
            });
        }
    }
    entries.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.i.cmp(&y.i)));
    Ok(ComposedSpectrum { entries, cutoff })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseReport {
    /// Full Morse index of `u_ω` on the cylinder.
    pub m: usize,
    /// Number of negative `αᵢ`.
    pub m_xn: usize,
    /// For each negative `αᵢ`, `#{j ≥ 1 : λⱼ < −αᵢ}` with multiplicity.
    pub contributions: Vec<usize>,
    /// Negative entries of the composed multiset, counted independently.
    pub brute_force_m: usize,
    pub degenerate: bool,
    pub zero_multiplicity: usize,
    pub tol_zero: f64,
}

pub fn morse_index(alphas: &[f64], base: &BaseSpectrum) -> Result<MorseReport> {
    morse_index_with_tol(alphas, base, default_tol_zero(alphas))
}

pub fn morse_index_with_tol(alphas: &[f64], base: &BaseSpectrum, tol_zero: f64) -> Result<MorseReport> {
    check_sorted(alphas)?;
    if !(tol_zero >= 0.0) {
        return Err(Error::Validation(format!("tol_zero must be >= 0, got {tol_zero}")));
    }
    if *alphas.last().unwrap() <= tol_zero {
        return Err(Error::InsufficientSpectrum(
            "no positive alpha computed; the one-dimensional Morse index is not certified".into(),
        ));
    }
    let m_xn = alphas.iter().filter(|a| **a < 0.0).count();
    check_base_covers(base, -alphas[0] + tol_zero)?;

    let contributions: Vec<usize> = alphas[..m_xn].iter().map(|a| base.count_positive_below(-a)).collect();
    let m = m_xn + contributions.iter().sum::<usize>();

    let near_zero = compose_spectrum(alphas, base, tol_zero)?;
    let brute_force_m = near_zero.negative_count();
    let zero_multiplicity: usize = near_zero
        .entries
        .iter()
        .filter(|e| e.value.abs() < tol_zero)
        .map(|e| e.multiplicity)
        .sum();
    if brute_force_m != m {
        return Err(Error::Validation(format!(
            "Morse formula gives {m} but the composed spectrum has {brute_force_m} negative entries"
        )));
    }
    Ok(MorseReport {
        m,
        m_xn,
        contributions,
        brute_force_m,
        degenerate: zero_multiplicity > 0,
        zero_multiplicity,
        tol_zero,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub t_bar: f64,
    /// `(i, j)`: 1-based `αᵢ` index and distinct base eigenvalue index.
    pub pairs: Vec<(usize, usize)>,
    pub kernel_multiplicity: usize,
    pub simple: bool,
}

/// All scalings `t̄ ≤ t_max` at which `u_{tω}` is degenerate, ascending.
/// `base` is the spectrum of the unit domain `ω`.
pub fn degeneracy_times(alphas: &[f64], base: &BaseSpectrum, t_max: f64) -> Result<Vec<BifurcationPoint>> {
    check_sorted(alphas)?;
    if !(t_max > 0.0) {
        return Err(Error::Validation(format!("t_max must be positive, got {t_max}")));
    }
    if alphas[0] >= 0.0 {
        return Ok(Vec::new());
    }
    check_base_covers(base, -alphas[0] * t_max * t_max)?;
    let mut raw: Vec<(f64, usize, usize, usize)> = Vec::new();
    for (i, &a) in alphas.iter().enumerate().filter(|(_, a)| **a < 0.0) {
        for (j, lam) in base.eigenvalues.iter().enumerate().filter(|(_, l)| l.value > 0.0) {
            let t = (lam.value / -a).sqrt();
            if t <= t_max {
                raw.push((t, i + 1, j, lam.multiplicity));
            }
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut points: Vec<BifurcationPoint> = Vec::new();
    for (t, i, j, mult) in raw {
        match points.last_mut() {
            Some(p) if (t - p.t_bar).abs() <= T_BAR_MERGE_TOL * t => {
                warn!(
                    "pairs {:?} and ({i}, {j}) degenerate at the same scaling t = {t}; reporting as non-simple",
                    p.pairs
                );
                p.pairs.push((i, j));
                p.kernel_multiplicity += mult;
                p.simple = false;
            }
            _ => points.push(BifurcationPoint {
                t_bar: t,
                pairs: vec![(i, j)],
                kernel_multiplicity: mult,
                simple: mult == 1,
            }),
        }
    }
    Ok(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorseSample {
    pub t: f64,
    pub m: usize,
    pub degenerate: bool,
}

/// Morse index of `u_{tω}` along an ascending grid of scalings.
pub fn morse_vs_t(alphas: &[f64], base: &BaseSpectrum, t_grid: &[f64]) -> Result<Vec<MorseSample>> {
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "t grid must be positive and strictly ascending".into(),
        ));
    }
    let tol = default_tol_zero(alphas);
    t_grid
        .par_iter()
        .map(|&t| {
            let scaled = scale_spectrum(base, t)?;
            let r = morse_index_with_tol(alphas, &scaled, tol)?;
            Ok(MorseSample {
                t,
                m: r.m,
                degenerate: r.degenerate,
            })
        })
        .collect()
}

/// A change of the Morse index between consecutive samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorseJump {
    pub t_before: f64,
    pub t_after: f64,
    pub from: usize,
    pub to: usize,
}

pub fn morse_jumps(samples: &[MorseSample]) -> Vec<MorseJump> {
    samples
        .windows(2)
        .filter(|w| w[0].m != w[1].m)
        .map(|w| MorseJump {
            t_before: w[0].t,
            t_after: w[1].t,
            from: w[0].m,
            to: w[1].m,
        })
        .collect()
}

/// `λ₁(ω) < −α₁`: a Morse-index-one solution then cannot be one-dimensional.
pub fn ground_state_flag(alphas: &[f64], base: &BaseSpectrum) -> Result<bool> {
    check_sorted(alphas)?;
    let a1 = alphas[0];
    if a1 >= 0.0 {
        return Err(Error::Validation(format!(
            "ground-state test needs alpha_1 < 0, got {a1}"
        )));
    }
    match base.first_positive() {
        Some(l1) => Ok(l1 < -a1),
        None if base.cutoff >= -a1 => Ok(false),
        None => Err(Error::Coverage(format!(
            "base spectrum up to {} does not reach lambda_1 or -alpha_1 = {}",
            base.cutoff, -a1
        ))),
    }
}
