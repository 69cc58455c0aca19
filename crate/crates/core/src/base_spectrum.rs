//! Neumann eigenvalues `λⱼ(ω)` of the base domain and their scaling
//! `λⱼ(tω) = λⱼ(ω)/t²`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_prime_zeros;
use crate::error::{Error, Result};

/// Relative tolerance for grouping numerically equal eigenvalues.
pub const MERGE_TOL_REL: f64 = 1e-9;
/// Default cap on the number of enumerated modes.
pub const DEFAULT_MAX_MODES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseDomain {
    Interval { length: f64 },
    Rectangle { a: f64, b: f64 },
    Disk { radius: f64 },
}

impl BaseDomain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Interval { length } => length > 0.0 && length.is_finite(),
            Self::Rectangle { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Self::Disk { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "base domain needs positive dimensions: {self:?}"
            )))
        }
    }

    /// The domain `tω`.
    pub fn scaled(&self, t: f64) -> Self {
        match *self {
            Self::Interval { length } => Self::Interval { length: t * length },
            Self::Rectangle { a, b } => Self::Rectangle { a: t * a, b: t * b },
            Self::Disk { radius } => Self::Disk { radius: t * radius },
        }
    }

    /// Dimension of `ω` (that is, `N − 1`).
    pub fn dimension(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Length or area.
    pub fn measure(&self) -> f64 {
        match *self {
            Self::Interval { length } => length,
            Self::Rectangle { a, b } => a * b,
            Self::Disk { radius } => std::f64::consts::PI * radius * radius,
        }
    }
}

/// Index of a Neumann mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModeLabel {
    /// `cos(jπx/L)`.
    Interval { j: usize },
    /// `cos(mπx/a) cos(nπy/b)`.
    Rectangle { m: usize, n: usize },
    /// `J_ν(j′_{ν,k} r/R) · {cos, sin}(νθ)`; `k = 0` labels the constant mode.
    Disk { nu: u32, k: usize },
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Interval { j } => write!(f, "{j}"),
            Self::Rectangle { m, n } => write!(f, "({m},{n})"),
            Self::Disk { nu, k } => write!(f, "({nu},{k})"),
        }
    }
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseEigenvalue {
    pub value: f64,
    pub multiplicity: usize,
    pub labels: Vec<ModeLabel>,
}

/// All Neumann eigenvalues of a base domain up to `cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseSpectrum {
    /// Distinct values, ascending, starting with `λ₀ = 0`.
    pub eigenvalues: Vec<BaseEigenvalue>,
    /// Every eigenvalue `≤ cutoff` is listed.
    pub cutoff: f64,
}

impl BaseSpectrum {
    /// Eigenvalues repeated according to multiplicity: `λ₀, λ₁, λ₂, …`.
    pub fn values_with_multiplicity(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }

    /// `#{j ≥ 1 : λⱼ < x}` counted with multiplicity.
    pub fn count_positive_below(&self, x: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|e| e.value > 0.0 && e.value < x)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// `λ₁`, the first positive eigenvalue, if within the cutoff.
    pub fn first_positive(&self) -> Option<f64> {
        self.eigenvalues.iter().map(|e| e.value).find(|v| *v > 0.0)
    }

    /// Total count with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeumannOptions {
    pub max_modes: usize,
    /// Disk only: keep the rotation-invariant (`ν = 0`) modes.
    pub radial_only: bool,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            max_modes: DEFAULT_MAX_MODES,
            radial_only: false,
        }
    }
}

pub fn neumann_eigenvalues(domain: &BaseDomain, cutoff: f64) -> Result<BaseSpectrum> {
    neumann_eigenvalues_with(domain, cutoff, &NeumannOptions::default())
}

pub fn neumann_eigenvalues_with(domain: &BaseDomain, cutoff: f64, options: &NeumannOptions) -> Result<BaseSpectrum> {
    domain.validate()?;
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Validation(format!("cutoff must be positive, got {cutoff}")));
    }
    let limit_exceeded = || {
        Error::Resource(format!(
            "more than {} Neumann modes below cutoff {cutoff}",
            options.max_modes
        ))
    };
    let mut modes: Vec<(f64, ModeLabel, usize)> = Vec::new();
    let pi = std::f64::consts::PI;
    match *domain {
        BaseDomain::Interval { length } => {
            let jmax = (length * cutoff.sqrt() / pi).floor() as usize;
            if jmax + 1 > options.max_modes {
                return Err(limit_exceeded());
            }
            for j in 0..=jmax {
                let v = (j as f64 * pi / length).powi(2);
                if v <= cutoff {
                    modes.push((v, ModeLabel::Interval { j }, 1));
                }
            }
        }
        BaseDomain::Rectangle { a, b } => {
            let mmax = (a * cutoff.sqrt() / pi).floor() as usize;
            let nmax = (b * cutoff.sqrt() / pi).floor() as usize;
            if (mmax + 1).saturating_mul(nmax + 1) > options.max_modes.saturating_mul(2) {
                return Err(limit_exceeded());
            }
            for m in 0..=mmax {
                for n in 0..=nmax {
                    let v = (m as f64 * pi / a).powi(2) + (n as f64 * pi / b).powi(2);
                    if v <= cutoff {
                        modes.push((v, ModeLabel::Rectangle { m, n }, 1));
                        if modes.len() > options.max_modes {
                            return Err(limit_exceeded());
                        }
                    }
                }
            }
        }
        BaseDomain::Disk { radius } => {
            modes.push((0.0, ModeLabel::Disk { nu: 0, k: 0 }, 1));
            let x_max = radius * cutoff.sqrt();
            let mut nu = 0u32;
            loop {
                let zeros = bessel_j_prime_zeros(nu, x_max)?;
                if zeros.is_empty() && nu > 0 {
                    break;
                }
                let mult = if nu == 0 { 1 } else { 2 };
                for (i, z) in zeros.into_iter().enumerate() {
                    let v = (z / radius).powi(2);
                    if v <= cutoff {
                        modes.push((v, ModeLabel::Disk { nu, k: i + 1 }, mult));
                    }
                }
                if modes.iter().map(|m| m.2).sum::<usize>() > options.max_modes {
                    return Err(limit_exceeded());
                }
                if options.radial_only {
                    break;
                }
                nu += 1;
            }
        }
    }
    Ok(BaseSpectrum {
        eigenvalues: merge_modes(modes),
        cutoff,
    })
}

fn merge_modes(mut modes: Vec<(f64, ModeLabel, usize)>) -> Vec<BaseEigenvalue> {
    modes.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<BaseEigenvalue> = Vec::new();
    for (value, label, mult) in modes {
        match out.last_mut() {
            Some(last) if (value - last.value).abs() <= MERGE_TOL_REL * value.abs().max(last.value.abs()) => {
                last.multiplicity += mult;
                last.labels.push(label);
            }
            _ => out.push(BaseEigenvalue {
                value,
                multiplicity: mult,
                labels: vec![label],
            }),
        }
    }
    out
}

/// Spectrum of `tω` from the spectrum of `ω`.
pub fn scale_spectrum(spec: &BaseSpectrum, t: f64) -> Result<BaseSpectrum> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("scaling factor must be positive, got {t}")));
    }
    let factor = 1.0 / (t * t);
    Ok(BaseSpectrum {
        eigenvalues: spec
            .eigenvalues
            .iter()
            .map(|e| BaseEigenvalue {
                value: e.value * factor,
                ..e.clone()
            })
            .collect(),
        cutoff: spec.cutoff * factor,
    })
}
