//! Run configuration: a versioned JSON document, every field optional.
//!
//! Defaults (also listed in the README):
//!
//! | field | default |
//! |---|---|
//! | `model` | cubic, `c1 = 0`, `c3 = 1` |
//! | `base` | interval of length 1 |
//! | `nodal_n` | 1 |
//! | `grids.ode_M` | 10000 RK4 steps |
//! | `grids.eig_M` | 500 (Richardson over `M`, `2M`, `4M`) |
//! | `grids.nx`, `grids.ny` | 100 |
//! | `t_range` | `0.5 ..= 5`, 400 samples |
//! | `t_eval` | 1 |
//! | `cutoff` | 400 |
//! | `eigen_count` | `max(n + 5, 12)` |
//! | `decomposition_count` | 10 |
//! | `tolerances` | see [`Tolerances`] |
//! | `continuation` | 5 steps, `dt0 = 0.01·t̄`, `eps0 = 0.01·‖u_ω‖₂`, ladder 1, 2, 4, 6 halvings |
//! | `random_checks` | 20 |
//! | `backtrack_ratio`, `backtrack_steps` | 1/16, 5 (ratio 0 disables) |
//! | `seed` | 0 |

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cylbif_core::base_spectrum::BaseDomain;
use cylbif_core::nonlinearity::NonlinearityModel;
use cylbif_core::ode_shooting::ShootingConfig;
use cylbif_core::pde_rectangle::{ContinuationConfig, EigenConfig, Grid2D, NewtonConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    #[serde(rename = "ode_M")]
    pub ode_m: usize,
    #[serde(rename = "eig_M")]
    pub eig_m: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            ode_m: 10_000,
            eig_m: 500,
            nx: 100,
            ny: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub shoot_amplitude: f64,
    pub shoot_terminal: f64,
    /// `None` means `1e-8·max(1, |α₁|)`.
    pub tol_zero: Option<f64>,
    pub newton: f64,
    pub newton_step: f64,
    pub linear: f64,
    pub eigen: f64,
    pub nodal_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let newton = NewtonConfig::default();
        let shoot = ShootingConfig::default();
        Tolerances {
            shoot_amplitude: shoot.tol_amplitude,
            shoot_terminal: shoot.tol_terminal,
            tol_zero: None,
            newton: newton.tol,
            newton_step: newton.step_tol,
            linear: newton.linear_rtol,
            eigen: EigenConfig::default().tol,
            nodal_rel: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TRange {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for TRange {
    fn default() -> Self {
        TRange {
            t_min: 0.5,
            t_max: 5.0,
            samples: 400,
        }
    }
}

impl TRange {
    pub fn grid(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / (self.samples - 1) as f64;
        (0..self.samples).map(|k| self.t_min + k as f64 * step).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: NonlinearityModel,
    pub base: BaseDomain,
    /// Disk bases: keep only rotationally symmetric modes.
    pub radial_only: bool,
    pub nodal_n: usize,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub t_range: TRange,
    /// Scaling used by `morse` and `verify-decomposition`.
    pub t_eval: f64,
    pub cutoff: f64,
    pub eigen_count: Option<usize>,
    /// Eigenvalues compared by `verify-decomposition`.
    pub decomposition_count: usize,
    /// Replaces the computed one-dimensional spectrum (sorted ascending).
    pub alphas: Option<Vec<f64>>,
    /// 1-based index into the bifurcation points used by `continue`.
    pub bifurcation_index: usize,
    /// Side of `t̄` on which `continue` starts (+1 or −1).
    pub direction: i32,
    /// Ratio of the geometric offsets used when walking back toward `t̄`; 0 disables.
    pub backtrack_ratio: f64,
    pub backtrack_steps: usize,
    pub continuation: ContinuationConfig,
    pub random_checks: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model: NonlinearityModel::pure_cubic(),
            base: BaseDomain::Interval { length: 1.0 },
            radial_only: false,
            nodal_n: 1,
            grids: Grids::default(),
            tolerances: Tolerances::default(),
            t_range: TRange::default(),
            t_eval: 1.0,
            cutoff: 400.0,
            eigen_count: None,
            decomposition_count: 10,
            alphas: None,
            bifurcation_index: 1,
            direction: 1,
            backtrack_ratio: 0.0625,
            backtrack_steps: 5,
            continuation: ContinuationConfig::default(),
            random_checks: 20,
            seed: 0,
            output_dir: PathBuf::from("cylbif-out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        self.model.validate()?;
        self.base.validate()?;
        if self.radial_only && !matches!(self.base, BaseDomain::Disk { .. }) {
            bail!("radial_only applies to disk bases only");
        }
        if self.nodal_n == 0 {
            bail!("nodal_n must be at least 1");
        }
        let g = &self.grids;
        if g.ode_m == 0 || g.eig_m < 4 {
            bail!("grids.ode_M must be positive and grids.eig_M at least 4");
        }
        Grid2D::new(g.nx, g.ny)?;
        let t = &self.tolerances;
        let named = [
            ("shoot_amplitude", t.shoot_amplitude),
            ("shoot_terminal", t.shoot_terminal),
            ("newton", t.newton),
            ("newton_step", t.newton_step),
            ("linear", t.linear),
            ("eigen", t.eigen),
            ("nodal_rel", t.nodal_rel),
        ];
        for (name, v) in named.iter().chain(t.tol_zero.as_ref().map(|v| ("tol_zero", *v)).iter()) {
            if !(*v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        let r = &self.t_range;
        if !(r.t_min > 0.0 && r.t_min < r.t_max && r.t_max.is_finite()) || r.samples == 0 {
            bail!("t_range needs 0 < t_min < t_max and samples >= 1");
        }
        if !(self.t_eval > 0.0) || !(self.cutoff > 0.0) {
            bail!("t_eval and cutoff must be positive");
        }
        if self.decomposition_count == 0 {
            bail!("decomposition_count must be positive");
        }
        if let Some(a) = &self.alphas {
            if a.is_empty() || a.iter().any(|v| !v.is_finite()) || a.windows(2).any(|w| w[0] > w[1]) {
                bail!("alphas must be a nonempty ascending list of finite values");
            }
        }
        if self.direction != 1 && self.direction != -1 {
            bail!("direction must be +1 or -1");
        }
        if self.bifurcation_index == 0 {
            bail!("bifurcation_index is 1-based");
        }
        if !(0.0..1.0).contains(&self.backtrack_ratio) {
            bail!("backtrack_ratio must lie in [0, 1)");
        }
        self.continuation.validate()?;
        Ok(())
    }

    pub fn shooting(&self) -> ShootingConfig {
        ShootingConfig {
            steps: self.grids.ode_m,
            tol_amplitude: self.tolerances.shoot_amplitude,
            tol_terminal: self.tolerances.shoot_terminal,
            ..ShootingConfig::default()
        }
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tolerances.newton,
            step_tol: self.tolerances.newton_step,
            linear_rtol: self.tolerances.linear,
            ..NewtonConfig::default()
        }
    }

    pub fn eigen(&self) -> EigenConfig {
        EigenConfig {
            tol: self.tolerances.eigen,
            seed: self.seed,
            ..EigenConfig::default()
        }
    }

    pub fn grid(&self) -> anyhow::Result<Grid2D> {
        Ok(Grid2D::new(self.grids.nx, self.grids.ny)?)
    }

    pub fn richardson_grids(&self) -> [usize; 3] {
        let m = self.grids.eig_m;
        [m, 2 * m, 4 * m]
    }
}

/// A parsed configuration with the hash of its source bytes.
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

pub fn load(path: Option<&Path>) -> anyhow::Result<LoadedConfig> {
    let bytes = match path {
        Some(p) => std::fs::read(p).with_context(|| format!("cannot read config {}", p.display()))?,
        None => b"{}".to_vec(),
    };
    let config: RunConfig = serde_json::from_slice(&bytes).context("config is not valid JSON for this schema")?;
    let hash = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig { config, hash })
}
