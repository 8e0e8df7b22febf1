//! JSON sweep configuration. Every key is optional; defaults reproduce the
//! planar test case `x⁰ = (1, 1)`, `v⁰ = (3, 3)` on the `potential` field.
//!
//! ```json
//! {
//!   "field": { "name": "potential", "params": {} },
//!   "schemes": ["FO_Y"],
//!   "eps": { "log_min": -5, "log_max": 0, "count": 11 },
//!   "dt": [0.2, 0.1, 0.05, 0.025],
//!   "horizon": 1.0,
//!   "x0": [1.0, 1.0],
//!   "v0": [3.0, 3.0],
//!   "reference": { "safety": 0.02, "substeps": 20, "gc_substeps": 20, "min_step": 1e-8 },
//!   "picard": { "tol": 1e-12, "max_iter": 100 },
//!   "output": "sweep.csv",
//!   "plot_data": null,
//!   "jobs": null,
//!   "seed": 1,
//!   "ensemble": null
//! }
//! ```
//!
//! `eps` also accepts an explicit list. `reference.min_step` is relative to
//! the horizon: cells with `safety·ε² < min_step·T` use the guiding-center
//! reference and are flagged `gc_proxy`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{CloudDescriptor, GapMode};
use crate::error::{Error, Result};
use crate::fields::FieldDescriptor;
use crate::linalg2::Vec2;
use crate::reference::{ReferencePolicy, DEFAULT_SAFETY};
use crate::schemes::{PicardOptions, SchemeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsGrid {
    List(Vec<f64>),
    /// `count` values `10^s`, `s` evenly spaced over `[log_min, log_max]`.
    LogRange {
        log_min: f64,
        log_max: f64,
        count: usize,
    },
}

impl EpsGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsGrid::List(v) => v.clone(),
            EpsGrid::LogRange { count: 0, .. } => Vec::new(),
            EpsGrid::LogRange { log_min, count: 1, .. } => vec![10f64.powf(*log_min)],
            EpsGrid::LogRange { log_min, log_max, count } => (0..*count)
                .map(|k| {
                    let s = log_min + (log_max - log_min) * k as f64 / (*count - 1) as f64;
                    10f64.powf(s)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub safety: f64,
    pub substeps: usize,
    pub gc_substeps: usize,
    /// Feasibility floor on the stiff reference step, relative to `T`.
    pub min_step: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig { safety: DEFAULT_SAFETY, substeps: 20, gc_substeps: 20, min_step: 1e-8 }
    }
}

impl ReferenceConfig {
    pub fn policy(&self) -> ReferencePolicy {
        ReferencePolicy { safety: self.safety, substeps: self.substeps }
    }

    /// True when the stiff reference at this `ε` is too expensive to run.
    pub fn needs_proxy(&self, eps: f64, horizon: f64) -> bool {
        self.safety * eps * eps < self.min_step * horizon
    }
}

/// Optional coupled push-forward study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub cloud: CloudDescriptor,
    pub particles: usize,
    pub scheme: SchemeId,
    pub eps: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub gap: GapMode,
    /// Also compare against the resolved RK4 flow (expensive for small ε).
    pub reference_pairing: bool,
    /// Size of the sub-cloud checked with the exact assignment; 0 disables.
    pub oracle_particles: usize,
    pub output: Option<PathBuf>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            cloud: CloudDescriptor::gaussian(),
            particles: 512,
            scheme: SchemeId::FoY,
            eps: vec![1e-3, 1e-2],
            dt: 0.01,
            horizon: 0.5,
            gap: GapMode::Final,
            reference_pairing: false,
            oracle_particles: 32,
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub field: FieldDescriptor,
    pub schemes: Vec<SchemeId>,
    pub eps: EpsGrid,
    pub dt: Vec<f64>,
    pub horizon: f64,
    pub x0: [f64; 2],
    pub v0: [f64; 2],
    pub reference: ReferenceConfig,
    pub picard: PicardOptions,
    pub output: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    pub seed: u64,
    pub ensemble: Option<EnsembleConfig>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            field: FieldDescriptor::new("potential"),
            schemes: vec![SchemeId::FoY],
            eps: EpsGrid::LogRange { log_min: -5.0, log_max: 0.0, count: 11 },
            dt: vec![0.2, 0.1, 0.05, 0.025],
            horizon: 1.0,
            x0: [1.0, 1.0],
            v0: [3.0, 3.0],
            reference: ReferenceConfig::default(),
            picard: PicardOptions::default(),
            output: None,
            plot_data: None,
            jobs: None,
            seed: 1,
            ensemble: None,
        }
    }
}

/// A step size normalized to an exact divisor of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    pub dt: f64,
    pub n_steps: usize,
}

/// `n = round(T/Δt)`, accepted when `|nΔt − T| ≤ 1e-9·T`; returns `Δt = T/n`.
pub fn normalize_dt(dt: f64, horizon: f64) -> Result<StepGrid> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let n = (horizon / dt).round();
    if n < 1.0 || (n * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::InvalidArgument(format!("dt = {dt} does not divide the horizon {horizon}")));
    }
    let n_steps = n as usize;
    Ok(StepGrid { dt: horizon / n_steps as f64, n_steps })
}

impl SweepConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let cfg =
            Self::from_json(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn x0(&self) -> Vec2 {
        Vec2::new(self.x0[0], self.x0[1])
    }

    pub fn v0(&self) -> Vec2 {
        Vec2::new(self.v0[0], self.v0[1])
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.eps.values()
    }

    pub fn step_grids(&self) -> Result<Vec<StepGrid>> {
        self.dt.iter().map(|&dt| normalize_dt(dt, self.horizon)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.schemes.is_empty() {
            return bad("scheme list is empty".into());
        }
        if let Some(id) = self.schemes.iter().find(|s| !s.is_stiff()) {
            return bad(format!("{id} is a guiding-center scheme; sweeps take stiff schemes"));
        }
        let eps = self.eps_values();
        if eps.is_empty() {
            return bad("eps grid is empty".into());
        }
        if let Some(e) = eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return bad(format!("eps values must be positive, got {e}"));
        }
        if self.dt.is_empty() {
            return bad("dt grid is empty".into());
        }
        self.step_grids()?;
        if !self.x0.iter().chain(&self.v0).all(|c| c.is_finite()) {
            return bad("initial data must be finite".into());
        }
        let r = &self.reference;
        if !(r.safety > 0.0) || r.substeps == 0 || r.gc_substeps == 0 || !(r.min_step >= 0.0) {
            return bad("reference policy needs safety > 0, substeps ≥ 1 and min_step ≥ 0".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be ≥ 1".into());
        }
        crate::fields::FieldSpec::from_descriptor(&self.field)?;
        if let Some(ens) = &self.ensemble {
            if ens.particles == 0 {
                return bad("ensemble needs at least one particle".into());
            }
            if ens.eps.is_empty() || ens.eps.iter().any(|e| !(*e > 0.0)) {
                return bad("ensemble eps values must be positive and non-empty".into());
            }
            normalize_dt(ens.dt, ens.horizon)?;
        }
        Ok(())
    }
}
