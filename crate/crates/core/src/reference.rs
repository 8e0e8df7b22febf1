//! Resolved reference solutions by the classical fourth-order Runge–Kutta
//! method, for both the stiff system and the guiding-center equation.
//!
//! Output times are hit exactly: every grid interval is split into an integer
//! number of equal sub-steps, so there is no interpolation anywhere.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{guiding_center, rhs_gc, rhs_stiff, GcState, ParticleState};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldSpec};
use crate::linalg2::Vec2;

/// Default `safety` factor: about 300 RK4 steps per gyration period.
///
/// RK4 phase error on the gyration grows like `safety⁴ · T / ε²`; at 0.02 the
/// velocity of an `ε = 1e-3`, `T = 1` run is resolved to about 1e-3.
pub const DEFAULT_SAFETY: f64 = 0.02;

/// Smallest admissible reference step.
pub const MIN_REFERENCE_STEP: f64 = 1e-12;

/// A sampled stiff state carrying both position and guiding center.
///
/// Schemes written in `(x, v)` derive `y`, and schemes written in `(y, v)`
/// derive `x`; both are stored so diagnostics never re-transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec2,
    pub y: Vec2,
    pub v: Vec2,
}

impl PhasePoint {
    pub fn from_xv(x: Vec2, v: Vec2, eps: f64) -> Self {
        PhasePoint { x, y: guiding_center(x, v, eps), v }
    }

    pub fn from_yv(y: Vec2, v: Vec2, eps: f64) -> Self {
        PhasePoint { x: crate::dynamics::from_guiding(y, v, eps), y, v }
    }
}

/// Run metadata attached to every trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// `None` for guiding-center trajectories.
    pub eps: Option<f64>,
    pub field: FieldDescriptor,
    /// Integration step actually used (largest sub-step for references).
    pub step: f64,
    pub label: String,
}

/// Time-stamped samples. Index 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<P> {
    pub times: Vec<f64>,
    pub states: Vec<P>,
    pub meta: TrajectoryMeta,
}

pub type StiffTrajectory = Trajectory<PhasePoint>;
pub type GcTrajectory = Trajectory<Vec2>;

impl<P: Copy> Trajectory<P> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, P)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &P)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// Rows for CSV export.
pub trait CsvPoint {
    const HEADER: &'static str;
    fn write_row(&self, t: f64, out: &mut dyn Write) -> std::io::Result<()>;
}

impl CsvPoint for PhasePoint {
    const HEADER: &'static str = "t,x1,x2,v1,v2";
    fn write_row(&self, t: f64, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{t:?},{:?},{:?},{:?},{:?}", self.x.e1, self.x.e2, self.v.e1, self.v.e2)
    }
}

impl CsvPoint for Vec2 {
    const HEADER: &'static str = "t,y1,y2";
    fn write_row(&self, t: f64, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{t:?},{:?},{:?}", self.e1, self.e2)
    }
}

impl<P: CsvPoint + Copy> Trajectory<P> {
    pub fn write_csv_to(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", P::HEADER)?;
        for (t, p) in self.iter() {
            p.write_row(t, out)?;
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }
}

/// One classical RK4 step of the stiff system.
pub fn rk4_step_stiff(field: &FieldSpec, s: &ParticleState, h: f64) -> ParticleState {
    let at = |t: f64, x: Vec2, v: Vec2| rhs_stiff(field, &ParticleState { t, x, v, eps: s.eps });
    let half = 0.5 * h;
    let (k1x, k1v) = at(s.t, s.x, s.v);
    let (k2x, k2v) = at(s.t + half, s.x + k1x * half, s.v + k1v * half);
    let (k3x, k3v) = at(s.t + half, s.x + k2x * half, s.v + k2v * half);
    let (k4x, k4v) = at(s.t + h, s.x + k3x * h, s.v + k3v * h);
    let w = h / 6.0;
    ParticleState {
        t: s.t + h,
        x: s.x + (k1x + (k2x + k3x) * 2.0 + k4x) * w,
        v: s.v + (k1v + (k2v + k3v) * 2.0 + k4v) * w,
        eps: s.eps,
    }
}

/// One classical RK4 step of the guiding-center equation.
pub fn rk4_step_gc(field: &FieldSpec, s: &GcState, h: f64) -> GcState {
    let at = |t: f64, y: Vec2| rhs_gc(field, &GcState { t, y });
    let half = 0.5 * h;
    let k1 = at(s.t, s.y);
    let k2 = at(s.t + half, s.y + k1 * half);
    let k3 = at(s.t + half, s.y + k2 * half);
    let k4 = at(s.t + h, s.y + k3 * h);
    GcState { t: s.t + h, y: s.y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0) }
}

/// Step-size policy for reference runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePolicy {
    /// Internal step is at most `safety·ε²` for stiff runs.
    pub safety: f64,
    /// Minimum number of sub-steps per output interval.
    pub substeps: usize,
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        ReferencePolicy { safety: DEFAULT_SAFETY, substeps: 20 }
    }
}

impl ReferencePolicy {
    /// Internal step target for an output interval of length `interval`.
    pub fn stiff_step(&self, interval: f64, eps: f64) -> f64 {
        (interval / self.substeps as f64).min(self.safety * eps * eps)
    }
}

fn check_grid(t0: f64, grid: &[f64]) -> Result<()> {
    let mut prev = t0;
    for (index, &t) in grid.iter().enumerate() {
        if !(t > prev) || !t.is_finite() {
            return Err(Error::NonIncreasingGrid { index });
        }
        prev = t;
    }
    Ok(())
}

/// Number of equal sub-steps covering `interval` with steps no larger than `target`.
fn substep_count(interval: f64, target: f64) -> usize {
    let n = (interval / target).ceil();
    // Guard against ceil landing one short through rounding.
    let n = if interval / n > target * (1.0 + 1e-12) { n + 1.0 } else { n };
    n.max(1.0) as usize
}

/// Resolved stiff reference sampled at `grid` (which must lie strictly after `s0.t`).
///
/// The internal step is `min(Δ/20, safety·ε²)` on each output interval of
/// length Δ, adjusted down so it divides the interval exactly.
pub fn reference_trajectory_stiff(
    field: &FieldSpec,
    s0: &ParticleState,
    grid: &[f64],
    safety: f64,
) -> Result<StiffTrajectory> {
    reference_trajectory_stiff_with(field, s0, grid, &ReferencePolicy { safety, ..Default::default() })
}

pub fn reference_trajectory_stiff_with(
    field: &FieldSpec,
    s0: &ParticleState,
    grid: &[f64],
    policy: &ReferencePolicy,
) -> Result<StiffTrajectory> {
    check_grid(s0.t, grid)?;
    // Reject before integrating anything.
    let mut prev = s0.t;
    let mut max_step: f64 = 0.0;
    for &t in grid {
        let target = policy.stiff_step(t - prev, s0.eps);
        if target < MIN_REFERENCE_STEP {
            return Err(Error::ReferenceUnderflow { eps: s0.eps, step: target });
        }
        max_step = max_step.max((t - prev) / substep_count(t - prev, target) as f64);
        prev = t;
    }

    let mut times = Vec::with_capacity(grid.len() + 1);
    let mut states = Vec::with_capacity(grid.len() + 1);
    times.push(s0.t);
    states.push(PhasePoint::from_xv(s0.x, s0.v, s0.eps));

    let mut s = *s0;
    for &t_out in grid {
        let t_start = s.t;
        let interval = t_out - t_start;
        let n = substep_count(interval, policy.stiff_step(interval, s0.eps));
        let h = interval / n as f64;
        for j in 0..n {
            s.t = t_start + j as f64 * h;
            s = rk4_step_stiff(field, &s, h);
        }
        s.t = t_out;
        times.push(t_out);
        states.push(PhasePoint::from_xv(s.x, s.v, s.eps));
    }

    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            eps: Some(s0.eps),
            field: field.descriptor().clone(),
            step: max_step,
            label: "rk4-reference".into(),
        },
    })
}

/// Resolved guiding-center reference with 20 sub-steps per output interval.
pub fn reference_trajectory_gc(field: &FieldSpec, s0: &GcState, grid: &[f64]) -> Result<GcTrajectory> {
    reference_trajectory_gc_with(field, s0, grid, ReferencePolicy::default().substeps)
}

pub fn reference_trajectory_gc_with(
    field: &FieldSpec,
    s0: &GcState,
    grid: &[f64],
    substeps: usize,
) -> Result<GcTrajectory> {
    check_grid(s0.t, grid)?;
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be ≥ 1".into()));
    }
    let mut times = Vec::with_capacity(grid.len() + 1);
    let mut states = Vec::with_capacity(grid.len() + 1);
    times.push(s0.t);
    states.push(s0.y);
    let mut s = *s0;
    let mut max_step: f64 = 0.0;
    for &t_out in grid {
        let t_start = s.t;
        let h = (t_out - t_start) / substeps as f64;
        max_step = max_step.max(h);
        for j in 0..substeps {
            s.t = t_start + j as f64 * h;
            s = rk4_step_gc(field, &s, h);
        }
        s.t = t_out;
        times.push(t_out);
        states.push(s.y);
    }
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            eps: None,
            field: field.descriptor().clone(),
            step: max_step,
            label: "rk4-gc-reference".into(),
        },
    })
}

/// `t0 + k·dt` for `k = 1..=n`, computed by multiplication.
pub fn uniform_grid(t0: f64, dt: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t0 + k as f64 * dt).collect()
}
