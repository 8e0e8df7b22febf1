//! Error indicators against reference solutions, convergence-order fits and
//! the discrete velocity-bound check.
//!
//! All indicators are time-weighted L¹ sums `Σ_{n≥1} Δt ‖aⁿ − b(tₙ)‖`; the
//! initial state (identical by construction) is excluded.

use serde::{Deserialize, Serialize};

use crate::dynamics::gc_velocity;
use crate::error::{Error, Result};
use crate::fields::{FieldBounds, FieldSpec};
use crate::linalg2::Vec2;
use crate::reference::{GcTrajectory, StiffTrajectory};
use crate::schemes::SchemeId;

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

/// The four indicators for one `(scheme, ε, Δt)` cell.
///
/// `err_v` is `None` when no resolved stiff reference exists (`gc_proxy`).
/// Failed cells carry `NaN` indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub scheme: SchemeId,
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub err_y: f64,
    pub err_y_gc: f64,
    pub err_v: Option<f64>,
    pub err_v_gc: f64,
    pub gc_proxy: bool,
    pub status: CellStatus,
}

impl ErrorRecord {
    pub fn failed(scheme: SchemeId, eps: f64, dt: f64, horizon: f64, n_steps: usize, msg: String) -> Self {
        ErrorRecord {
            scheme,
            eps,
            dt,
            horizon,
            n_steps,
            err_y: f64::NAN,
            err_y_gc: f64::NAN,
            err_v: None,
            err_v_gc: f64::NAN,
            gc_proxy: false,
            status: CellStatus::Failed(msg),
        }
    }
}

fn check_times(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch { index: a.len().min(b.len()) });
    }
    for (i, (&ta, &tb)) in a.iter().zip(b).enumerate() {
        if (ta - tb).abs() > 1e-12 * (1.0 + ta.abs()) {
            return Err(Error::GridMismatch { index: i });
        }
    }
    Ok(())
}

fn weighted_sum(dt: f64, n: usize, term: impl FnMut(usize) -> f64) -> f64 {
    (1..n).map(term).sum::<f64>() * dt
}

/// `Σ Δt ‖yⁿ − y_ε(tₙ)‖` against a resolved stiff reference.
pub fn err_y(num: &StiffTrajectory, reference: &StiffTrajectory, dt: f64) -> Result<f64> {
    check_times(&num.times, &reference.times)?;
    Ok(weighted_sum(dt, num.len(), |i| (num.states[i].y - reference.states[i].y).norm()))
}

/// `Σ Δt ‖yⁿ − X(tₙ)‖` where `X` is a guiding-center trajectory, normally
/// the limit flow started at `x⁰ − ε(v⁰)⊥`.
pub fn err_y_gc(num: &StiffTrajectory, gc_ref: &GcTrajectory, dt: f64) -> Result<f64> {
    check_times(&num.times, &gc_ref.times)?;
    Ok(weighted_sum(dt, num.len(), |i| (num.states[i].y - gc_ref.states[i]).norm()))
}

/// `Σ Δt ‖vⁿ − v_ε(tₙ)‖`.
pub fn err_v(num: &StiffTrajectory, reference: &StiffTrajectory, dt: f64) -> Result<f64> {
    check_times(&num.times, &reference.times)?;
    Ok(weighted_sum(dt, num.len(), |i| (num.states[i].v - reference.states[i].v).norm()))
}

/// `Σ Δt ‖vⁿ/ε − v_gc(tₙ)‖` with `v_gc = −E⊥` along the stiff reference positions.
pub fn err_v_gc(num: &StiffTrajectory, reference: &StiffTrajectory, field: &FieldSpec, dt: f64) -> Result<f64> {
    check_times(&num.times, &reference.times)?;
    let eps = stiff_eps(num)?;
    Ok(weighted_sum(dt, num.len(), |i| {
        (num.states[i].v / eps - gc_velocity(field, reference.times[i], reference.states[i].x)).norm()
    }))
}

/// [`err_v_gc`] with `v_gc` evaluated along a guiding-center reference
/// instead, for `ε` too small to resolve the stiff flow.
pub fn err_v_gc_proxy(num: &StiffTrajectory, gc_ref: &GcTrajectory, field: &FieldSpec, dt: f64) -> Result<f64> {
    check_times(&num.times, &gc_ref.times)?;
    let eps = stiff_eps(num)?;
    Ok(weighted_sum(dt, num.len(), |i| {
        (num.states[i].v / eps - gc_velocity(field, gc_ref.times[i], gc_ref.states[i])).norm()
    }))
}

fn stiff_eps(num: &StiffTrajectory) -> Result<f64> {
    num.meta
        .eps
        .filter(|e| *e > 0.0)
        .ok_or_else(|| Error::InvalidArgument("velocity indicators need a stiff trajectory with ε > 0".into()))
}

/// Least-squares line through `(ln Δt, ln err)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

/// Fit `err ≈ C Δt^p`; the slope is the observed order `p`.
pub fn order_fit(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("order fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(dt, err)) =
        points.iter().find(|(dt, err)| !(*dt > 0.0 && *err > 0.0 && dt.is_finite() && err.is_finite()))
    {
        return Err(Error::InvalidArgument(format!("order fit needs positive finite data, got ({dt}, {err})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(dt, e)| (dt.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("order fit needs distinct step sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(OrderFit { slope, intercept, r2, points: logs })
}

/// Result of [`check_z_bound`]. Ratios `≤ 1` mean the bound holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZBoundReport {
    /// `max_n ‖zⁿ‖ / Bₙ` over `n ≥ 1`.
    pub max_ratio: f64,
    /// Step index attaining `max_ratio`.
    pub worst_step: usize,
    /// `max_n ‖vⁿ‖ / (Bₙ + K₀ε)`.
    pub max_velocity_ratio: f64,
    /// `‖zⁿ‖ / Bₙ` for every `n ≥ 1`.
    pub ratios: Vec<f64>,
}

impl ZBoundReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.max_ratio <= slack && self.max_velocity_ratio <= slack
    }
}

/// Right-hand side `Bₙ` of the discrete velocity bound.
pub fn z_bound(bounds: &FieldBounds, v0_norm: f64, eps: f64, t: f64) -> f64 {
    let growth = (bounds.kx * t).exp();
    growth * (v0_norm + 2.0 * eps * bounds.k0) + eps * t * growth * (bounds.kt + bounds.kx * bounds.k0)
}

/// Evaluate `zⁿ = vⁿ + εE⊥(tₙ₋₁, xⁿ⁻¹)` along a computed stiff run and
/// compare with the a-priori bound built from `bounds`.
pub fn check_z_bound(run: &StiffTrajectory, field: &FieldSpec, bounds: &FieldBounds) -> Result<ZBoundReport> {
    let eps = stiff_eps(run)?;
    if run.len() < 2 {
        return Err(Error::InvalidArgument("z-bound check needs at least one step".into()));
    }
    let t0 = run.times[0];
    let v0 = run.states[0].v.norm();
    let mut ratios = Vec::with_capacity(run.len() - 1);
    let mut max_velocity_ratio: f64 = 0.0;
    for n in 1..run.len() {
        let prev = &run.states[n - 1];
        let z: Vec2 = run.states[n].v + field.eval_perp(run.times[n - 1], prev.x) * eps;
        let b = z_bound(bounds, v0, eps, run.times[n] - t0);
        ratios.push(z.norm() / b);
        max_velocity_ratio = max_velocity_ratio.max(run.states[n].v.norm() / (b + bounds.k0 * eps));
    }
    let (worst, max_ratio) =
        ratios
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Ok(ZBoundReport { max_ratio, worst_step: worst + 1, max_velocity_ratio, ratios })
}
