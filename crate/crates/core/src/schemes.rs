//! Asymptotic-preserving time steppers for the stiff system and the explicit
//! schemes they degenerate into as `ε → 0`.
//!
//! | tag                          | variables | limit partner                |
//! |------------------------------|-----------|------------------------------|
//! | `FO_X`                       | `(x, v)`  | `LIMIT_EULER`                |
//! | `FO_X_IMPLICIT_START`        | `(x, v)`  | `LIMIT_EULER_IMPLICIT_START` |
//! | `FO_Y`                       | `(y, v)`  | `LIMIT_EULER`                |
//! | `SO_IMEX`                    | `(y, v)`  | `LIMIT_RK2`                  |
//!
//! Every implicit velocity stage is a linear solve with `Id + λJ`, done with
//! the closed-form resolvent. Only the fully-implicit first step needs a
//! nonlinear solve, which is a Picard iteration in the norm
//! `‖(y, v)‖_ε = ‖y‖ + ε‖v‖`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{from_guiding, GcState, ParticleState, YvState};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::linalg2::{solve_resolvent, Vec2};
use crate::reference::{GcTrajectory, PhasePoint, StiffTrajectory, Trajectory, TrajectoryMeta};

/// `γ = 1 − 1/√2`, the smaller root of `γ² − 2γ + 1/2 = 0`.
pub const GAMMA: f64 = 1.0 - FRAC_1_SQRT_2;

/// Scheme selector. Serialized with the upper-case tags used in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "FO_X")]
    FoX,
    #[serde(rename = "FO_X_IMPLICIT_START")]
    FoXImplicitStart,
    #[serde(rename = "FO_Y")]
    FoY,
    #[serde(rename = "SO_IMEX")]
    SoImex,
    #[serde(rename = "LIMIT_EULER")]
    LimitEuler,
    #[serde(rename = "LIMIT_EULER_IMPLICIT_START")]
    LimitEulerImplicitStart,
    #[serde(rename = "LIMIT_RK2")]
    LimitRk2,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        SchemeId::FoX,
        SchemeId::FoXImplicitStart,
        SchemeId::FoY,
        SchemeId::SoImex,
        SchemeId::LimitEuler,
        SchemeId::LimitEulerImplicitStart,
        SchemeId::LimitRk2,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SchemeId::FoX => "FO_X",
            SchemeId::FoXImplicitStart => "FO_X_IMPLICIT_START",
            SchemeId::FoY => "FO_Y",
            SchemeId::SoImex => "SO_IMEX",
            SchemeId::LimitEuler => "LIMIT_EULER",
            SchemeId::LimitEulerImplicitStart => "LIMIT_EULER_IMPLICIT_START",
            SchemeId::LimitRk2 => "LIMIT_RK2",
        }
    }

    /// True for schemes of the stiff `ε`-system.
    pub fn is_stiff(self) -> bool {
        matches!(self, SchemeId::FoX | SchemeId::FoXImplicitStart | SchemeId::FoY | SchemeId::SoImex)
    }

    /// The guiding-center scheme a stiff scheme reduces to as `ε → 0`.
    pub fn limit_partner(self) -> Option<SchemeId> {
        match self {
            SchemeId::FoX | SchemeId::FoY => Some(SchemeId::LimitEuler),
            SchemeId::FoXImplicitStart => Some(SchemeId::LimitEulerImplicitStart),
            SchemeId::SoImex => Some(SchemeId::LimitRk2),
            _ => None,
        }
    }

    /// Formal order in `Δt` for `ε ~ 1`.
    pub fn order(self) -> u32 {
        match self {
            SchemeId::SoImex | SchemeId::LimitRk2 => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Intermediate values of the second-order IMEX step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImexStages {
    /// Implicit velocity at `t̃ = tₙ + γΔt`.
    pub v_tilde: Vec2,
    pub t_tilde: f64,
    /// Explicit predictors at `t̂ = tₙ + Δt/(2γ)`.
    pub y_hat: Vec2,
    pub v_hat: Vec2,
    pub t_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stages {
    None,
    Imex(ImexStages),
    /// Picard iterations performed and the residual of the returned iterate.
    FixedPoint {
        iterations: usize,
        residual: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput<S> {
    pub next: S,
    pub stages: Stages,
}

impl<S> StepOutput<S> {
    fn plain(next: S) -> Self {
        StepOutput { next, stages: Stages::None }
    }

    pub fn imex(&self) -> Option<&ImexStages> {
        match &self.stages {
            Stages::Imex(st) => Some(st),
            _ => None,
        }
    }
}

/// Picard iteration controls for the fully-implicit first steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-12, max_iter: 100 }
    }
}

/// First-order IMEX step in `(x, v)`:
///
/// ```text
/// (Id + λJ) vⁿ⁺¹ = vⁿ + (Δt/ε) E(tₙ, xⁿ),   xⁿ⁺¹ = xⁿ + (Δt/ε) vⁿ⁺¹,   λ = Δt/ε²
/// ```
pub fn step_fo_x(field: &FieldSpec, s: &ParticleState, dt: f64) -> StepOutput<ParticleState> {
    let eps = s.eps;
    let lambda = dt / (eps * eps);
    let v = solve_resolvent(lambda, s.v + field.eval(s.t, s.x) * (dt / eps));
    let x = s.x + v * (dt / eps);
    StepOutput::plain(ParticleState { t: s.t + dt, x, v, eps })
}

/// First-order IMEX step in guiding-center variables `(y, v)`.
///
/// The explicit field in the velocity stage is evaluated at `yⁿ + ε(vⁿ)⊥`,
/// the drift of `y` at `yⁿ + ε(vⁿ⁺¹)⊥`.
pub fn step_fo_y(field: &FieldSpec, s: &YvState, dt: f64) -> StepOutput<YvState> {
    let eps = s.eps;
    let lambda = dt / (eps * eps);
    let x_n = from_guiding(s.y, s.v, eps);
    let v = solve_resolvent(lambda, s.v + field.eval(s.t, x_n) * (dt / eps));
    let y = s.y - field.eval_perp(s.t, from_guiding(s.y, v, eps)) * dt;
    StepOutput::plain(YvState { t: s.t + dt, y, v, eps })
}

/// The `FO_Y` update rewritten in `(x, v)`; algebraically identical to
/// [`step_fo_y`] followed by `x = y + εv⊥`.
pub fn step_fo_y_position_form(field: &FieldSpec, s: &ParticleState, dt: f64) -> ParticleState {
    let eps = s.eps;
    let lambda = dt / (eps * eps);
    let v = solve_resolvent(lambda, s.v + field.eval(s.t, s.x) * (dt / eps));
    let shifted = s.x + (v - s.v).perp() * eps;
    let x = s.x + v * (dt / eps) + (field.eval_perp(s.t, s.x) - field.eval_perp(s.t, shifted)) * dt;
    ParticleState { t: s.t + dt, x, v, eps }
}

/// `F = (F_y, F_v)` whose fixed point is the fully-implicit first step.
fn implicit_start_map(field: &FieldSpec, s0: &YvState, t1: f64, dt: f64, y: Vec2, v: Vec2) -> (Vec2, Vec2) {
    let eps = s0.eps;
    let x = from_guiding(y, v, eps);
    let e = field.eval(t1, x);
    let fy = s0.y - e.perp() * dt;
    let fv = solve_resolvent(dt / (eps * eps), s0.v + e * (dt / eps));
    (fy, fv)
}

/// Fully-implicit first step (field evaluated at the new time and position).
///
/// Solved in `(y, v)` by Picard iteration started from `(y⁰, v⁰)`; the map is
/// a contraction with constant `2 K_x Δt` in `‖·‖_ε`. The returned iterate
/// has residual `‖(y, v) − F(y, v)‖_ε ≤ tol`.
pub fn step_fo_x_implicit_start(
    field: &FieldSpec,
    s0: &ParticleState,
    dt: f64,
    opts: &PicardOptions,
) -> Result<StepOutput<ParticleState>> {
    let eps = s0.eps;
    let yv0 = s0.to_yv();
    let t1 = s0.t + dt;
    let norm = |dy: Vec2, dv: Vec2| dy.norm() + eps * dv.norm();

    let (mut y, mut v) = (yv0.y, yv0.v);
    let mut prev_inc = f64::NAN;
    let mut inc = f64::NAN;
    for k in 0..opts.max_iter {
        let (ny, nv) = implicit_start_map(field, &yv0, t1, dt, y, v);
        prev_inc = inc;
        inc = norm(ny - y, nv - v);
        if inc <= opts.tol {
            return Ok(StepOutput {
                next: ParticleState { t: t1, x: from_guiding(y, v, eps), v, eps },
                stages: Stages::FixedPoint { iterations: k, residual: inc },
            });
        }
        y = ny;
        v = nv;
    }
    Err(Error::NonContractive { iterations: opts.max_iter, last_increment: inc, ratio: inc / prev_inc, tol: opts.tol })
}

/// Residual `‖(y¹, v¹) − F(y¹, v¹)‖_ε` of a fully-implicit first step,
/// recomputed from the unsolved equations with a generic 2×2 inverse.
pub fn implicit_start_residual(field: &FieldSpec, s0: &ParticleState, s1: &ParticleState, dt: f64) -> f64 {
    let eps = s0.eps;
    let lambda = dt / (eps * eps);
    let y0 = s0.x - s0.v.perp() * eps;
    let y1 = s1.x - s1.v.perp() * eps;
    let e1 = field.eval(s0.t + dt, s1.x);
    let inv = crate::linalg2::Mat2::id_plus_j(1.0, lambda).inverse().expect("Id + λJ is invertible");
    let r_y = y1 - (y0 - e1.perp() * dt);
    let r_v = s1.v - inv.apply(s0.v + e1 * (dt / eps));
    r_y.norm() + eps * r_v.norm()
}

/// Second-order L-stable IMEX step in `(y, v)` (SDIRK with `γ = 1 − 1/√2`
/// for the stiff part, two-stage explicit RK for the rest).
///
/// Stage order: implicit `ṽ` at `tₙ + γΔt`; explicit `(ŷ, v̂)` at
/// `tₙ + Δt/(2γ)`; then the linearly-implicit final `vⁿ⁺¹`, after which the
/// `y`-update is explicit.
pub fn step_so_imex(field: &FieldSpec, s: &YvState, dt: f64) -> StepOutput<YvState> {
    let eps = s.eps;
    let g = GAMMA;
    let lambda = dt / (eps * eps);
    let t_n = s.t;
    let x_n = from_guiding(s.y, s.v, eps);
    let e_n = field.eval(t_n, x_n);

    // Stage 1: ε(ṽ − vⁿ)/(γΔt) = E(tₙ, xⁿ) − ṽ⊥/ε
    let v_tilde = solve_resolvent(g * lambda, s.v + e_n * (g * dt / eps));
    let t_tilde = t_n + g * dt;

    // Stage 2: explicit predictors over Δt/(2γ).
    let h = dt / (2.0 * g);
    let drift_n = field.eval_perp(t_n, from_guiding(s.y, v_tilde, eps));
    let force_n = e_n - v_tilde.perp() / eps;
    let y_hat = s.y - drift_n * h;
    let v_hat = s.v + force_n * (h / eps);
    let t_hat = t_n + h;

    // Stage 3: (Id + γλJ) vⁿ⁺¹ = vⁿ + (Δt/ε)[(1−γ)(E(tₙ,xⁿ) − ṽ⊥/ε) + γ E(t̂, ŷ + εv̂⊥)]
    let e_hat = field.eval(t_hat, from_guiding(y_hat, v_hat, eps));
    let v = solve_resolvent(g * lambda, s.v + (force_n * (1.0 - g) + e_hat * g) * (dt / eps));
    let y = s.y - (drift_n * (1.0 - g) + field.eval_perp(t_hat, from_guiding(y_hat, v, eps)) * g) * dt;

    StepOutput {
        next: YvState { t: t_n + dt, y, v, eps },
        stages: Stages::Imex(ImexStages { v_tilde, t_tilde, y_hat, v_hat, t_hat }),
    }
}

/// Residuals of the three `SO_IMEX` stage equations, each multiplied through
/// so it is measured in the units of the unknown it defines:
/// `[stage 1 (ṽ), stage 2 (‖ŷ‖ + ‖v̂‖), stage 3 (‖yⁿ⁺¹‖ + ‖vⁿ⁺¹‖)]`.
pub fn imex_stage_residuals(field: &FieldSpec, s: &YvState, dt: f64, out: &StepOutput<YvState>) -> [f64; 3] {
    let st = out.imex().expect("SO_IMEX output carries its stages");
    let eps = s.eps;
    let g = GAMMA;
    // F_y(t, ŷ, w̃) = −E⊥(t, ŷ + w̃⊥);  F_v(t, ŷ, ŵ, w̃) = E(t, ŷ + ŵ⊥) − w̃⊥/ε²
    let f_y = |t: f64, yh: Vec2, wt: Vec2| -field.eval_perp(t, yh + wt.perp());
    let f_v = |t: f64, yh: Vec2, wh: Vec2, wt: Vec2| field.eval(t, yh + wh.perp()) - wt.perp() / (eps * eps);
    let (y, v) = (s.y, s.v);
    let n = &out.next;

    let r1 = st.v_tilde - v - f_v(s.t, y, v * eps, st.v_tilde * eps) * (g * dt / eps);

    let h = dt / (2.0 * g);
    let r2y = st.y_hat - y - f_y(s.t, y, st.v_tilde * eps) * h;
    let r2v = st.v_hat - v - f_v(s.t, y, v * eps, st.v_tilde * eps) * (h / eps);

    let r3y = n.y - y - (f_y(s.t, y, st.v_tilde * eps) * (1.0 - g) + f_y(st.t_hat, st.y_hat, n.v * eps) * g) * dt;
    let r3v = n.v
        - v
        - (f_v(s.t, y, v * eps, st.v_tilde * eps) * (1.0 - g) + f_v(st.t_hat, st.y_hat, st.v_hat * eps, n.v * eps) * g)
            * (dt / eps);

    [r1.norm(), r2y.norm() + r2v.norm(), r3y.norm() + r3v.norm()]
}

/// Explicit Euler for the guiding-center equation.
pub fn step_limit_euler(field: &FieldSpec, s: &GcState, dt: f64) -> GcState {
    GcState { t: s.t + dt, y: s.y - field.eval_perp(s.t, s.y) * dt }
}

/// Implicit Euler for the guiding-center equation, `x¹ = x⁰ − Δt E⊥(t₁, x¹)`,
/// solved by Picard iteration. The returned iterate has residual ≤ tol.
pub fn step_limit_euler_implicit(
    field: &FieldSpec,
    s: &GcState,
    dt: f64,
    opts: &PicardOptions,
) -> Result<StepOutput<GcState>> {
    let t1 = s.t + dt;
    let mut y = s.y;
    let mut prev_inc = f64::NAN;
    let mut inc = f64::NAN;
    for k in 0..opts.max_iter {
        let next = s.y - field.eval_perp(t1, y) * dt;
        prev_inc = inc;
        inc = (next - y).norm();
        if inc <= opts.tol {
            return Ok(StepOutput {
                next: GcState { t: t1, y },
                stages: Stages::FixedPoint { iterations: k, residual: inc },
            });
        }
        y = next;
    }
    Err(Error::NonContractive { iterations: opts.max_iter, last_increment: inc, ratio: inc / prev_inc, tol: opts.tol })
}

/// Two-stage explicit Runge–Kutta for the guiding-center equation with
/// predictor at `tₙ + Δt/(2γ)` and weights `(1 − γ, γ)`.
pub fn step_limit_rk2(field: &FieldSpec, s: &GcState, dt: f64) -> GcState {
    let g = GAMMA;
    let d_n = field.eval_perp(s.t, s.y);
    let t_hat = s.t + dt / (2.0 * g);
    let y_hat = s.y - d_n * (dt / (2.0 * g));
    let y = s.y - (d_n * (1.0 - g) + field.eval_perp(t_hat, y_hat) * g) * dt;
    GcState { t: s.t + dt, y }
}

/// Options for multi-step drivers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub picard: PicardOptions,
    /// Step size of the fully-implicit first step, when it should differ from
    /// `dt`. Ignored by schemes without a special first step.
    pub first_step_dt: Option<f64>,
}

fn check_run(dt: f64, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be ≥ 1".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Time of step `n`, computed by multiplication.
fn step_time(t0: f64, dt: f64, first: Option<f64>, n: usize) -> f64 {
    match (first, n) {
        (_, 0) => t0,
        (Some(d0), n) => t0 + d0 + (n - 1) as f64 * dt,
        (None, n) => t0 + n as f64 * dt,
    }
}

/// Iterate a stiff scheme for `n_steps`, recording every state (index 0 is `s0`).
pub fn integrate_stiff(
    field: &FieldSpec,
    scheme: SchemeId,
    s0: &ParticleState,
    dt: f64,
    n_steps: usize,
    opts: &IntegrateOptions,
) -> Result<StiffTrajectory> {
    check_run(dt, n_steps)?;
    let eps = s0.eps;
    let first = match scheme {
        SchemeId::FoXImplicitStart => opts.first_step_dt,
        _ => None,
    };
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(s0.t);
    states.push(PhasePoint::from_xv(s0.x, s0.v, eps));

    match scheme {
        SchemeId::FoX | SchemeId::FoXImplicitStart => {
            let mut s = *s0;
            for n in 0..n_steps {
                s = if n == 0 && scheme == SchemeId::FoXImplicitStart {
                    step_fo_x_implicit_start(field, &s, first.unwrap_or(dt), &opts.picard)?.next
                } else {
                    step_fo_x(field, &s, dt).next
                };
                s.t = step_time(s0.t, dt, first, n + 1);
                times.push(s.t);
                states.push(PhasePoint::from_xv(s.x, s.v, eps));
            }
        }
        SchemeId::FoY | SchemeId::SoImex => {
            let mut s = s0.to_yv();
            for n in 0..n_steps {
                s = if scheme == SchemeId::FoY {
                    step_fo_y(field, &s, dt).next
                } else {
                    step_so_imex(field, &s, dt).next
                };
                s.t = step_time(s0.t, dt, None, n + 1);
                times.push(s.t);
                states.push(PhasePoint::from_yv(s.y, s.v, eps));
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!("{other} is a guiding-center scheme")));
        }
    }

    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            eps: Some(eps),
            field: field.descriptor().clone(),
            step: dt,
            label: scheme.tag().into(),
        },
    })
}

/// Iterate a guiding-center scheme for `n_steps`, recording every state.
pub fn integrate_gc(
    field: &FieldSpec,
    scheme: SchemeId,
    s0: &GcState,
    dt: f64,
    n_steps: usize,
    opts: &IntegrateOptions,
) -> Result<GcTrajectory> {
    check_run(dt, n_steps)?;
    let first = match scheme {
        SchemeId::LimitEulerImplicitStart => opts.first_step_dt,
        _ => None,
    };
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(s0.t);
    states.push(s0.y);
    let mut s = *s0;
    for n in 0..n_steps {
        s = match scheme {
            SchemeId::LimitEuler => step_limit_euler(field, &s, dt),
            SchemeId::LimitEulerImplicitStart if n == 0 => {
                step_limit_euler_implicit(field, &s, first.unwrap_or(dt), &opts.picard)?.next
            }
            SchemeId::LimitEulerImplicitStart => step_limit_euler(field, &s, dt),
            SchemeId::LimitRk2 => step_limit_rk2(field, &s, dt),
            other => return Err(Error::InvalidArgument(format!("{other} is a stiff scheme"))),
        };
        s.t = step_time(s0.t, dt, first, n + 1);
        times.push(s.t);
        states.push(s.y);
    }
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta { eps: None, field: field.descriptor().clone(), step: dt, label: scheme.tag().into() },
    })
}

/// Initial data for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Stiff(ParticleState),
    Gc(GcState),
}

/// Output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Run {
    Stiff(StiffTrajectory),
    Gc(GcTrajectory),
}

/// Dispatch on the scheme family.
pub fn integrate(
    field: &FieldSpec,
    scheme: SchemeId,
    s0: &InitialState,
    dt: f64,
    n_steps: usize,
    opts: &IntegrateOptions,
) -> Result<Run> {
    match s0 {
        InitialState::Stiff(p) => integrate_stiff(field, scheme, p, dt, n_steps, opts).map(Run::Stiff),
        InitialState::Gc(g) => integrate_gc(field, scheme, g, dt, n_steps, opts).map(Run::Gc),
    }
}
