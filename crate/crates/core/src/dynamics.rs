//! The stiff characteristic system
//!
//! ```text
//! ε x' = v,    ε v' = E(t, x) − v⊥/ε
//! ```
//!
//! its guiding-center limit `x' = −E⊥(t, x)`, and the exact algebraic changes
//! of variables between them: `y = x − ε v⊥` (guiding center) and
//! `z = v + ε E⊥(t, x)` (oscillation-dominated velocity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::linalg2::Vec2;

/// State `(t, x, v)` of the stiff system at scaling `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub x: Vec2,
    pub v: Vec2,
    pub eps: f64,
}

impl ParticleState {
    pub fn new(t: f64, x: Vec2, v: Vec2, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("eps must be positive and finite, got {eps}")));
        }
        if !t.is_finite() || !x.is_finite() || !v.is_finite() {
            return Err(Error::InvalidArgument("particle state must be finite".into()));
        }
        Ok(ParticleState { t, x, v, eps })
    }

    /// The same particle in guiding-center variables.
    pub fn to_yv(&self) -> YvState {
        YvState { t: self.t, y: to_guiding(self), v: self.v, eps: self.eps }
    }
}

/// The stiff state written in guiding-center variables `(t, y, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YvState {
    pub t: f64,
    pub y: Vec2,
    pub v: Vec2,
    pub eps: f64,
}

impl YvState {
    /// `x = y + ε v⊥`.
    pub fn position(&self) -> Vec2 {
        from_guiding(self.y, self.v, self.eps)
    }

    pub fn to_particle(&self) -> ParticleState {
        ParticleState { t: self.t, x: self.position(), v: self.v, eps: self.eps }
    }
}

/// State of the guiding-center (limit) equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcState {
    pub t: f64,
    pub y: Vec2,
}

impl GcState {
    pub fn new(t: f64, y: Vec2) -> Self {
        GcState { t, y }
    }
}

/// Right-hand side of the stiff system in `d/dt` form: `(v/ε, E/ε − v⊥/ε²)`.
#[inline]
pub fn rhs_stiff(field: &FieldSpec, s: &ParticleState) -> (Vec2, Vec2) {
    let inv = 1.0 / s.eps;
    let dx = s.v * inv;
    let dv = field.eval(s.t, s.x) * inv - s.v.perp() * (inv * inv);
    (dx, dv)
}

/// Guiding-center drift `−E⊥(t, y)`.
#[inline]
pub fn rhs_gc(field: &FieldSpec, s: &GcState) -> Vec2 {
    -field.eval_perp(s.t, s.y)
}

/// `y = x − ε v⊥`.
pub fn to_guiding(s: &ParticleState) -> Vec2 {
    guiding_center(s.x, s.v, s.eps)
}

/// `y = x − ε v⊥`; accepts `ε = 0` (identity).
#[inline]
pub fn guiding_center(x: Vec2, v: Vec2, eps: f64) -> Vec2 {
    x - v.perp() * eps
}

/// Inverse of [`guiding_center`]: `x = y + ε v⊥`.
#[inline]
pub fn from_guiding(y: Vec2, v: Vec2, eps: f64) -> Vec2 {
    y + v.perp() * eps
}

/// `z = v + ε E⊥(t, x)`.
pub fn to_zvar(field: &FieldSpec, s: &ParticleState) -> Vec2 {
    s.v + field.eval_perp(s.t, s.x) * s.eps
}

/// Inverse of [`to_zvar`] at fixed `(t, x)`.
pub fn from_zvar(field: &FieldSpec, t: f64, x: Vec2, z: Vec2, eps: f64) -> Vec2 {
    z - field.eval_perp(t, x) * eps
}

/// Guiding-center velocity `v_gc = −E⊥(t, x)`.
#[inline]
pub fn gc_velocity(field: &FieldSpec, t: f64, x: Vec2) -> Vec2 {
    -field.eval_perp(t, x)
}
