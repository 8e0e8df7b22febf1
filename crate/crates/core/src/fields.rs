//! Prescribed planar electric fields `E(t, x)` and sampled bounds on their
//! derivatives.
//!
//! The built-in catalogue covers the zero field, a uniform field, the field
//! deriving from `φ(x) = ½(‖x‖² + cos²(2πx₂)/(10π))`, and a time-modulated
//! copy `cos(t)·E(x)` of the latter so that `∂ₜE ≠ 0` paths get exercised.
//! Arbitrary closures can be wrapped with [`FieldSpec::custom`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg2::{Mat2, Vec2};

type EvalFn = dyn Fn(f64, Vec2) -> Vec2 + Send + Sync;
type JacFn = dyn Fn(f64, Vec2) -> Mat2 + Send + Sync;

/// Name + numeric parameters, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FieldDescriptor {
    pub fn new(name: impl Into<String>) -> Self {
        FieldDescriptor { name: name.into(), params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }
}

#[derive(Clone)]
enum Kind {
    Zero,
    Uniform(Vec2),
    Potential,
    Modulated,
    Custom { eval: Arc<EvalFn>, jacobian: Option<Arc<JacFn>> },
}

/// An immutable, thread-safe electric field specification.
#[derive(Clone)]
pub struct FieldSpec {
    kind: Kind,
    descriptor: FieldDescriptor,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec").field("descriptor", &self.descriptor).finish()
    }
}

/// Field deriving from `φ(x) = ½(‖x‖² + cos²(2πx₂)/(10π))`.
#[inline]
fn potential_field(x: Vec2) -> Vec2 {
    Vec2::new(-x.e1, -x.e2 + (4.0 * PI * x.e2).sin() / 10.0)
}

#[inline]
fn potential_jacobian(x: Vec2) -> Mat2 {
    Mat2::new(-1.0, 0.0, 0.0, -1.0 + 0.4 * PI * (4.0 * PI * x.e2).cos())
}

impl FieldSpec {
    pub fn zero() -> Self {
        FieldSpec { kind: Kind::Zero, descriptor: FieldDescriptor::new("zero") }
    }

    pub fn uniform(e: Vec2) -> Self {
        FieldSpec {
            kind: Kind::Uniform(e),
            descriptor: FieldDescriptor::new("uniform").with_param("e1", e.e1).with_param("e2", e.e2),
        }
    }

    /// The time-independent field `E = −∇φ` used in the numerical experiments.
    pub fn potential() -> Self {
        FieldSpec { kind: Kind::Potential, descriptor: FieldDescriptor::new("potential") }
    }

    /// `cos(t)·E_potential(x)`.
    pub fn modulated_potential() -> Self {
        FieldSpec { kind: Kind::Modulated, descriptor: FieldDescriptor::new("modulated_potential") }
    }

    /// Wrap an arbitrary evaluator, optionally with its analytic Jacobian `D_x E`.
    pub fn custom<F>(name: impl Into<String>, eval: F, jacobian: Option<Arc<JacFn>>) -> Self
    where
        F: Fn(f64, Vec2) -> Vec2 + Send + Sync + 'static,
    {
        FieldSpec { kind: Kind::Custom { eval: Arc::new(eval), jacobian }, descriptor: FieldDescriptor::new(name) }
    }

    /// Build a catalogue field from its configuration descriptor.
    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self> {
        let param = |k: &str| desc.params.get(k).copied().unwrap_or(0.0);
        match desc.name.as_str() {
            "zero" => Ok(Self::zero()),
            "uniform" => Ok(Self::uniform(Vec2::new(param("e1"), param("e2")))),
            "potential" => Ok(Self::potential()),
            "modulated_potential" => Ok(Self::modulated_potential()),
            other => Err(Error::UnknownField(other.to_string())),
        }
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    /// `E(t, x)`.
    #[inline]
    pub fn eval(&self, t: f64, x: Vec2) -> Vec2 {
        match &self.kind {
            Kind::Zero => Vec2::ZERO,
            Kind::Uniform(e) => *e,
            Kind::Potential => potential_field(x),
            Kind::Modulated => potential_field(x) * t.cos(),
            Kind::Custom { eval, .. } => eval(t, x),
        }
    }

    /// `E⊥(t, x)`.
    #[inline]
    pub fn eval_perp(&self, t: f64, x: Vec2) -> Vec2 {
        self.eval(t, x).perp()
    }

    /// Analytic Jacobian `D_x E(t, x)` when one is known.
    pub fn jacobian(&self, t: f64, x: Vec2) -> Option<Mat2> {
        match &self.kind {
            Kind::Zero | Kind::Uniform(_) => Some(Mat2::new(0.0, 0.0, 0.0, 0.0)),
            Kind::Potential => Some(potential_jacobian(x)),
            Kind::Modulated => Some(potential_jacobian(x) * t.cos()),
            Kind::Custom { jacobian, .. } => jacobian.as_ref().map(|j| j(t, x)),
        }
    }

    /// Central-difference Jacobian with step `h = 1e−5·(1 + ‖x‖)`.
    pub fn fd_jacobian(&self, t: f64, x: Vec2) -> Mat2 {
        self.fd_jacobian_with_step(t, x, 1e-5 * (1.0 + x.norm()))
    }

    fn fd_jacobian_with_step(&self, t: f64, x: Vec2, h: f64) -> Mat2 {
        let d1 = (self.eval(t, x + Vec2::new(h, 0.0)) - self.eval(t, x - Vec2::new(h, 0.0))) / (2.0 * h);
        let d2 = (self.eval(t, x + Vec2::new(0.0, h)) - self.eval(t, x - Vec2::new(0.0, h))) / (2.0 * h);
        Mat2::new(d1.e1, d2.e1, d1.e2, d2.e2)
    }

    fn fd_dt(&self, t: f64, x: Vec2) -> Vec2 {
        let h = 1e-5 * (1.0 + t.abs());
        (self.eval(t + h, x) - self.eval(t - h, x)) / (2.0 * h)
    }
}

/// Axis-aligned box `[a1, b1] × [a2, b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl DomainBox {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        DomainBox { lo, hi }
    }

    /// `[-r, r]²`.
    pub fn square(r: f64) -> Self {
        DomainBox::new(Vec2::new(-r, -r), Vec2::new(r, r))
    }

    pub fn contains(&self, x: Vec2) -> bool {
        x.e1 >= self.lo.e1 && x.e1 <= self.hi.e1 && x.e2 >= self.lo.e2 && x.e2 <= self.hi.e2
    }
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox::square(6.0)
    }
}

/// Grid resolution for [`estimate_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    /// Samples per spatial axis (≥ 8).
    pub per_axis: usize,
    /// Samples over `[0, T]` (≥ 1; a single sample sits at t = 0).
    pub times: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { per_axis: 64, times: 9 }
    }
}

/// Sampled sup-norms of `E` and its derivatives over a box and time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldBounds {
    /// sup ‖E‖
    pub k0: f64,
    /// sup ‖∂ₜE‖
    pub kt: f64,
    /// sup ‖DₓE‖ (spectral norm)
    pub kx: f64,
    /// sup ‖Dₓ²E‖ (Frobenius norm of the third-order tensor)
    pub kxx: f64,
    /// sup ‖∂ₜDₓE‖ (spectral norm)
    pub ktx: f64,
    pub domain: DomainBox,
    pub horizon: f64,
    pub grid: SampleGrid,
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n && n > 1 { b } else { a + step * i as f64 })
}

/// Max over a sample grid of finite-difference derivative norms.
///
/// Deterministic for fixed inputs. Derivatives use central differences with a
/// scale-aware step; second derivatives difference the first-order
/// finite-difference Jacobian with a coarser step.
pub fn estimate_bounds(field: &FieldSpec, domain: DomainBox, horizon: f64, grid: SampleGrid) -> Result<FieldBounds> {
    let lo = domain.lo;
    let hi = domain.hi;
    if !(lo.e1 < hi.e1 && lo.e2 < hi.e2) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptyBox);
    }
    if grid.per_axis < 8 {
        return Err(Error::InvalidArgument(format!(
            "bound estimation needs at least 8 samples per axis, got {}",
            grid.per_axis
        )));
    }
    if !(horizon >= 0.0) || grid.times == 0 {
        return Err(Error::InvalidArgument("horizon must be ≥ 0 with at least one time sample".into()));
    }

    let mut b = FieldBounds { k0: 0.0, kt: 0.0, kx: 0.0, kxx: 0.0, ktx: 0.0, domain, horizon, grid };
    for t in linspace(0.0, horizon, grid.times) {
        for x1 in linspace(lo.e1, hi.e1, grid.per_axis) {
            for x2 in linspace(lo.e2, hi.e2, grid.per_axis) {
                let x = Vec2::new(x1, x2);
                b.k0 = b.k0.max(field.eval(t, x).norm());
                b.kt = b.kt.max(field.fd_dt(t, x).norm());
                b.kx = b.kx.max(field.fd_jacobian(t, x).op_norm());

                let h2 = 1e-4 * (1.0 + x.norm());
                let dj1 = (field.fd_jacobian(t, x + Vec2::new(h2, 0.0)) - field.fd_jacobian(t, x - Vec2::new(h2, 0.0)))
                    * (0.5 / h2);
                let dj2 = (field.fd_jacobian(t, x + Vec2::new(0.0, h2)) - field.fd_jacobian(t, x - Vec2::new(0.0, h2)))
                    * (0.5 / h2);
                let frob2 = dj1.frobenius().powi(2) + dj2.frobenius().powi(2);
                b.kxx = b.kxx.max(frob2.sqrt());

                let ht = 1e-4 * (1.0 + t.abs());
                let djt = (field.fd_jacobian(t + ht, x) - field.fd_jacobian(t - ht, x)) * (0.5 / ht);
                b.ktx = b.ktx.max(djt.op_norm());
            }
        }
    }
    Ok(b)
}
