//! Planar linear algebra.
//!
//! Everything in the stiff schemes reduces to 2×2 algebra around the rotation
//! generator `J = [[0, -1], [1, 0]]`. The implicit velocity stages only ever
//! invert `Id + λJ`, whose inverse and operator norm are known in closed form,
//! so no general linear solver is needed.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A planar vector (position, velocity, field value, ...).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub e1: f64,
    pub e2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { e1: 0.0, e2: 0.0 };

    #[inline]
    pub const fn new(e1: f64, e2: f64) -> Self {
        Vec2 { e1, e2 }
    }

    /// Rotation by +π/2: `v⊥ = J v = (-v2, v1)`.
    #[inline]
    pub fn perp(self) -> Vec2 {
        perp(self)
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.e1 * other.e1 + self.e2 * other.e2
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(self) -> f64 {
        self.e1.hypot(self.e2)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.e1.is_finite() && self.e2.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.e1 + rhs.e1, self.e2 + rhs.e2)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.e1 += rhs.e1;
        self.e2 += rhs.e2;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.e1 - rhs.e1, self.e2 - rhs.e2)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.e1 -= rhs.e1;
        self.e2 -= rhs.e2;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.e1, -self.e2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.e1 * s, self.e2 * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.e1 / s, self.e2 / s)
    }
}

/// `v⊥ = (-v2, v1)`; applying it twice gives `-v`.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.e2, v.e1)
}

/// A 2×2 matrix stored row-major: `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    /// The rotation generator `J`.
    pub const J: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// `α·Id + β·J`, the commutative algebra the resolvents live in.
    pub const fn id_plus_j(alpha: f64, beta: f64) -> Self {
        Mat2::new(alpha, -beta, beta, alpha)
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.e1 + self.a12 * v.e2, self.a21 * v.e1 + self.a22 * v.e2)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Generic inverse by cofactors; `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22).sqrt()
    }

    /// Both singular values `(σ_max, σ_min)` from the closed-form 2×2 SVD.
    pub fn singular_values(&self) -> (f64, f64) {
        // Split into a scaled rotation plus a scaled reflection:
        // σ_max = (p + q)/2, σ_min = |p − q|/2 with
        // p = ‖(a11 + a22, a21 − a12)‖, q = ‖(a11 − a22, a21 + a12)‖.
        let p = (self.a11 + self.a22).hypot(self.a21 - self.a12);
        let q = (self.a11 - self.a22).hypot(self.a21 + self.a12);
        (0.5 * (p + q), 0.5 * (p - q).abs())
    }

    /// Spectral (operator 2-) norm, i.e. the largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().0
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(self.a11 + b.a11, self.a12 + b.a12, self.a21 + b.a21, self.a22 + b.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

/// `(Id + λJ)⁻¹ = (Id − λJ) / (1 + λ²)`.
///
/// `λ = 0` gives the identity.
pub fn resolvent(lambda: f64) -> Mat2 {
    debug_assert!(lambda >= 0.0, "resolvent parameter must be non-negative");
    let s = 1.0 / (1.0 + lambda * lambda);
    Mat2::id_plus_j(s, -lambda * s)
}

/// Apply `(Id + λJ)⁻¹` to `v` without forming the matrix.
#[inline]
pub fn solve_resolvent(lambda: f64, v: Vec2) -> Vec2 {
    let s = 1.0 / (1.0 + lambda * lambda);
    // (v + λ J^T v)/(1+λ²) with Jᵀv = (v2, -v1)
    Vec2::new((v.e1 + lambda * v.e2) * s, (v.e2 - lambda * v.e1) * s)
}

/// `‖(Id + λJ)⁻¹‖ = 1/√(1+λ²)`.
pub fn resolvent_norm(lambda: f64) -> f64 {
    1.0 / (1.0 + lambda * lambda).sqrt()
}

/// `A_λ = (Id + γλJ)⁻² (Id + (2γ − 1)λJ)`, the zero-field velocity
/// amplification matrix of the second-order IMEX step.
pub fn a_lambda(lambda: f64, gamma: f64) -> Mat2 {
    let r = resolvent(gamma * lambda);
    r * r * Mat2::id_plus_j(1.0, (2.0 * gamma - 1.0) * lambda)
}

/// Closed-form operator norm of [`a_lambda`].
///
/// Every matrix involved is of the form `αId + βJ`, which is a scaled
/// rotation with norm `√(α² + β²)`; so for any γ the norm is
/// `√(1 + (2γ−1)²λ²) / (1 + γ²λ²)`. When γ = 1 − 1/√2 this equals
/// `1/√(1 + γ⁴λ⁴/(1 + 2γ²λ²))` because `(2γ−1)² = 2γ²`.
pub fn a_lambda_norm(lambda: f64, gamma: f64) -> f64 {
    let gl2 = gamma * gamma * lambda * lambda;
    if (gamma - crate::schemes::GAMMA).abs() < 1e-15 {
        1.0 / (1.0 + gl2 * gl2 / (1.0 + 2.0 * gl2)).sqrt()
    } else {
        let b = (2.0 * gamma - 1.0) * lambda;
        (1.0 + b * b).sqrt() / (1.0 + gl2)
    }
}
