//! Particle clouds pushed through a stiff scheme and its limit partner.
//!
//! The mean position gap of the two coupled flows bounds the 1-Wasserstein
//! (dual Lipschitz) distance between the two empirical push-forward
//! densities; [`assignment_distance`] computes that distance exactly for
//! small clouds.
//!
//! Clouds are bit-reproducible: a `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)` feeds `rand_distr::StandardNormal` draws in the
//! order `x₁, x₂, v₁, v₂` for each particle in turn.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{guiding_center, GcState, ParticleState};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::linalg2::Vec2;
use crate::reference::{reference_trajectory_stiff_with, uniform_grid, ReferencePolicy};
use crate::schemes::{integrate_gc, integrate_stiff, IntegrateOptions, SchemeId};

/// Distribution name + numeric parameters, as written in configuration files.
///
/// * `gaussian`: isotropic normals with means `x1, x2, v1, v2` and standard
///   deviations `sx, sv` (defaults `(1, 1)`, `(3, 3)`, `0.25`, `0.5`).
/// * `dirac`: every particle at `(x1, x2, v1, v2)` (same defaults).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudDescriptor {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl CloudDescriptor {
    pub fn new(name: impl Into<String>) -> Self {
        CloudDescriptor { name: name.into(), params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn gaussian() -> Self {
        Self::new("gaussian")
    }

    pub fn dirac(x: Vec2, v: Vec2) -> Self {
        Self::new("dirac").with_param("x1", x.e1).with_param("x2", x.e2).with_param("v1", v.e1).with_param("v2", v.e2)
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn means(&self) -> (Vec2, Vec2) {
        (
            Vec2::new(self.param("x1", 1.0), self.param("x2", 1.0)),
            Vec2::new(self.param("v1", 3.0), self.param("v2", 3.0)),
        )
    }
}

impl Default for CloudDescriptor {
    fn default() -> Self {
        Self::gaussian()
    }
}

/// An empirical initial distribution with uniform weights `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleCloud {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub seed: u64,
    pub descriptor: CloudDescriptor,
}

impl ParticleCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// The first `n` particles.
    pub fn truncated(&self, n: usize) -> ParticleCloud {
        let n = n.min(self.len());
        ParticleCloud {
            positions: self.positions[..n].to_vec(),
            velocities: self.velocities[..n].to_vec(),
            seed: self.seed,
            descriptor: self.descriptor.clone(),
        }
    }

    pub fn mean_position(&self) -> Vec2 {
        let sx = pairwise_sum(&self.positions.iter().map(|p| p.e1).collect::<Vec<_>>());
        let sy = pairwise_sum(&self.positions.iter().map(|p| p.e2).collect::<Vec<_>>());
        Vec2::new(sx, sy) * self.weight()
    }

    pub fn mean_velocity(&self) -> Vec2 {
        let sx = pairwise_sum(&self.velocities.iter().map(|p| p.e1).collect::<Vec<_>>());
        let sy = pairwise_sum(&self.velocities.iter().map(|p| p.e2).collect::<Vec<_>>());
        Vec2::new(sx, sy) * self.weight()
    }
}

/// Deterministic sample of `n` particles from `descriptor`.
pub fn sample_cloud(descriptor: &CloudDescriptor, n: usize, seed: u64) -> Result<ParticleCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("a cloud needs at least one particle".into()));
    }
    let (xm, vm) = descriptor.means();
    let (positions, velocities) = match descriptor.name.as_str() {
        "dirac" => (vec![xm; n], vec![vm; n]),
        "gaussian" => {
            let sx = descriptor.param("sx", 0.25);
            let sv = descriptor.param("sv", 0.5);
            if !(sx >= 0.0 && sv >= 0.0) {
                return Err(Error::InvalidArgument(format!("standard deviations must be ≥ 0, got sx={sx}, sv={sv}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let mut xs = Vec::with_capacity(n);
            let mut vs = Vec::with_capacity(n);
            for _ in 0..n {
                let x = Vec2::new(draw(), draw());
                let v = Vec2::new(draw(), draw());
                xs.push(xm + x * sx);
                vs.push(vm + v * sv);
            }
            (xs, vs)
        }
        other => return Err(Error::UnknownDescriptor(other.to_string())),
    };
    Ok(ParticleCloud { positions, velocities, seed, descriptor: descriptor.clone() })
}

/// Sum with `O(log n)` error growth and a fixed, input-order-only reduction tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Where gaps are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// `‖X_εⁱ(T) − Xⁱ(T)‖`.
    #[default]
    Final,
    /// `(1/T) Σ_{n≥1} Δt ‖X_εⁱ(tₙ) − Xⁱ(tₙ)‖`.
    TimeAveraged,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingOptions {
    pub gap: GapMode,
    pub parallel: bool,
    pub integrate: IntegrateOptions,
}

/// Summary of one coupled push.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    /// Which flows were compared, e.g. `FO_Y~LIMIT_EULER`.
    pub pairing: String,
    pub n: usize,
    pub eps: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub mean_gap: f64,
    pub max_gap: f64,
    /// Empirical `∫ (1 + ε + ‖v‖) df₀`.
    pub first_moment: f64,
    /// Exact 1-Wasserstein distance between the two empirical push-forwards,
    /// when computed.
    pub exact_distance: Option<f64>,
}

/// Endpoint positions of both flows for every particle, plus the per-particle gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPush {
    pub left: Vec<Vec2>,
    pub right: Vec<Vec2>,
    pub gaps: Vec<f64>,
}

fn gap_of(pos_a: &[Vec2], pos_b: &[Vec2], dt: f64, mode: GapMode) -> f64 {
    let last = pos_a.len() - 1;
    match mode {
        GapMode::Final => (pos_a[last] - pos_b[last]).norm(),
        GapMode::TimeAveraged => {
            let terms: Vec<f64> = (1..pos_a.len()).map(|i| (pos_a[i] - pos_b[i]).norm()).collect();
            pairwise_sum(&terms) * dt / (last as f64 * dt)
        }
    }
}

/// Push one particle through `scheme` (positions `xⁿ`) and its limit partner
/// started at `x⁰ − ε(v⁰)⊥`. A limit scheme is its own partner, both sides
/// then starting from the guiding center.
#[allow(clippy::too_many_arguments)]
fn push_one(
    field: &FieldSpec,
    x0: Vec2,
    v0: Vec2,
    eps: f64,
    scheme: SchemeId,
    dt: f64,
    n_steps: usize,
    opts: &CouplingOptions,
) -> Result<(Vec2, Vec2, f64)> {
    let y0 = guiding_center(x0, v0, eps);
    let limit = scheme.limit_partner().unwrap_or(scheme);
    let right = integrate_gc(field, limit, &GcState::new(0.0, y0), dt, n_steps, &opts.integrate)?.states;
    let left = if scheme.is_stiff() {
        let p = ParticleState::new(0.0, x0, v0, eps)?;
        integrate_stiff(field, scheme, &p, dt, n_steps, &opts.integrate)?.states.iter().map(|s| s.x).collect()
    } else {
        integrate_gc(field, scheme, &GcState::new(0.0, y0), dt, n_steps, &opts.integrate)?.states
    };
    Ok((*left.last().unwrap(), *right.last().unwrap(), gap_of(&left, &right, dt, opts.gap)))
}

fn run_particles<F>(n: usize, parallel: bool, f: F) -> Result<Vec<(Vec2, Vec2, f64)>>
where
    F: Fn(usize) -> Result<(Vec2, Vec2, f64)> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn report(pairing: String, cloud: &ParticleCloud, eps: f64, dt: f64, n_steps: usize, gaps: &[f64]) -> CouplingReport {
    let w = cloud.weight();
    let moments: Vec<f64> = cloud.velocities.iter().map(|v| 1.0 + eps + v.norm()).collect();
    CouplingReport {
        pairing,
        n: cloud.len(),
        eps,
        dt,
        n_steps,
        mean_gap: pairwise_sum(gaps) * w,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        first_moment: pairwise_sum(&moments) * w,
        exact_distance: None,
    }
}

fn unzip(results: Vec<(Vec2, Vec2, f64)>) -> CoupledPush {
    let mut out = CoupledPush { left: Vec::new(), right: Vec::new(), gaps: Vec::new() };
    for (a, b, g) in results {
        out.left.push(a);
        out.right.push(b);
        out.gaps.push(g);
    }
    out
}

/// Push every particle through `scheme` and its limit partner; returns the
/// raw endpoints alongside the report.
pub fn push_coupled_detailed(
    field: &FieldSpec,
    cloud: &ParticleCloud,
    eps: f64,
    scheme: SchemeId,
    dt: f64,
    n_steps: usize,
    opts: &CouplingOptions,
) -> Result<(CouplingReport, CoupledPush)> {
    let results = run_particles(cloud.len(), opts.parallel, |i| {
        push_one(field, cloud.positions[i], cloud.velocities[i], eps, scheme, dt, n_steps, opts)
    })?;
    let push = unzip(results);
    let limit = scheme.limit_partner().unwrap_or(scheme);
    let rep = report(format!("{scheme}~{limit}"), cloud, eps, dt, n_steps, &push.gaps);
    Ok((rep, push))
}

/// Coupled-flow discrepancy between `scheme` and its limit partner.
pub fn push_coupled(
    field: &FieldSpec,
    cloud: &ParticleCloud,
    eps: f64,
    scheme: SchemeId,
    dt: f64,
    n_steps: usize,
    opts: &CouplingOptions,
) -> Result<CouplingReport> {
    push_coupled_detailed(field, cloud, eps, scheme, dt, n_steps, opts).map(|(r, _)| r)
}

/// Coupled discrepancy between a stiff scheme and the resolved RK4 stiff
/// flow (positions). Costs `O(N · T / (safety·ε²))` RK4 steps.
#[allow(clippy::too_many_arguments)]
pub fn push_vs_reference(
    field: &FieldSpec,
    cloud: &ParticleCloud,
    eps: f64,
    scheme: SchemeId,
    dt: f64,
    n_steps: usize,
    policy: &ReferencePolicy,
    opts: &CouplingOptions,
) -> Result<CouplingReport> {
    if !scheme.is_stiff() {
        return Err(Error::InvalidArgument(format!("{scheme} is not a stiff scheme")));
    }
    let grid = uniform_grid(0.0, dt, n_steps);
    let results = run_particles(cloud.len(), opts.parallel, |i| {
        let p = ParticleState::new(0.0, cloud.positions[i], cloud.velocities[i], eps)?;
        let num: Vec<Vec2> =
            integrate_stiff(field, scheme, &p, dt, n_steps, &opts.integrate)?.states.iter().map(|s| s.x).collect();
        let reference: Vec<Vec2> =
            reference_trajectory_stiff_with(field, &p, &grid, policy)?.states.iter().map(|s| s.x).collect();
        Ok((*num.last().unwrap(), *reference.last().unwrap(), gap_of(&num, &reference, dt, opts.gap)))
    })?;
    let push = unzip(results);
    Ok(report(format!("{scheme}~REFERENCE"), cloud, eps, dt, n_steps, &push.gaps))
}

/// Exact 1-Wasserstein distance between the uniform empirical measures on
/// `a` and `b` (equal sizes), i.e. `(1/N) min_σ Σ ‖aᵢ − b_σ(i)‖`.
///
/// Hungarian algorithm with row/column potentials (successive shortest
/// augmenting paths), `O(N³)`.
pub fn assignment_distance(a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "assignment needs equal non-empty sets, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let cost = |i: usize, j: usize| (a[i] - b[j]).norm();
    // 1-based arrays; column 0 is the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let costs: Vec<f64> = (1..=n).map(|j| cost(owner[j] - 1, j - 1)).collect();
    Ok(pairwise_sum(&costs) / n as f64)
}
