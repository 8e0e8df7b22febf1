//! Self-checks of the closed-form stability norms and velocity bounds, run by `gcap verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::check_z_bound;
use crate::dynamics::{ParticleState, YvState};
use crate::fields::{estimate_bounds, DomainBox, FieldSpec, SampleGrid};
use crate::linalg2::{a_lambda, a_lambda_norm, resolvent, resolvent_norm, Vec2};
use crate::schemes::{
    imex_stage_residuals, implicit_start_residual, integrate_stiff, step_fo_x_implicit_start, step_fo_y, step_so_imex,
    PicardOptions, SchemeId, GAMMA,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &'static str, passed: bool, detail: String) -> SuiteResult {
    SuiteResult { name, passed, detail }
}

fn random_lambdas(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Log-uniform over (1e-6, 1e3].
    (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..=3.0))).collect()
}

pub fn resolvent_norms(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = random_lambdas(&mut rng, 1000)
        .into_iter()
        .map(|l| (resolvent_norm(l) - resolvent(l).op_norm()).abs())
        .fold(0.0, f64::max);
    suite("resolvent norms", worst <= 1e-12, format!("max |closed form − SVD| = {worst:e}"))
}

pub fn a_lambda_norms(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let lambdas = random_lambdas(&mut rng, 1000);
    let worst =
        lambdas.iter().map(|&l| (a_lambda_norm(l, GAMMA) - a_lambda(l, GAMMA).op_norm()).abs()).fold(0.0, f64::max);
    let contracting = lambdas.iter().all(|&l| a_lambda_norm(l, GAMMA) <= 1.0);
    suite(
        "A_lambda norms",
        worst <= 1e-12 && contracting,
        format!("max |closed form − SVD| = {worst:e}, all ≤ 1: {contracting}"),
    )
}

pub fn l_stability() -> SuiteResult {
    let lambda = 10.0;
    let eps = 0.1;
    let dt = lambda * eps * eps;
    let s = YvState { t: 0.0, y: Vec2::ZERO, v: Vec2::new(3.0, 3.0), eps };
    let n0 = s.v.norm();
    let fo = step_fo_y(&FieldSpec::zero(), &s, dt).next.v.norm() / n0;
    let so = step_so_imex(&FieldSpec::zero(), &s, dt).next.v.norm() / n0;
    let dfo = (fo - 1.0 / 101f64.sqrt()).abs();
    let dso = (so - a_lambda_norm(lambda, GAMMA)).abs();
    suite(
        "L-stability contractions",
        dfo <= 1e-12 && dso <= 1e-12,
        format!("first order {fo:.12} (err {dfo:e}), second order {so:.12} (err {dso:e})"),
    )
}

pub fn z_bounds() -> SuiteResult {
    let fields =
        [(FieldSpec::zero(), 1.0), (FieldSpec::uniform(Vec2::new(1.0, -0.5)), 1.0), (FieldSpec::potential(), 1.05)];
    let mut worst = Vec::new();
    let mut ok = true;
    for (field, slack) in &fields {
        let bounds = match estimate_bounds(field, DomainBox::default(), 1.0, SampleGrid::default()) {
            Ok(b) => b,
            Err(e) => return suite("discrete z-bounds", false, e.to_string()),
        };
        let mut max_ratio: f64 = 0.0;
        for scheme in [SchemeId::FoX, SchemeId::FoY] {
            for eps in [1e-3, 1e-2, 1e-1, 1.0] {
                let p = ParticleState { t: 0.0, x: Vec2::new(1.0, 1.0), v: Vec2::new(3.0, 3.0), eps };
                let report = integrate_stiff(field, scheme, &p, 0.01, 100, &Default::default())
                    .and_then(|run| check_z_bound(&run, field, &bounds));
                match report {
                    Ok(r) => max_ratio = max_ratio.max(r.max_ratio),
                    Err(e) => return suite("discrete z-bounds", false, e.to_string()),
                }
            }
        }
        ok &= max_ratio <= *slack;
        worst.push(format!("{}: {max_ratio:.4}", field.name()));
    }
    suite("discrete z-bounds", ok, format!("max ratio {}", worst.join(", ")))
}

pub fn implicit_residuals(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    let f = FieldSpec::potential();
    let kx = 1.0 + 0.4 * std::f64::consts::PI;
    let opts = PicardOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let eps = 10f64.powf(rng.random_range(-3.0..=0.0));
        let dt = rng.random_range(1e-4..0.4 / kx);
        let x = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let v = Vec2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let p = ParticleState { t: 0.0, x, v, eps };
        match step_fo_x_implicit_start(&f, &p, dt, &opts) {
            Ok(out) => worst = worst.max(implicit_start_residual(&f, &p, &out.next, dt)),
            Err(e) => return suite("implicit residuals", false, e.to_string()),
        }
        let s = p.to_yv();
        let out = step_so_imex(&f, &s, dt);
        for r in imex_stage_residuals(&f, &s, dt, &out) {
            worst = worst.max(r);
        }
    }
    suite("implicit residuals", worst <= 1e-12, format!("max residual {worst:e}"))
}

/// Every suite, in a fixed order.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![resolvent_norms(seed), a_lambda_norms(seed), l_stability(), z_bounds(), implicit_residuals(seed)]
}
