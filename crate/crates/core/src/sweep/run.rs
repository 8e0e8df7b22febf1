use std::cmp::Ordering;

use rayon::prelude::*;

use crate::diagnostics::{self, CellStatus, ErrorRecord};
use crate::dynamics::{guiding_center, GcState, ParticleState};
use crate::ensemble::{
    assignment_distance, push_coupled, push_coupled_detailed, push_vs_reference, sample_cloud, CouplingOptions,
    CouplingReport,
};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::reference::{
    reference_trajectory_gc_with, reference_trajectory_stiff_with, GcTrajectory, StiffTrajectory, Trajectory,
};
use crate::schemes::{integrate_stiff, IntegrateOptions, SchemeId};

use super::config::{normalize_dt, StepGrid, SweepConfig};

/// Run `f` over `items` on `jobs` threads (all cores when `None`), keeping
/// input order. `Some(1)` runs on the calling thread.
fn ordered_map<T, R, F>(items: &[T], jobs: Option<usize>, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match jobs {
        Some(1) => Ok(items.iter().map(f).collect()),
        _ => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                builder = builder.num_threads(n);
            }
            let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(|| items.par_iter().map(f).collect()))
        }
    }
}

/// Reference solutions for one `ε`, recorded on the union of all cell grids.
struct EpsReferences {
    times: Vec<f64>,
    /// `None` when below the feasibility floor.
    stiff: Option<std::result::Result<StiffTrajectory, String>>,
    gc: std::result::Result<GcTrajectory, String>,
}

fn union_grid(grids: &[StepGrid], horizon: f64) -> Vec<f64> {
    let mut times: Vec<f64> = grids.iter().flat_map(|g| (1..=g.n_steps).map(move |k| k as f64 * g.dt)).collect();
    times.sort_by(f64::total_cmp);
    let tol = 1e-12 * horizon;
    times.dedup_by(|b, a| (*b - *a).abs() <= tol);
    times
}

fn locate(times: &[f64], t: f64, tol: f64) -> Option<usize> {
    let i = times.partition_point(|&s| s < t - tol);
    (i < times.len() && (times[i] - t).abs() <= tol).then_some(i)
}

/// Restrict a union-grid trajectory (without its initial state) to a cell's
/// times, re-stamped with those exact times.
fn restrict<P: Copy>(full: &Trajectory<P>, union: &[f64], cell_times: &[f64], horizon: f64) -> Option<Trajectory<P>> {
    let tol = 1e-12 * horizon;
    let mut states = Vec::with_capacity(cell_times.len());
    states.push(full.states[0]);
    for &t in &cell_times[1..] {
        states.push(full.states[1 + locate(union, t, tol)?]);
    }
    Some(Trajectory { times: cell_times.to_vec(), states, meta: full.meta.clone() })
}

fn build_references(cfg: &SweepConfig, field: &FieldSpec, eps: f64, grids: &[StepGrid]) -> EpsReferences {
    let times = union_grid(grids, cfg.horizon);
    let (x0, v0) = (cfg.x0(), cfg.v0());
    let gc = reference_trajectory_gc_with(
        field,
        &GcState::new(0.0, guiding_center(x0, v0, eps)),
        &times,
        cfg.reference.gc_substeps,
    )
    .map_err(|e| e.to_string());
    let stiff = (!cfg.reference.needs_proxy(eps, cfg.horizon)).then(|| {
        ParticleState::new(0.0, x0, v0, eps)
            .and_then(|p| reference_trajectory_stiff_with(field, &p, &times, &cfg.reference.policy()))
            .map_err(|e| e.to_string())
    });
    EpsReferences { times, stiff, gc }
}

struct Cell {
    scheme: SchemeId,
    eps_index: usize,
    eps: f64,
    grid: StepGrid,
}

fn run_cell(cfg: &SweepConfig, field: &FieldSpec, refs: &EpsReferences, cell: &Cell) -> ErrorRecord {
    let Cell { scheme, eps, grid, .. } = *cell;
    let fail = |msg: String| ErrorRecord::failed(scheme, eps, grid.dt, cfg.horizon, grid.n_steps, msg);
    let opts = IntegrateOptions { picard: cfg.picard, first_step_dt: None };
    let num = match ParticleState::new(0.0, cfg.x0(), cfg.v0(), eps)
        .and_then(|p| integrate_stiff(field, scheme, &p, grid.dt, grid.n_steps, &opts))
    {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    let gc_full = match &refs.gc {
        Ok(g) => g,
        Err(msg) => return fail(format!("guiding-center reference: {msg}")),
    };
    let Some(gc) = restrict(gc_full, &refs.times, &num.times, cfg.horizon) else {
        return fail("reference grid does not cover the cell grid".into());
    };
    let indicators = || -> Result<ErrorRecord> {
        let err_y_gc = diagnostics::err_y_gc(&num, &gc, grid.dt)?;
        let (err_y, err_v, err_v_gc, gc_proxy) = match &refs.stiff {
            None => (err_y_gc, None, diagnostics::err_v_gc_proxy(&num, &gc, field, grid.dt)?, true),
            Some(Err(msg)) => return Err(Error::InvalidArgument(format!("stiff reference: {msg}"))),
            Some(Ok(full)) => {
                let r = restrict(full, &refs.times, &num.times, cfg.horizon).ok_or(Error::GridMismatch { index: 0 })?;
                (
                    diagnostics::err_y(&num, &r, grid.dt)?,
                    Some(diagnostics::err_v(&num, &r, grid.dt)?),
                    diagnostics::err_v_gc(&num, &r, field, grid.dt)?,
                    false,
                )
            }
        };
        Ok(ErrorRecord {
            scheme,
            eps,
            dt: grid.dt,
            horizon: cfg.horizon,
            n_steps: grid.n_steps,
            err_y,
            err_y_gc,
            err_v,
            err_v_gc,
            gc_proxy,
            status: CellStatus::Ok,
        })
    };
    indicators().unwrap_or_else(|e| fail(e.to_string()))
}

/// Canonical row order: scheme tag, then `ε`, then `Δt`.
pub fn sort_records(records: &mut [ErrorRecord]) {
    records.sort_by(|a, b| {
        a.scheme
            .tag()
            .cmp(b.scheme.tag())
            .then_with(|| a.eps.total_cmp(&b.eps))
            .then_with(|| a.dt.total_cmp(&b.dt))
            .then(Ordering::Equal)
    });
}

/// Evaluate every `(scheme, ε, Δt)` cell of the configuration.
///
/// References are built once per `ε` on the union of all cell grids, then
/// cells run independently. Per-cell failures land in the `status` column;
/// only an invalid configuration is an error.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ErrorRecord>> {
    run_sweep_with_jobs(cfg, cfg.jobs)
}

pub fn run_sweep_with_jobs(cfg: &SweepConfig, jobs: Option<usize>) -> Result<Vec<ErrorRecord>> {
    cfg.validate()?;
    let field = FieldSpec::from_descriptor(&cfg.field)?;
    let grids = cfg.step_grids()?;
    let eps_values = cfg.eps_values();

    let refs = ordered_map(&eps_values, jobs, |&eps| build_references(cfg, &field, eps, &grids))?;

    let mut cells = Vec::new();
    for &scheme in &cfg.schemes {
        for (eps_index, &eps) in eps_values.iter().enumerate() {
            for &grid in &grids {
                cells.push(Cell { scheme, eps_index, eps, grid });
            }
        }
    }
    let mut records = ordered_map(&cells, jobs, |c| run_cell(cfg, &field, &refs[c.eps_index], c))?;
    sort_records(&mut records);
    Ok(records)
}

/// Coupled push-forward study from the `ensemble` section: one row per `ε`
/// for the limit pairing, optionally one for the resolved-reference pairing,
/// and one sub-cloud row carrying the exact assignment distance.
pub fn run_ensemble(cfg: &SweepConfig, seed: u64, jobs: Option<usize>) -> Result<Vec<CouplingReport>> {
    cfg.validate()?;
    let ens = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("configuration has no `ensemble` section".into()))?;
    let field = FieldSpec::from_descriptor(&cfg.field)?;
    let grid = normalize_dt(ens.dt, ens.horizon)?;
    let cloud = sample_cloud(&ens.cloud, ens.particles, seed)?;
    let opts = CouplingOptions {
        gap: ens.gap,
        parallel: jobs != Some(1),
        integrate: IntegrateOptions { picard: cfg.picard, first_step_dt: None },
    };
    let run = || -> Result<Vec<CouplingReport>> {
        let mut out = Vec::new();
        for &eps in &ens.eps {
            out.push(push_coupled(&field, &cloud, eps, ens.scheme, grid.dt, grid.n_steps, &opts)?);
            if ens.reference_pairing {
                let policy = cfg.reference.policy();
                out.push(push_vs_reference(&field, &cloud, eps, ens.scheme, grid.dt, grid.n_steps, &policy, &opts)?);
            }
            if ens.oracle_particles > 0 {
                let sub = cloud.truncated(ens.oracle_particles);
                let (mut rep, push) =
                    push_coupled_detailed(&field, &sub, eps, ens.scheme, grid.dt, grid.n_steps, &opts)?;
                rep.exact_distance = Some(assignment_distance(&push.left, &push.right)?);
                out.push(rep);
            }
        }
        Ok(out)
    };
    match jobs {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        _ => run(),
    }
}
