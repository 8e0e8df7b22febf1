use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gcap_core::dynamics::guiding_center;
use gcap_core::schemes::{integrate, InitialState, Run};
use gcap_core::sweep::output::write_coupling;
use gcap_core::sweep::{emit_plot_data, normalize_dt, run_ensemble, run_sweep_with_jobs, write_records};
use gcap_core::{FieldSpec, GcState, IntegrateOptions, ParticleState, SchemeId, SweepConfig};

#[derive(Parser)]
#[command(name = "gcap", version, about = "Asymptotic-preserving pushers for strongly magnetized particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    config: Option<PathBuf>,
    /// Same as the positional argument.
    #[arg(long = "config", value_name = "PATH", conflicts_with = "config")]
    config_flag: Option<PathBuf>,
    /// Output file; overrides the config. `-` writes to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the (scheme, ε, Δt) error sweep and write CSV.
    Sweep(Common),
    /// Integrate a single run and dump its trajectory as CSV.
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// Scheme (default: first in the config). Limit schemes start at the guiding center.
        #[arg(long)]
        scheme: Option<SchemeId>,
        /// ε (default: first in the config grid).
        #[arg(long)]
        eps: Option<f64>,
        /// Δt (default: first in the config grid).
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run the built-in stability and bound checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Coupled push-forward study from the config's `ensemble` section.
    Ensemble(Common),
}

impl Common {
    fn load(&self) -> Result<SweepConfig> {
        let mut cfg = match self.config.as_ref().or(self.config_flag.as_ref()) {
            Some(path) => SweepConfig::load(path).context("cannot load config")?,
            None => SweepConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn jobs(&self, cfg: &SweepConfig) -> Result<Option<usize>> {
        match self.jobs.or(cfg.jobs) {
            Some(0) => bail!("--jobs must be at least 1"),
            j => Ok(j),
        }
    }

    fn sink(&self, fallback: Option<&PathBuf>) -> Result<Box<dyn Write>> {
        open_sink(self.out.as_ref().or(fallback).map(PathBuf::as_path))
    }
}

fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn sweep(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let records = run_sweep_with_jobs(&cfg, common.jobs(&cfg)?)?;
    let mut out = common.sink(cfg.output.as_ref())?;
    write_records(&records, &mut out)?;
    out.flush()?;
    if let Some(path) = &cfg.plot_data {
        emit_plot_data(&records, path)?;
    }
    let failed = records.iter().filter(|r| !r.status.is_ok()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed; see the status column", records.len());
    }
    Ok(())
}

fn trajectory(common: &Common, scheme: Option<SchemeId>, eps: Option<f64>, dt: Option<f64>) -> Result<()> {
    let cfg = common.load()?;
    let scheme = scheme.unwrap_or(cfg.schemes[0]);
    let eps = eps.unwrap_or(cfg.eps_values()[0]);
    let grid = normalize_dt(dt.unwrap_or(cfg.dt[0]), cfg.horizon)?;
    let field = FieldSpec::from_descriptor(&cfg.field)?;
    let s0 = if scheme.is_stiff() {
        InitialState::Stiff(ParticleState::new(0.0, cfg.x0(), cfg.v0(), eps)?)
    } else {
        InitialState::Gc(GcState::new(0.0, guiding_center(cfg.x0(), cfg.v0(), eps)))
    };
    let opts = IntegrateOptions { picard: cfg.picard, first_step_dt: None };
    let run = integrate(&field, scheme, &s0, grid.dt, grid.n_steps, &opts)?;
    let mut out = common.sink(None)?;
    match run {
        Run::Stiff(t) => t.write_csv_to(&mut out)?,
        Run::Gc(t) => t.write_csv_to(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn verify(seed: u64) -> bool {
    let results = gcap_core::verify::run_all(seed);
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    results.iter().all(|r| r.passed)
}

fn ensemble(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let reports = run_ensemble(&cfg, cfg.seed, common.jobs(&cfg)?)?;
    let mut out = common.sink(cfg.ensemble.as_ref().and_then(|e| e.output.as_ref()))?;
    write_coupling(&reports, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Sweep(c) => sweep(c)?,
        Command::Trajectory { common, scheme, eps, dt } => trajectory(common, *scheme, *eps, *dt)?,
        Command::Verify { seed } => {
            if !verify(*seed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Ensemble(c) => ensemble(c)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(&cli).unwrap_or_else(|e| {
        // Library errors already embed their source in the message.
        let mut shown = e.to_string();
        eprintln!("error: {shown}");
        for cause in e.chain().skip(1) {
            let msg = cause.to_string();
            if !shown.contains(&msg) {
                eprintln!("  caused by: {msg}");
                shown.push_str(&msg);
            }
        }
        ExitCode::FAILURE
    })
}
