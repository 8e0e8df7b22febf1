//! Configuration-driven `(ε, Δt)` error sweeps and their CSV / plot output.

pub mod config;
pub mod output;
pub mod run;

pub use config::{normalize_dt, EnsembleConfig, EpsGrid, ReferenceConfig, StepGrid, SweepConfig};
pub use output::{emit_coupling_csv, emit_csv, emit_plot_data, load_csv, read_records, write_records};
pub use run::{run_ensemble, run_sweep, run_sweep_with_jobs, sort_records};
