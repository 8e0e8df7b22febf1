//! Asymptotic-preserving particle pushers for the strongly magnetized planar
//! characteristic system
//!
//! ```text
//! ε x' = v,    ε v' = E(t, x) − v⊥/ε
//! ```
//!
//! and its guiding-center limit `x' = −E⊥(t, x)`, with RK4 references,
//! error indicators, coupled-ensemble studies and a sweep runner.

// Guards are written `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod linalg2;
pub mod reference;
pub mod schemes;
pub mod sweep;
pub mod verify;

pub use diagnostics::{CellStatus, ErrorRecord, OrderFit, ZBoundReport};
pub use dynamics::{GcState, ParticleState, YvState};
pub use ensemble::{CloudDescriptor, CouplingReport, ParticleCloud};
pub use error::{Error, Result};
pub use fields::{DomainBox, FieldBounds, FieldDescriptor, FieldSpec, SampleGrid};
pub use linalg2::{Mat2, Vec2};
pub use reference::{GcTrajectory, PhasePoint, ReferencePolicy, StiffTrajectory, Trajectory};
pub use schemes::{IntegrateOptions, PicardOptions, SchemeId, GAMMA};
pub use sweep::SweepConfig;
