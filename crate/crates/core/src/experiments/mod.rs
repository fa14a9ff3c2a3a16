//! Runnable experiments with JSON and CSV reports.

pub mod blowup;
pub mod dyadic;
pub mod fdcheck;
pub mod geometry;
pub mod glue;
pub mod lifespan;
pub mod scaling;
pub mod selftest;

pub use blowup::{run_blowup, BlowupConfig, BlowupReport};
pub use dyadic::{run_dyadic, DyadicConfig, DyadicReport};
pub use fdcheck::{run_fdcheck, FdCheckConfig, FdCheckReport};
pub use geometry::{run_geometry, GeometryConfig, GeometryReport};
pub use glue::{build_glued_sequence, GlueConfig, GlueReport};
pub use lifespan::{lifespan_sweep, LifespanReport};
pub use scaling::{scale_norm_check, ScalingReport};
pub use selftest::{norms_selftest, SelftestReport};
