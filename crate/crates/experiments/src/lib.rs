//! Scenario runner for the traction-gap experiments: configuration, the demo
//! catalog and report emission.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod demos;
pub mod error;
pub mod report;

pub use config::{parse_scenario, DemoKind, Scenario};
pub use demos::{check_loads, demo_nonconvexity, run_scenario};
pub use error::{ExperimentError, Result};
pub use report::{emit_report, Format, Report};
