//! Pure-traction linear solve, minimization of `F` and `F_h`, and the h-sweep.

mod alternating;
mod linear;
mod nonlinear;
pub mod sparse;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::fem::DisplacementField;

pub use alternating::minimize_f;
pub use linear::{assemble_stiffness, solve_linear_elasticity, LINEAR_TOL};
pub use nonlinear::{minimize_fh, FhOptions};
pub use sweep::{compression_verdict, gamma_sweep, CompressionVerdict, SweepReport, SweepStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// The energy left every bound; `witness` is a direction of decrease.
    Diverged { witness: DisplacementField },
    /// The line search found no admissible decrease above the tolerance.
    Stalled,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Diverged { .. } => "diverged",
            SolveStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub field: DisplacementField,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub status: SolveStatus,
}
