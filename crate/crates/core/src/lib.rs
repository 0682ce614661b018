//! Energies and solvers for pure traction problems in elasticity.
//!
//! The central object is the gap functional
//!
//! ```text
//! F(v) = min_{W skew} ∫_Ω V0(E(v) − ½W²) dx − L(v)
//! ```
//!
//! which sits below the linearized energy `E(v) = ∫V0(E(v)) − L(v)`, together
//! with the rescaled Green-St.Venant energies `F_h` it is the limit of.
//! Two-dimensional fields live on P1 triangle meshes; the three-dimensional
//! phenomena are reproduced with exact affine fields on boxes.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod constitutive;
pub mod error;
pub mod fem;
pub mod functionals;
pub mod inner;
pub mod loads;
pub mod mesh;
pub mod rigid;
pub mod solvers;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
