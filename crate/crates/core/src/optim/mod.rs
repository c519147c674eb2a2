//! Unconstrained solvers: L-BFGS for the inner and server problems, Adam for
//! the outer loop over synthetic features.

mod adam;
mod lbfgs;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use lbfgs::{lbfgs_minimize, ConvergenceRecord, InnerSolveConfig, SolveStatus};
