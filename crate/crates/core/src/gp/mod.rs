//! Geometric programming: posynomial algebra, single condensation, a
//! log-space barrier solver and the successive convex approximation loop.

mod expr;
mod problem;
mod sca;
mod solver;

pub use expr::{condense, Monomial, Posynomial};
pub use problem::GpProblem;
pub use sca::{sca_solve, ScaIterate, ScaOutcome, ScaSettings, ScaStatus};
pub use solver::{solve_gp, GpSolution, SolverSettings};
