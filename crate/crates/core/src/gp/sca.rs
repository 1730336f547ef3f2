//! Successive convex approximation: repeatedly rebuild a GP whose
//! non-posynomial pieces are condensed around the previous iterate, solve it,
//! and stop once the objective settles.

use serde::Serialize;

use super::problem::GpProblem;
use super::solver::{solve_gp, SolverSettings};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScaSettings {
    /// Absolute change in objective below which the loop stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Strictly positive starting point `z^(0)`.
    pub initial_point: Vec<f64>,
    pub solver: SolverSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaStatus {
    /// Objective change fell below the tolerance.
    Converged,
    /// The subproblem contained no approximation, so its optimum is final.
    Exact,
    /// Iteration cap reached before the tolerance was met.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaIterate {
    pub iteration: usize,
    pub objective: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub point: Vec<f64>,
    pub objective: f64,
    /// Number of subproblems solved.
    pub iterations: usize,
    pub status: ScaStatus,
    /// `history[0]` is the initial point, `history[r]` the r-th solve.
    pub history: Vec<ScaIterate>,
}

impl ScaOutcome {
    /// Largest increase between consecutive objective values (<= 0 when the
    /// sequence is non-increasing).
    pub fn worst_increase(&self) -> f64 {
        self.history
            .windows(2)
            .map(|w| w[1].objective - w[0].objective)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sca_solve<F>(mut builder: F, settings: &ScaSettings) -> Result<ScaOutcome>
where
    F: FnMut(&[f64]) -> Result<GpProblem>,
{
    if settings
        .initial_point
        .iter()
        .any(|&z| !(z > 0.0) || !z.is_finite())
    {
        return Err(Error::domain("SCA initial point must be strictly positive"));
    }
    if !(settings.tolerance >= 0.0) {
        return Err(Error::domain("SCA tolerance must be non-negative"));
    }
    let mut point = settings.initial_point.clone();
    let mut problem = builder(&point)?;
    let mut objective = problem.objective().eval(&point)?;
    let mut history = vec![ScaIterate {
        iteration: 0,
        objective,
        point: point.clone(),
    }];

    let mut status = ScaStatus::Stalled;
    for r in 1..=settings.max_iterations.max(1) {
        if r > 1 {
            problem = builder(&point)?;
        }
        let solution = solve_gp(&problem, &point, &settings.solver)?;
        let change = (solution.objective - objective).abs();
        point = solution.point;
        objective = solution.objective;
        history.push(ScaIterate {
            iteration: r,
            objective,
            point: point.clone(),
        });
        if problem.is_exact() {
            status = ScaStatus::Exact;
            break;
        }
        if change <= settings.tolerance {
            status = ScaStatus::Converged;
            break;
        }
    }
    if status == ScaStatus::Stalled {
        log::warn!(
            "SCA stopped after {} iterations without meeting tolerance {}",
            settings.max_iterations,
            settings.tolerance
        );
    }
    Ok(ScaOutcome {
        point,
        objective,
        iterations: history.len() - 1,
        status,
        history,
    })
}
