//! Reference optimum from long solver runs.

use scsg::FiniteSumProblem;
use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::Result;
use crate::sweep::{run_algorithm, SolverSettings};

/// Stream ids for the reference runs, outside the sweep's id range.
const OPTIMUM_STREAM: u64 = 1 << 62;

/// Tolerance of the SCSG-versus-SVRG cross-check.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumEstimate {
    /// The better of the two best-seen iterates.
    pub x: Vec<f64>,
    /// `F(x)`, used as `F*`.
    pub value: f64,
    pub scsg_value: f64,
    pub svrg_value: f64,
    pub scsg_eta: f64,
    pub svrg_eta: f64,
    pub passes: f64,
    /// Whether SCSG's value is within the tolerance of SVRG's.
    pub cross_check_passed: bool,
}

impl OptimumEstimate {
    /// Lowers the estimate to any smaller objective seen elsewhere, so
    /// that suboptimality ratios stay nonnegative.
    pub fn lower_to(&mut self, objective: f64) {
        if objective < self.value {
            log::info!("F* lowered from {:.17e} to {objective:.17e} by a sweep trace", self.value);
            self.value = objective;
        }
    }
}

/// Long SCSG run at `scsg_eta`, cross-checked by a long SVRG run at
/// `svrg_eta`. `settings.passes` is the budget of each run.
pub fn estimate_optimum(
    problem: &FiniteSumProblem,
    scsg_eta: f64,
    svrg_eta: f64,
    settings: &SolverSettings,
) -> Result<OptimumEstimate> {
    let scsg = run_algorithm(problem, Algorithm::Scsg, scsg_eta, settings, OPTIMUM_STREAM)?;
    let svrg = run_algorithm(problem, Algorithm::Svrg, svrg_eta, settings, OPTIMUM_STREAM | 1)?;
    let cross_check_passed = scsg.best_objective <= svrg.best_objective + CROSS_CHECK_TOLERANCE;
    if !cross_check_passed {
        log::warn!(
            "optimum cross-check: SCSG best {:.17e} exceeds SVRG best {:.17e} by more than {CROSS_CHECK_TOLERANCE:e}",
            scsg.best_objective,
            svrg.best_objective
        );
    }
    let (x, value) = if scsg.best_objective <= svrg.best_objective {
        (scsg.best_x, scsg.best_objective)
    } else {
        (svrg.best_x, svrg.best_objective)
    };
    Ok(OptimumEstimate {
        x,
        value,
        scsg_value: scsg.best_objective,
        svrg_value: svrg.best_objective,
        scsg_eta,
        svrg_eta,
        passes: settings.passes,
        cross_check_passed,
    })
}
