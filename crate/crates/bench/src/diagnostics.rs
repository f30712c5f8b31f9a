//! Problem complexity measures at a reference optimum.

use scsg::vector::{dist_sq, norm_sq};
use scsg::{FiniteSumProblem, IfoCounter};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Mean squared component-gradient norm at the optimum.
    pub h: f64,
    /// `L‖x0 − x*‖²`
    pub d_x: f64,
    /// `H / L`
    pub d_h: f64,
    /// `max(D_x, D_H)`
    pub d: f64,
    pub smoothness: f64,
    pub mu_hint: Option<f64>,
    /// `L / μ` when a strong-convexity hint is given.
    pub kappa: Option<f64>,
}

pub fn diagnostics(
    problem: &FiniteSumProblem,
    x_star: &[f64],
    x0: &[f64],
    smoothness: f64,
    mu_hint: Option<f64>,
) -> Result<Diagnostics> {
    let mut counter = IfoCounter::new();
    let mut h = 0.0;
    for i in 0..problem.n() {
        h += norm_sq(&problem.component_gradient(i, x_star, &mut counter)?);
    }
    h /= problem.n() as f64;
    let d_x = smoothness * dist_sq(x0, x_star);
    let d_h = h / smoothness;
    Ok(Diagnostics {
        h,
        d_x,
        d_h,
        d: d_x.max(d_h),
        smoothness,
        mu_hint,
        kappa: mu_hint.map(|mu| smoothness / mu),
    })
}
