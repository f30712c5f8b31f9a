//! Stochastically controlled stochastic gradient (SCSG).
//!
//! Epoch `j` (starting at 1) works from the anchor `x̃_{j−1}`:
//!
//! 1. draw a batch `I_j` of `B_j` distinct indices and set
//!    `μ_j = ∇f_{I_j}(x̃_{j−1})`;
//! 2. draw `N_j ~ Geom(m_j / (m_j + b))`;
//! 3. take `N_j` steps `x_k = step(x_{k−1}, ν_{k−1})` with the
//!    variance-reduced direction
//!    `ν = ∇f_Ĩ(x_{k−1}) − ∇f_Ĩ(x̃_{j−1}) + μ_j` on fresh minibatches `Ĩ`
//!    of size `b`;
//! 4. `x̃_j = x_{N_j}`.
//!
//! The schedule is `m_j = m₀α^j` and `B_j = ⌈min(B₀α^{2j}, n)⌉`; `m_j` stays
//! real because it only enters through the geometric parameter. The step is
//! the mirror-proximal update of [`crate::geometry`], which for the
//! Euclidean generator without a regularizer is exactly `x − ην`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{mirror_prox_step_in_place, DistanceGenerator, MirrorStepSpec};
use crate::problem::{budget_units, FiniteSumProblem, IfoCounter, Monitor, RunOutput, RunTrace};
use crate::sampling::{sample_geometric, sample_subset, GeometricParam, MinibatchMode, RngStream};

/// How an inner step's two minibatch gradients are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChargeConvention {
    /// `b` units per step: `(f_i, ∇f_i)` at the same index counts once, so
    /// an epoch costs `b·N_j + B_j` and `m_j + B_j` in expectation.
    #[default]
    Paired,
    /// `2b` units per step, one per gradient evaluation actually computed.
    Strict,
}

impl ChargeConvention {
    #[inline]
    pub fn step_units(self, minibatch: usize) -> u64 {
        match self {
            ChargeConvention::Paired => minibatch as u64,
            ChargeConvention::Strict => 2 * minibatch as u64,
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 1.25;
pub const DEFAULT_B_FRACTION: f64 = 1e-4;
pub const DEFAULT_M0_FRACTION: f64 = 0.005;
pub const DEFAULT_BATCH0_FRACTION: f64 = 0.001;
pub const DEFAULT_MAX_INNER_STEPS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ScsgConfig {
    /// Growth factor `α > 1`.
    pub alpha: f64,
    /// Initial expected inner-loop work `m₀`.
    pub m0: f64,
    /// Initial anchor batch size `B₀`.
    pub batch0: f64,
    /// Inner minibatch size `b`.
    pub minibatch: usize,
    pub eta: f64,
    /// Stop once this many effective passes have been charged.
    pub pass_budget: f64,
    pub seed: u64,
    /// Stream id under `seed`; distinct runs use distinct ids.
    pub run_id: u64,
    pub generator: DistanceGenerator,
    pub minibatch_mode: MinibatchMode,
    pub charge: ChargeConvention,
    /// Diagnostic only: enables the warning check of the parameter
    /// conditions under which the convergence guarantee is stated.
    pub xi: Option<f64>,
    pub max_inner_steps: u64,
}

impl ScsgConfig {
    /// Default schedule for `n` components: `α = 1.25`, `b = 10⁻⁴n`,
    /// `B₀ = 10⁻³n`, `m₀ = 5·10⁻³n`, with `b` rounded and clamped to `≥ 1`.
    pub fn for_problem_size(n: usize, eta: f64) -> Self {
        Self::from_fractions(n, eta, DEFAULT_ALPHA, DEFAULT_B_FRACTION, DEFAULT_M0_FRACTION, DEFAULT_BATCH0_FRACTION)
    }

    pub fn from_fractions(n: usize, eta: f64, alpha: f64, b_frac: f64, m0_frac: f64, batch0_frac: f64) -> Self {
        let nf = n as f64;
        Self {
            alpha,
            m0: m0_frac * nf,
            batch0: batch0_frac * nf,
            minibatch: minibatch_from_fraction(n, b_frac),
            eta,
            pass_budget: 50.0,
            seed: 0,
            run_id: 0,
            generator: DistanceGenerator::Euclidean,
            minibatch_mode: MinibatchMode::WithoutReplacement,
            charge: ChargeConvention::Paired,
            xi: None,
            max_inner_steps: DEFAULT_MAX_INNER_STEPS,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be > 1, got {}", self.alpha)));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::invalid("m0", format!("must be > 0, got {}", self.m0)));
        }
        if !(self.batch0 > 0.0 && self.batch0 <= n as f64) {
            return Err(Error::invalid("B0", format!("must lie in (0, n = {n}], got {}", self.batch0)));
        }
        if self.minibatch == 0 || (self.minibatch > n && self.minibatch_mode == MinibatchMode::WithoutReplacement) {
            return Err(Error::invalid("b", format!("must lie in [1, n = {n}], got {}", self.minibatch)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be finite and > 0, got {}", self.eta)));
        }
        if !(self.pass_budget >= 0.0 && self.pass_budget.is_finite()) {
            return Err(Error::invalid("pass_budget", format!("must be finite and >= 0, got {}", self.pass_budget)));
        }
        if let Some(xi) = self.xi {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::invalid("xi", format!("must lie in (0, 1), got {xi}")));
            }
        }
        Ok(())
    }

    /// Conditions `m₀ ≥ b/Γ` and `2ηL ≤ min{1 − Γ, 2Γb, Γ²bB₀/m₀}` with
    /// `Γ = 1/(4α^{1/ξ})`. Returns one message per violated condition;
    /// empty when `xi` is unset.
    pub fn theory_warnings(&self, smoothness: f64) -> Vec<String> {
        let Some(xi) = self.xi else {
            return Vec::new();
        };
        let gamma = 1.0 / (4.0 * self.alpha.powf(1.0 / xi));
        let b = self.minibatch as f64;
        let mut out = Vec::new();
        if self.m0 < b / gamma {
            out.push(format!("m0 = {} is below b/Γ = {}", self.m0, b / gamma));
        }
        let lhs = 2.0 * self.eta * smoothness;
        let bound = (1.0 - gamma).min(2.0 * gamma * b).min(gamma * gamma * b * self.batch0 / self.m0);
        if lhs > bound {
            out.push(format!("2ηL = {lhs} exceeds {bound}"));
        }
        out
    }

    fn snapshot(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("m0".into(), self.m0.to_string());
        m.insert("B0".into(), self.batch0.to_string());
        m.insert("b".into(), self.minibatch.to_string());
        m.insert("eta".into(), self.eta.to_string());
        m.insert("pass_budget".into(), self.pass_budget.to_string());
        m.insert("run_id".into(), self.run_id.to_string());
        m.insert("generator".into(), format!("{:?}", self.generator));
        m.insert("minibatch_mode".into(), format!("{:?}", self.minibatch_mode));
        m.insert("charge".into(), format!("{:?}", self.charge));
        m
    }
}

/// `max(1, round(frac·n))`.
pub fn minibatch_from_fraction(n: usize, frac: f64) -> usize {
    ((frac * n as f64).round() as usize).max(1)
}

/// Per-epoch parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochParams {
    /// Expected inner-loop work `m_j = m₀α^j`.
    pub m: f64,
    /// Anchor batch size `B_j`.
    pub batch: usize,
    /// Geometric parameter `m_j / (m_j + b)`.
    pub gamma: f64,
}

/// `(m_j, B_j, γ_j)` for epoch `j ≥ 1`.
pub fn schedule(config: &ScsgConfig, n: usize, j: u32) -> EpochParams {
    let m = config.m0 * config.alpha.powi(j as i32);
    let growth = config.batch0 * config.alpha.powi(2 * j as i32);
    let batch = growth.min(n as f64).ceil() as usize;
    EpochParams {
        m,
        batch: batch.clamp(1, n),
        gamma: m / (m + config.minibatch as f64),
    }
}

/// First epoch at which `B_j = n`: `⌈log(n/B₀) / (2 log α)⌉`.
pub fn saturation_epoch(n: usize, batch0: f64, alpha: f64) -> u32 {
    ((n as f64 / batch0).ln() / (2.0 * alpha.ln())).ceil().max(0.0) as u32
}

/// Anchor, anchor gradient `μ_j` and current inner iterate of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState {
    anchor: Vec<f64>,
    anchor_gradient: Vec<f64>,
    iterate: Vec<f64>,
    direction: Vec<f64>,
    difference: Vec<f64>,
}

impl EpochState {
    /// Starts an epoch: `μ = ∇f_I(anchor)`, charging `|I|`.
    pub fn begin(problem: &FiniteSumProblem, anchor: Vec<f64>, batch: &[usize], counter: &mut IfoCounter) -> Result<Self> {
        let anchor_gradient = problem.batch_gradient(batch, &anchor, counter)?;
        Ok(Self::from_parts(anchor, anchor_gradient))
    }

    /// Starts an epoch from a precomputed anchor gradient (no charge).
    pub fn from_parts(anchor: Vec<f64>, anchor_gradient: Vec<f64>) -> Self {
        let iterate = anchor.clone();
        let direction = vec![0.0; anchor.len()];
        let difference = vec![0.0; anchor.len()];
        Self {
            anchor,
            anchor_gradient,
            iterate,
            direction,
            difference,
        }
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn anchor_gradient(&self) -> &[f64] {
        &self.anchor_gradient
    }

    pub fn iterate(&self) -> &[f64] {
        &self.iterate
    }

    pub fn into_iterate(self) -> Vec<f64> {
        self.iterate
    }

    fn fill_direction(&mut self, problem: &FiniteSumProblem, minibatch: &[usize], x: Option<&[f64]>) {
        let scale = 1.0 / minibatch.len() as f64;
        self.difference.iter_mut().for_each(|v| *v = 0.0);
        let x = x.unwrap_or(&self.iterate);
        problem.add_gradient_differences(minibatch, x, &self.anchor, scale, &mut self.difference);
        for ((d, mu), diff) in self.direction.iter_mut().zip(&self.anchor_gradient).zip(&self.difference) {
            *d = mu + diff;
        }
    }

    /// One inner step on `minibatch` from the current iterate.
    pub fn step(
        &mut self,
        problem: &FiniteSumProblem,
        minibatch: &[usize],
        spec: &MirrorStepSpec,
        counter: &mut IfoCounter,
        charge: ChargeConvention,
    ) -> Result<()> {
        self.fill_direction(problem, minibatch, None);
        counter.charge(charge.step_units(minibatch.len()));
        mirror_prox_step_in_place(spec, &mut self.iterate, &self.direction)
    }
}

/// `∇f_Ĩ(x) − ∇f_Ĩ(anchor) + μ`; charges `b` or `2b` per `charge`.
pub fn variance_reduced_gradient(
    state: &EpochState,
    problem: &FiniteSumProblem,
    minibatch: &[usize],
    x: &[f64],
    counter: &mut IfoCounter,
    charge: ChargeConvention,
) -> Vec<f64> {
    let mut scratch = state.clone();
    scratch.fill_direction(problem, minibatch, Some(x));
    counter.charge(charge.step_units(minibatch.len()));
    scratch.direction
}

/// Inner-loop settings shared with the SVRG baseline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InnerLoop {
    pub minibatch: usize,
    pub mode: MinibatchMode,
    pub charge: ChargeConvention,
    pub spec: MirrorStepSpec,
}

impl InnerLoop {
    /// `steps` variance-reduced steps from the state's current iterate.
    pub fn run(
        &self,
        problem: &FiniteSumProblem,
        state: &mut EpochState,
        steps: u64,
        rng: &mut RngStream,
        counter: &mut IfoCounter,
    ) -> Result<()> {
        let n = problem.n();
        for _ in 0..steps {
            let batch = self.mode.sample(n, self.minibatch, rng)?;
            state.step(problem, &batch, &self.spec, counter, self.charge)?;
        }
        Ok(())
    }
}

/// Outcome of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    /// The new anchor `x̃_j`.
    pub anchor: Vec<f64>,
    /// Observed inner-loop length `N_j`.
    pub inner_steps: u64,
    pub params: EpochParams,
}

/// Runs epoch `j` from `anchor`.
pub fn run_epoch(
    problem: &FiniteSumProblem,
    config: &ScsgConfig,
    anchor: Vec<f64>,
    j: u32,
    rng: &mut RngStream,
    counter: &mut IfoCounter,
) -> Result<EpochReport> {
    let n = problem.n();
    let params = schedule(config, n, j);
    let batch = sample_subset(n, params.batch, rng)?;
    let mut state = EpochState::begin(problem, anchor, &batch, counter)?;
    let steps = sample_geometric(GeometricParam::new(params.gamma)?, rng);
    if steps >= config.max_inner_steps {
        return Err(Error::InnerLoopCap {
            cap: config.max_inner_steps,
            gamma: params.gamma,
        });
    }
    let inner = InnerLoop {
        minibatch: config.minibatch,
        mode: config.minibatch_mode,
        charge: config.charge,
        spec: MirrorStepSpec::new(config.eta, *problem.regularizer(), config.generator)?,
    };
    inner.run(problem, &mut state, steps, rng, counter)?;
    Ok(EpochReport {
        anchor: state.into_iterate(),
        inner_steps: steps,
        params,
    })
}

/// Runs epochs until `pass_budget` effective passes have been charged,
/// recording the objective after every epoch. Returns `x̃_T` as `x` and the
/// best-seen iterate alongside.
pub fn run(problem: &FiniteSumProblem, config: &ScsgConfig, x0: &[f64]) -> Result<RunOutput> {
    let n = problem.n();
    config.validate(n)?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x0.len(),
        });
    }
    if let Some(l) = problem.smoothness() {
        for w in config.theory_warnings(l) {
            log::warn!("scsg parameter condition: {w}");
        }
    }
    // Fail early on unsupported geometry/regularizer pairs.
    MirrorStepSpec::new(config.eta, *problem.regularizer(), config.generator)?;

    let trace = RunTrace::new("scsg", config.seed, n, config.snapshot());
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut rng = RngStream::derive(config.seed, config.run_id);
    let mut counter = IfoCounter::new();
    let budget = budget_units(config.pass_budget, n);
    let mut anchor = x0.to_vec();
    let mut j = 1u32;
    while (counter.units() as f64) < budget {
        let report = run_epoch(problem, config, anchor, j, &mut rng, &mut counter)?;
        anchor = report.anchor;
        monitor.observe(&anchor, &counter)?;
        j += 1;
    }
    Ok(monitor.finish(anchor, counter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_first_epoch() {
        let mut cfg = ScsgConfig::for_problem_size(10_000, 0.1);
        cfg.m0 = 50.0;
        cfg.minibatch = 1;
        let p = schedule(&cfg, 10_000, 1);
        assert_eq!(p.m, 62.5);
        assert_eq!(p.gamma, 62.5 / 63.5);
    }

    #[test]
    fn schedule_saturates_at_n() {
        let cfg = ScsgConfig::for_problem_size(1000, 0.1);
        assert_eq!(schedule(&cfg, 1000, 40).batch, 1000);
        assert_eq!(schedule(&cfg, 1000, 1).batch, 2);
    }

    #[test]
    fn default_saturation_epoch_is_sixteen() {
        for n in [1_000usize, 20_000, 1_000_000] {
            assert_eq!(saturation_epoch(n, 0.001 * n as f64, 1.25), 16);
        }
    }

    #[test]
    fn charge_units() {
        assert_eq!(ChargeConvention::Paired.step_units(3), 3);
        assert_eq!(ChargeConvention::Strict.step_units(3), 6);
    }

    #[test]
    fn validation() {
        let ok = ScsgConfig::for_problem_size(100, 0.1);
        assert!(ok.validate(100).is_ok());
        for bad in [
            ScsgConfig { alpha: 1.0, ..ok.clone() },
            ScsgConfig { m0: 0.0, ..ok.clone() },
            ScsgConfig { batch0: 101.0, ..ok.clone() },
            ScsgConfig { minibatch: 0, ..ok.clone() },
            ScsgConfig { eta: -1.0, ..ok.clone() },
            ScsgConfig { pass_budget: f64::NAN, ..ok.clone() },
            ScsgConfig { xi: Some(1.5), ..ok.clone() },
        ] {
            assert!(bad.validate(100).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn theory_warnings_only_with_xi() {
        let cfg = ScsgConfig::for_problem_size(1000, 10.0);
        assert!(cfg.theory_warnings(1.0).is_empty());
        let cfg = ScsgConfig { xi: Some(0.088), ..cfg };
        assert!(!cfg.theory_warnings(1.0).is_empty());
    }
}
