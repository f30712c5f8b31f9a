//! The finite-sum problem, oracle cost accounting and run traces.
//!
//! Every solver talks to the data through [`FiniteSumProblem`] and pays for
//! each component gradient it touches on an [`IfoCounter`]. Evaluating the
//! objective for monitoring is charged to a *separate* counter, so traces
//! compare solvers on gradient work only.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::objectives::Regularizer;
use crate::vector;

/// A collection of `n` smooth convex component losses over `R^dim`.
pub trait ComponentLoss: Send + Sync + fmt::Debug {
    fn num_components(&self) -> usize;

    fn dim(&self) -> usize;

    /// `f_i(x)`.
    fn value(&self, i: usize, x: &[f64]) -> f64;

    /// Adds `scale * ∇f_i(x)` into `out` and returns `f_i(x)`.
    fn add_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]) -> f64;
}

/// Monotone accumulator of oracle charges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IfoCounter {
    units: u64,
}

impl IfoCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    #[inline]
    pub fn charge(&mut self, units: u64) {
        self.units += units;
    }
}

/// IFO units expressed as passes over the `n` components.
pub fn effective_passes(counter: &IfoCounter, n: usize) -> f64 {
    assert!(n >= 1, "effective passes need n >= 1");
    counter.units() as f64 / n as f64
}

/// `F(x) = (1/n) Σ f_i(x) + ridge·‖x‖² + ψ(x)`.
///
/// The ridge term is folded into every component (it is smooth and adds
/// `2·ridge` to each component's smoothness constant); `ψ` is handled by a
/// proximal or mirror step. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteSumProblem {
    loss: Arc<dyn ComponentLoss>,
    ridge: f64,
    regularizer: Regularizer,
    smoothness: Option<f64>,
}

impl FiniteSumProblem {
    pub fn new(loss: Arc<dyn ComponentLoss>) -> Result<Self> {
        if loss.num_components() == 0 {
            return Err(Error::invalid("n", "a finite-sum problem needs at least one component"));
        }
        Ok(Self {
            loss,
            ridge: 0.0,
            regularizer: Regularizer::none(),
            smoothness: None,
        })
    }

    /// Adds `weight·‖x‖²` to every component.
    pub fn with_ridge(mut self, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::invalid("ridge", format!("weight must be finite and >= 0, got {weight}")));
        }
        self.ridge = weight;
        Ok(self)
    }

    pub fn with_regularizer(mut self, regularizer: Regularizer) -> Self {
        self.regularizer = regularizer;
        self
    }

    /// Stores a smoothness estimate `L` for step-size scaling.
    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }

    pub fn n(&self) -> usize {
        self.loss.num_components()
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn loss(&self) -> &Arc<dyn ComponentLoss> {
        &self.loss
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(())
    }

    /// `f_i(x)` including the ridge term; uncharged.
    pub fn component_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.check_index(i)?;
        self.check_dim(x)?;
        Ok(self.loss.value(i, x) + self.ridge * vector::norm_sq(x))
    }

    /// `∇f_i(x)`; charges one unit.
    pub fn component_gradient(&self, i: usize, x: &[f64], counter: &mut IfoCounter) -> Result<Vec<f64>> {
        self.check_index(i)?;
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim()];
        self.add_component_gradients(&[i], x, 1.0, &mut g);
        counter.charge(1);
        Ok(g)
    }

    /// `(1/|I|) Σ_{i∈I} ∇f_i(x)` over a set of distinct indices; charges `|I|`.
    pub fn batch_gradient(&self, indices: &[usize], x: &[f64], counter: &mut IfoCounter) -> Result<Vec<f64>> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        self.check_dim(x)?;
        for &i in indices {
            self.check_index(i)?;
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        let mut g = vec![0.0; self.dim()];
        self.add_component_gradients(indices, x, 1.0 / indices.len() as f64, &mut g);
        counter.charge(indices.len() as u64);
        Ok(g)
    }

    /// Gradient of the smooth part over all components; charges `n`.
    pub fn full_gradient(&self, x: &[f64], counter: &mut IfoCounter) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim()];
        self.add_full_gradient(x, 1.0, &mut g);
        counter.charge(self.n() as u64);
        Ok(g)
    }

    /// `(1/n) Σ f_i(x)` including the ridge, without `ψ`; charges `n`.
    pub fn smooth_objective(&self, x: &[f64], counter: &mut IfoCounter) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.n();
        let sum: f64 = (0..n).map(|i| self.loss.value(i, x)).sum();
        counter.charge(n as u64);
        Ok(sum / n as f64 + self.ridge * vector::norm_sq(x))
    }

    /// `F(x)`; charges `n` units to `counter`, which callers keep separate
    /// from the solver's own counter.
    pub fn full_objective(&self, x: &[f64], counter: &mut IfoCounter) -> Result<f64> {
        Ok(self.smooth_objective(x, counter)? + self.regularizer.value(x))
    }

    /// Adds `scale · Σ_{i∈indices} ∇f_i(x)` into `out`. Indices may repeat.
    /// Uncharged and unchecked: solvers account for the cost themselves.
    #[inline]
    pub(crate) fn add_component_gradients(&self, indices: &[usize], x: &[f64], scale: f64, out: &mut [f64]) {
        for &i in indices {
            self.loss.add_gradient(i, x, scale, out);
        }
        if self.ridge != 0.0 {
            vector::axpy(2.0 * self.ridge * scale * indices.len() as f64, x, out);
        }
    }

    /// Adds `scale · Σ_{i∈indices} (∇f_i(x) − ∇f_i(y))` into `out`, one
    /// index at a time, so that `x == y` contributes exactly zero.
    /// Uncharged and unchecked.
    #[inline]
    pub(crate) fn add_gradient_differences(&self, indices: &[usize], x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) {
        for &i in indices {
            self.loss.add_gradient(i, x, scale, out);
            self.loss.add_gradient(i, y, -scale, out);
        }
        if self.ridge != 0.0 {
            let c = 2.0 * self.ridge * scale * indices.len() as f64;
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o += c * (a - b);
            }
        }
    }

    pub(crate) fn add_full_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.n();
        let s = scale / n as f64;
        for i in 0..n {
            self.loss.add_gradient(i, x, s, out);
        }
        if self.ridge != 0.0 {
            vector::axpy(2.0 * self.ridge * scale, x, out);
        }
    }
}

/// One trace point: cumulative solver cost and the objective there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub ifo_units: u64,
    pub objective: f64,
}

/// Objective values along a run, keyed by solver IFO cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    /// Number of components, for converting units to effective passes.
    pub n: usize,
    pub config: BTreeMap<String, String>,
    samples: Vec<TraceSample>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>, seed: u64, n: usize, config: BTreeMap<String, String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            seed,
            n,
            config,
            samples: Vec::new(),
        }
    }

    pub fn record(&mut self, ifo_units: u64, objective: f64) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if ifo_units <= last.ifo_units {
                return Err(Error::TraceOrder {
                    previous: last.ifo_units,
                    next: ifo_units,
                });
            }
        }
        self.samples.push(TraceSample { ifo_units, objective });
        Ok(())
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn passes(&self, sample: &TraceSample) -> f64 {
        sample.ifo_units as f64 / self.n as f64
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.samples.last().map(|s| s.objective)
    }
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// The method's output iterate (last anchor / snapshot).
    pub x: Vec<f64>,
    pub best_x: Vec<f64>,
    pub best_objective: f64,
    pub trace: RunTrace,
    pub ifo: IfoCounter,
    /// Units spent on monitoring; never part of `ifo`.
    pub evaluation: IfoCounter,
}

/// Records the trace, tracks the best-seen iterate and guards against
/// divergence. Shared by every solver.
pub(crate) struct Monitor<'a> {
    problem: &'a FiniteSumProblem,
    trace: RunTrace,
    evaluation: IfoCounter,
    best_x: Vec<f64>,
    best_objective: f64,
}

impl<'a> Monitor<'a> {
    pub fn start(problem: &'a FiniteSumProblem, trace: RunTrace, x0: &[f64]) -> Result<Self> {
        let mut evaluation = IfoCounter::new();
        let f0 = problem.full_objective(x0, &mut evaluation)?;
        let mut trace = trace;
        trace.samples.push(TraceSample {
            ifo_units: 0,
            objective: f0,
        });
        Ok(Self {
            problem,
            trace,
            evaluation,
            best_x: x0.to_vec(),
            best_objective: f0,
        })
    }

    pub fn check_finite(&self, x: &[f64], ifo: &IfoCounter) -> Result<()> {
        if vector::all_finite(x) {
            Ok(())
        } else {
            Err(self.diverged(ifo))
        }
    }

    fn diverged(&self, ifo: &IfoCounter) -> Error {
        Error::Diverged {
            algorithm: self.trace.algorithm.clone(),
            ifo_units: ifo.units(),
        }
    }

    pub fn observe(&mut self, x: &[f64], ifo: &IfoCounter) -> Result<f64> {
        self.check_finite(x, ifo)?;
        let f = self.problem.full_objective(x, &mut self.evaluation)?;
        if !f.is_finite() {
            return Err(self.diverged(ifo));
        }
        self.trace.record(ifo.units(), f)?;
        if f < self.best_objective {
            self.best_objective = f;
            self.best_x.copy_from_slice(x);
        }
        Ok(f)
    }

    pub fn finish(self, x: Vec<f64>, ifo: IfoCounter) -> RunOutput {
        log::debug!(
            "{} finished: {} IFO units, best F = {:.6e}",
            self.trace.algorithm,
            ifo.units(),
            self.best_objective
        );
        RunOutput {
            x,
            best_x: self.best_x,
            best_objective: self.best_objective,
            trace: self.trace,
            ifo,
            evaluation: self.evaluation,
        }
    }
}

/// Budget in IFO units for a pass budget; runs stop once it is reached.
pub(crate) fn budget_units(pass_budget: f64, n: usize) -> f64 {
    pass_budget * n as f64
}
