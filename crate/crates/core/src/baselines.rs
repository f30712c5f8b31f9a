//! Comparison methods on the same oracle, counter and trace machinery.
//!
//! All of them take the Euclidean proximal step `prox_ψ(x − η·g)`, which
//! is the plain gradient step when the problem has no regularizer.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{mirror_prox_step_in_place, MirrorStepSpec};
use crate::problem::{budget_units, FiniteSumProblem, IfoCounter, Monitor, RunOutput, RunTrace};
use crate::sampling::{MinibatchMode, RngStream};
use crate::scsg::{minibatch_from_fraction, ChargeConvention, EpochState, InnerLoop, DEFAULT_B_FRACTION};
use crate::vector;

/// Which inner iterate becomes the next SVRG snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotRule {
    /// Run all `m` inner steps and keep the last iterate.
    #[default]
    LastIterate,
    /// Run `N ~ Unif{0, …, m−1}` steps and keep that iterate.
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepDecay {
    #[default]
    Constant,
    /// `η_t = η / (1 + t)`
    InverseT,
}

/// Update rule for Katyusha's `y` sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KatyushaOption {
    /// `y⁺ = prox_{1/(3L)}(x − g/(3L))`; needs the problem's smoothness.
    I,
    /// `y⁺ = x + τ₁(z⁺ − z)`
    #[default]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KatyushaCoupling {
    /// `τ₁ = 2/(s + 4)` in outer round `s`, `τ₂ = ½`.
    #[default]
    Schedule,
    Fixed { tau1: f64, tau2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatyushaOptions {
    pub option: KatyushaOption,
    pub coupling: KatyushaCoupling,
    /// The `z` step is `step_scale · η / τ₁`. With `η = 1/L` and the
    /// default `1/3` this is the reference step `1/(3τ₁L)`.
    pub step_scale: f64,
}

impl Default for KatyushaOptions {
    fn default() -> Self {
        Self {
            option: KatyushaOption::II,
            coupling: KatyushaCoupling::Schedule,
            step_scale: 1.0 / 3.0,
        }
    }
}

/// `τ₁ = 2/(s + 4)` for outer round `s ≥ 0`.
pub fn katyusha_tau1(s: u64) -> f64 {
    2.0 / (s as f64 + 4.0)
}

/// `η / (1 + t)`.
pub fn decayed_step(eta: f64, t: u64) -> f64 {
    eta / (1.0 + t as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub eta: f64,
    /// Inner-loop length `m` (SVRG, SARAH, Katyusha).
    pub inner_loop: usize,
    pub minibatch: usize,
    pub pass_budget: f64,
    pub seed: u64,
    pub run_id: u64,
    pub minibatch_mode: MinibatchMode,
    pub charge: ChargeConvention,
    pub snapshot: SnapshotRule,
    pub katyusha: KatyushaOptions,
}

impl BaselineConfig {
    /// `m = 2n`, `b = max(1, round(10⁻⁴n))`, 50 passes.
    pub fn for_problem_size(n: usize, eta: f64) -> Self {
        Self::with_minibatch(n, eta, minibatch_from_fraction(n, DEFAULT_B_FRACTION))
    }

    pub fn with_minibatch(n: usize, eta: f64, minibatch: usize) -> Self {
        Self {
            eta,
            inner_loop: 2 * n,
            minibatch,
            pass_budget: 50.0,
            seed: 0,
            run_id: 0,
            minibatch_mode: MinibatchMode::WithoutReplacement,
            charge: ChargeConvention::Paired,
            snapshot: SnapshotRule::LastIterate,
            katyusha: KatyushaOptions::default(),
        }
    }

    fn validate(&self, problem: &FiniteSumProblem, x0: &[f64]) -> Result<()> {
        let n = problem.n();
        if x0.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                found: x0.len(),
            });
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be finite and > 0, got {}", self.eta)));
        }
        if self.minibatch == 0 || (self.minibatch > n && self.minibatch_mode == MinibatchMode::WithoutReplacement) {
            return Err(Error::invalid("b", format!("must lie in [1, n = {n}], got {}", self.minibatch)));
        }
        if !(self.pass_budget >= 0.0 && self.pass_budget.is_finite()) {
            return Err(Error::invalid("pass_budget", format!("must be finite and >= 0, got {}", self.pass_budget)));
        }
        Ok(())
    }

    fn snapshot_map(&self, extra: &[(&str, String)]) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("eta".into(), self.eta.to_string());
        m.insert("m".into(), self.inner_loop.to_string());
        m.insert("b".into(), self.minibatch.to_string());
        m.insert("pass_budget".into(), self.pass_budget.to_string());
        m.insert("run_id".into(), self.run_id.to_string());
        m.insert("minibatch_mode".into(), format!("{:?}", self.minibatch_mode));
        m.insert("charge".into(), format!("{:?}", self.charge));
        for (k, v) in extra {
            m.insert((*k).into(), v.clone());
        }
        m
    }

    fn step_spec(&self, problem: &FiniteSumProblem, eta: f64) -> Result<MirrorStepSpec> {
        MirrorStepSpec::euclidean(eta, *problem.regularizer())
    }
}

/// SVRG: a full gradient at each snapshot followed by `m` variance-reduced
/// steps. Shares its inner loop with SCSG; only the loop length differs.
pub fn run_svrg(problem: &FiniteSumProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<RunOutput> {
    cfg.validate(problem, x0)?;
    let n = problem.n();
    let trace = RunTrace::new("svrg", cfg.seed, n, cfg.snapshot_map(&[("snapshot", format!("{:?}", cfg.snapshot))]));
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut counter = IfoCounter::new();
    if cfg.inner_loop == 0 {
        return Ok(monitor.finish(x0.to_vec(), counter));
    }
    let mut rng = RngStream::derive(cfg.seed, cfg.run_id);
    let inner = InnerLoop {
        minibatch: cfg.minibatch,
        mode: cfg.minibatch_mode,
        charge: cfg.charge,
        spec: cfg.step_spec(problem, cfg.eta)?,
    };
    let budget = budget_units(cfg.pass_budget, n);
    let mut snapshot = x0.to_vec();
    while (counter.units() as f64) < budget {
        let mu = problem.full_gradient(&snapshot, &mut counter)?;
        let mut state = EpochState::from_parts(snapshot, mu);
        let steps = match cfg.snapshot {
            SnapshotRule::LastIterate => cfg.inner_loop as u64,
            SnapshotRule::UniformRandom => rng.below(cfg.inner_loop) as u64,
        };
        inner.run(problem, &mut state, steps, &mut rng, &mut counter)?;
        snapshot = state.into_iterate();
        if steps == 0 {
            // The snapshot did not move, but the full gradient was paid for.
            monitor.check_finite(&snapshot, &counter)?;
        }
        monitor.observe(&snapshot, &counter)?;
    }
    Ok(monitor.finish(snapshot, counter))
}

/// One SARAH outer round: `ν₀ = ∇f(x₀)`, then
/// `ν_k = ∇f_Ĩ(x_k) − ∇f_Ĩ(x_{k−1}) + ν_{k−1}` for `k = 1..m−1`,
/// stepping `x_{k+1} = step(x_k, ν_k)`. Returns `x_m`.
pub fn sarah_round<B>(
    problem: &FiniteSumProblem,
    x0: &[f64],
    m: usize,
    mut next_batch: B,
    spec: &MirrorStepSpec,
    counter: &mut IfoCounter,
    charge: ChargeConvention,
) -> Result<Vec<f64>>
where
    B: FnMut() -> Result<Vec<usize>>,
{
    let mut v = problem.full_gradient(x0, counter)?;
    let mut prev = x0.to_vec();
    let mut x = x0.to_vec();
    if m == 0 {
        return Ok(x);
    }
    mirror_prox_step_in_place(spec, &mut x, &v)?;
    for _ in 1..m {
        let batch = next_batch()?;
        let scale = 1.0 / batch.len() as f64;
        problem.add_gradient_differences(&batch, &x, &prev, scale, &mut v);
        counter.charge(charge.step_units(batch.len()));
        prev.copy_from_slice(&x);
        mirror_prox_step_in_place(spec, &mut x, &v)?;
    }
    Ok(x)
}

/// SARAH with last-iterate snapshots.
pub fn run_sarah(problem: &FiniteSumProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<RunOutput> {
    cfg.validate(problem, x0)?;
    let n = problem.n();
    let trace = RunTrace::new("sarah", cfg.seed, n, cfg.snapshot_map(&[]));
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut counter = IfoCounter::new();
    if cfg.inner_loop == 0 {
        return Ok(monitor.finish(x0.to_vec(), counter));
    }
    let mut rng = RngStream::derive(cfg.seed, cfg.run_id);
    let spec = cfg.step_spec(problem, cfg.eta)?;
    let budget = budget_units(cfg.pass_budget, n);
    let mut snapshot = x0.to_vec();
    while (counter.units() as f64) < budget {
        let (mode, b) = (cfg.minibatch_mode, cfg.minibatch);
        let rng = &mut rng;
        snapshot = sarah_round(problem, &snapshot, cfg.inner_loop, || mode.sample(n, b, rng), &spec, &mut counter, cfg.charge)?;
        monitor.observe(&snapshot, &counter)?;
    }
    Ok(monitor.finish(snapshot, counter))
}

/// Katyusha for non-strongly convex objectives.
///
/// Outer round `s`: `μ = ∇f(x̃)`, then for `m` steps
///
/// ```text
/// x⁺ = τ₁z + τ₂x̃ + (1 − τ₁ − τ₂)y
/// g  = μ + ∇f_Ĩ(x⁺) − ∇f_Ĩ(x̃)
/// z⁺ = prox_α(z − αg),   α = step_scale·η/τ₁
/// y⁺ = x⁺ + τ₁(z⁺ − z)                      (option II)
/// ```
///
/// and the next snapshot is the average of the `m` new `y` iterates.
// Structure and the τ₁ = 2/(s+4), τ₂ = ½ schedule are Katyusha-ns as
// published by Allen-Zhu; `step_scale` is exposed so it can be tuned.
pub fn run_katyusha_ns(problem: &FiniteSumProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<RunOutput> {
    cfg.validate(problem, x0)?;
    let n = problem.n();
    let opts = cfg.katyusha;
    if !(opts.step_scale > 0.0 && opts.step_scale.is_finite()) {
        return Err(Error::invalid("step_scale", format!("must be finite and > 0, got {}", opts.step_scale)));
    }
    let trace = RunTrace::new(
        "katyusha-ns",
        cfg.seed,
        n,
        cfg.snapshot_map(&[
            ("katyusha_option", format!("{:?}", opts.option)),
            ("katyusha_coupling", format!("{:?}", opts.coupling)),
            ("katyusha_step_scale", opts.step_scale.to_string()),
        ]),
    );
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut counter = IfoCounter::new();
    if cfg.inner_loop == 0 {
        return Ok(monitor.finish(x0.to_vec(), counter));
    }
    let y_spec = match opts.option {
        KatyushaOption::I => {
            let l = problem
                .smoothness()
                .ok_or_else(|| Error::invalid("smoothness", "Katyusha option I needs the problem's L"))?;
            Some(cfg.step_spec(problem, 1.0 / (3.0 * l))?)
        }
        KatyushaOption::II => None,
    };
    let mut rng = RngStream::derive(cfg.seed, cfg.run_id);
    let budget = budget_units(cfg.pass_budget, n);
    let dim = problem.dim();
    let scale = 1.0 / cfg.minibatch as f64;

    let mut snapshot = x0.to_vec();
    let mut y = x0.to_vec();
    let mut z = x0.to_vec();
    let mut x = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut z_next = vec![0.0; dim];
    let mut y_sum = vec![0.0; dim];
    let mut s = 0u64;
    while (counter.units() as f64) < budget {
        let (tau1, tau2) = match opts.coupling {
            KatyushaCoupling::Schedule => (katyusha_tau1(s), 0.5),
            KatyushaCoupling::Fixed { tau1, tau2 } => (tau1, tau2),
        };
        let z_spec = if tau1 > 0.0 {
            Some(cfg.step_spec(problem, opts.step_scale * cfg.eta / tau1)?)
        } else {
            None
        };
        let mu = problem.full_gradient(&snapshot, &mut counter)?;
        y_sum.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..cfg.inner_loop {
            for j in 0..dim {
                x[j] = tau1 * z[j] + tau2 * snapshot[j] + (1.0 - tau1 - tau2) * y[j];
            }
            let batch = cfg.minibatch_mode.sample(n, cfg.minibatch, &mut rng)?;
            g.iter_mut().for_each(|v| *v = 0.0);
            problem.add_gradient_differences(&batch, &x, &snapshot, scale, &mut g);
            vector::axpy(1.0, &mu, &mut g);
            counter.charge(cfg.charge.step_units(batch.len()));

            if let Some(spec) = &z_spec {
                z_next.copy_from_slice(&z);
                mirror_prox_step_in_place(spec, &mut z_next, &g)?;
            } else {
                z_next.copy_from_slice(&z);
            }
            match &y_spec {
                Some(spec) => {
                    y.copy_from_slice(&x);
                    mirror_prox_step_in_place(spec, &mut y, &g)?;
                }
                None => {
                    for j in 0..dim {
                        y[j] = x[j] + tau1 * (z_next[j] - z[j]);
                    }
                }
            }
            std::mem::swap(&mut z, &mut z_next);
            vector::axpy(1.0, &y, &mut y_sum);
        }
        for j in 0..dim {
            snapshot[j] = y_sum[j] / cfg.inner_loop as f64;
        }
        monitor.observe(&snapshot, &counter)?;
        s += 1;
    }
    Ok(monitor.finish(snapshot, counter))
}

/// Minibatch SGD. The trace is sampled every `⌈n/b⌉` steps and at the end.
pub fn run_sgd(problem: &FiniteSumProblem, cfg: &BaselineConfig, x0: &[f64], decay: StepDecay) -> Result<RunOutput> {
    cfg.validate(problem, x0)?;
    let n = problem.n();
    let name = match decay {
        StepDecay::Constant => "sgd",
        StepDecay::InverseT => "sgd-decay",
    };
    let trace = RunTrace::new(name, cfg.seed, n, cfg.snapshot_map(&[("decay", format!("{decay:?}"))]));
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut counter = IfoCounter::new();
    let mut rng = RngStream::derive(cfg.seed, cfg.run_id);
    let budget = budget_units(cfg.pass_budget, n);
    let cadence = n.div_ceil(cfg.minibatch) as u64;
    let scale = 1.0 / cfg.minibatch as f64;
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    let mut t = 0u64;
    while (counter.units() as f64) < budget {
        let eta = match decay {
            StepDecay::Constant => cfg.eta,
            StepDecay::InverseT => decayed_step(cfg.eta, t),
        };
        let batch = cfg.minibatch_mode.sample(n, cfg.minibatch, &mut rng)?;
        g.iter_mut().for_each(|v| *v = 0.0);
        problem.add_component_gradients(&batch, &x, scale, &mut g);
        counter.charge(batch.len() as u64);
        mirror_prox_step_in_place(&cfg.step_spec(problem, eta)?, &mut x, &g)?;
        t += 1;
        if t % cadence == 0 {
            monitor.observe(&x, &counter)?;
        }
    }
    if t % cadence != 0 {
        monitor.observe(&x, &counter)?;
    }
    Ok(monitor.finish(x, counter))
}

/// Full gradient descent, one trace sample per step.
pub fn run_gd(problem: &FiniteSumProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<RunOutput> {
    cfg.validate(problem, x0)?;
    let n = problem.n();
    let trace = RunTrace::new("gd", cfg.seed, n, cfg.snapshot_map(&[]));
    let mut monitor = Monitor::start(problem, trace, x0)?;
    let mut counter = IfoCounter::new();
    let spec = cfg.step_spec(problem, cfg.eta)?;
    let budget = budget_units(cfg.pass_budget, n);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    while (counter.units() as f64) < budget {
        g.iter_mut().for_each(|v| *v = 0.0);
        problem.add_full_gradient(&x, 1.0, &mut g);
        counter.charge(n as u64);
        mirror_prox_step_in_place(&spec, &mut x, &g)?;
        monitor.observe(&x, &counter)?;
    }
    Ok(monitor.finish(x, counter))
}
