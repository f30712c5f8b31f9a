//! Step-size sweeps over `η = 2^k / L`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use scsg::baselines::{self, BaselineConfig, StepDecay};
use scsg::scsg::{self as solver, minibatch_from_fraction, ChargeConvention, ScsgConfig};
use scsg::{FiniteSumProblem, RunOutput};

use crate::algorithm::Algorithm;
use crate::config::RunConfig;
use crate::error::{BenchError, Result};

/// Solver knobs shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub passes: f64,
    pub b_frac: f64,
    pub alpha: f64,
    pub m0_frac: f64,
    pub batch0_frac: f64,
    pub seed: u64,
    pub charge: ChargeConvention,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::from(&RunConfig::default())
    }
}

impl From<&RunConfig> for SolverSettings {
    fn from(c: &RunConfig) -> Self {
        Self {
            passes: c.passes,
            b_frac: c.b_frac,
            alpha: c.alpha,
            m0_frac: c.m0_frac,
            batch0_frac: c.batch0_frac,
            seed: c.seed,
            charge: c.charge,
        }
    }
}

impl SolverSettings {
    pub fn with_passes(mut self, passes: f64) -> Self {
        self.passes = passes;
        self
    }

    pub fn scsg_config(&self, n: usize, eta: f64, run_id: u64) -> ScsgConfig {
        let mut cfg = ScsgConfig::from_fractions(n, eta, self.alpha, self.b_frac, self.m0_frac, self.batch0_frac);
        cfg.pass_budget = self.passes;
        cfg.seed = self.seed;
        cfg.run_id = run_id;
        cfg.charge = self.charge;
        cfg
    }

    pub fn baseline_config(&self, n: usize, eta: f64, run_id: u64) -> BaselineConfig {
        let mut cfg = BaselineConfig::with_minibatch(n, eta, minibatch_from_fraction(n, self.b_frac));
        cfg.pass_budget = self.passes;
        cfg.seed = self.seed;
        cfg.run_id = run_id;
        cfg.charge = self.charge;
        cfg
    }
}

/// Stream id of one grid point: distinct for every `(algorithm, k)`.
pub fn run_id(algorithm: Algorithm, exponent: i32) -> u64 {
    (algorithm.index() << 32) | u64::from(exponent as u32)
}

pub fn run_algorithm(
    problem: &FiniteSumProblem,
    algorithm: Algorithm,
    eta: f64,
    settings: &SolverSettings,
    run_id: u64,
) -> scsg::Result<RunOutput> {
    let n = problem.n();
    let x0 = vec![0.0; problem.dim()];
    if algorithm == Algorithm::Scsg {
        return solver::run(problem, &settings.scsg_config(n, eta, run_id), &x0);
    }
    let cfg = settings.baseline_config(n, eta, run_id);
    match algorithm {
        Algorithm::Scsg => unreachable!(),
        Algorithm::Svrg => baselines::run_svrg(problem, &cfg, &x0),
        Algorithm::Sarah => baselines::run_sarah(problem, &cfg, &x0),
        Algorithm::KatyushaNs => baselines::run_katyusha_ns(problem, &cfg, &x0),
        Algorithm::Sgd => baselines::run_sgd(problem, &cfg, &x0, StepDecay::Constant),
        Algorithm::SgdDecay => baselines::run_sgd(problem, &cfg, &x0, StepDecay::InverseT),
        Algorithm::Gd => baselines::run_gd(problem, &cfg, &x0),
    }
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub exponent: i32,
    /// `c = 2^k`
    pub c: f64,
    pub eta: f64,
    /// Final objective; `+∞` when the run failed.
    pub score: f64,
    pub outcome: std::result::Result<RunOutput, scsg::Error>,
}

impl GridPoint {
    pub fn output(&self) -> Option<&RunOutput> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub algorithm: Algorithm,
    pub smoothness: f64,
    pub grid: Vec<GridPoint>,
    /// Index into `grid` of the smallest final objective.
    pub best: usize,
}

impl SweepResult {
    pub fn best(&self) -> &GridPoint {
        &self.grid[self.best]
    }

    pub fn best_output(&self) -> &RunOutput {
        self.best().output().expect("the best grid point always has a finite score")
    }
}

/// Worker count from `BENCH_WORKERS`, else the machine's parallelism.
pub fn workers_from_env() -> usize {
    std::env::var("BENCH_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|w| *w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn score(outcome: &scsg::Result<RunOutput>) -> f64 {
    match outcome {
        Ok(out) => match out.trace.final_objective() {
            Some(f) if f.is_finite() => f,
            _ => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    }
}

/// One run per exponent, on at most `workers` threads. Runs share only
/// `problem`; each owns its counter and random stream.
pub fn sweep(
    problem: &FiniteSumProblem,
    algorithm: Algorithm,
    exponents: RangeInclusive<i32>,
    smoothness: f64,
    settings: &SolverSettings,
    workers: usize,
) -> Result<SweepResult> {
    let (first, last) = (*exponents.start(), *exponents.end());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let ks: Vec<i32> = exponents.collect();
    let grid: Vec<GridPoint> = pool.install(|| {
        ks.par_iter()
            .map(|&k| {
                let c = 2f64.powi(k);
                let eta = c / smoothness;
                let outcome = run_algorithm(problem, algorithm, eta, settings, run_id(algorithm, k));
                if let Err(e) = &outcome {
                    log::info!("{algorithm} with c = 2^{k} failed: {e}");
                }
                GridPoint {
                    exponent: k,
                    c,
                    eta,
                    score: score(&outcome),
                    outcome,
                }
            })
            .collect()
    });
    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, g)| g.score.is_finite())
        .min_by(|a, b| a.1.score.total_cmp(&b.1.score))
        .map(|(i, _)| i)
        .ok_or_else(|| BenchError::AllDiverged {
            algorithm: algorithm.tag().to_string(),
            first,
            last,
        })?;
    let chosen = &grid[best];
    log::info!(
        "{algorithm}: best c = 2^{} (final F = {:.10e}, best-seen F = {:.10e})",
        chosen.exponent,
        chosen.score,
        chosen.output().map_or(f64::NAN, |o| o.best_objective)
    );
    Ok(SweepResult {
        algorithm,
        smoothness,
        grid,
        best,
    })
}
