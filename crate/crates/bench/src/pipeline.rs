//! The end-to-end benchmark: load, trim, sweep, estimate `F*`, emit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use scsg::objectives::{estimate_smoothness, SmoothnessEstimate};
use scsg::{FiniteSumProblem, IfoCounter};
use serde::{Deserialize, Serialize};

use crate::accuracy::{suboptimality_ratio, time_to_accuracy, EPSILONS};
use crate::algorithm::Algorithm;
use crate::config::{ObjectiveKind, RunConfig, TraceFormat};
use crate::dataset::{load_dataset, Dataset};
use crate::error::{BenchError, Result};
use crate::optimum::{estimate_optimum, OptimumEstimate};
use crate::sweep::{sweep, SolverSettings, SweepResult};
use crate::trace_io::{emit_trace_csv, emit_trace_json};

pub const SUMMARY_FILE: &str = "summary.json";

/// The trimmed dataset and the problem built on it.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub rows_loaded: usize,
    pub smoothness: SmoothnessEstimate,
    pub problem: FiniteSumProblem,
}

impl Prepared {
    /// Trimmed mean of `2‖a_i‖²`.
    pub fn l(&self) -> f64 {
        self.smoothness.aggregate
    }
}

pub fn prepare_dataset(data: &Dataset, config: &RunConfig) -> Result<Prepared> {
    let (smoothness, kept) = estimate_smoothness(data, config.trim)?;
    let ridge = config.ridge.weight(kept.n());
    let problem = match config.objective {
        ObjectiveKind::Logistic => kept.logistic_problem(ridge)?,
        ObjectiveKind::LeastSquares => kept.least_squares_problem(ridge)?,
    };
    log::info!(
        "{} of {} rows kept after trimming {}; L = {:.6e}",
        kept.n(),
        data.n(),
        config.trim,
        smoothness.aggregate
    );
    Ok(Prepared {
        dataset: kept,
        rows_loaded: data.n(),
        smoothness,
        problem,
    })
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let path = config.data.as_ref().ok_or_else(|| BenchError::InvalidSetting {
        key: "data".into(),
        message: "no dataset given".into(),
    })?;
    prepare_dataset(&load_dataset(path, config.format)?, config)
}

/// File name of one grid point's trace, e.g. `scsg_0.25.csv`.
pub fn trace_file_name(algorithm: Algorithm, c: f64, extension: &str) -> String {
    format!("{}_{c}.{extension}", algorithm.tag())
}

pub fn eps_key(eps: f64) -> String {
    format!("{eps:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub exponent: i32,
    pub c: f64,
    pub eta: f64,
    /// `None` when the run failed.
    pub final_objective: Option<f64>,
    pub final_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub best_exponent: i32,
    pub best_c: f64,
    pub best_eta: f64,
    pub final_objective: f64,
    pub final_ratio: f64,
    pub best_seen_objective: f64,
    pub best_seen_ratio: f64,
    /// Effective passes to reach each accuracy for good, keyed by ε.
    pub time_to_accuracy: BTreeMap<String, Option<f64>>,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumSummary {
    pub f_star: f64,
    pub scsg_value: f64,
    pub svrg_value: f64,
    pub scsg_eta: f64,
    pub svrg_eta: f64,
    pub passes: f64,
    pub cross_check_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows_loaded: usize,
    pub rows_kept: usize,
    pub features: usize,
    pub dim: usize,
    pub smoothness: f64,
    pub f0: f64,
    pub f_star: f64,
    pub optimum: OptimumSummary,
    pub config: BTreeMap<String, String>,
    pub algorithms: BTreeMap<String, AlgorithmSummary>,
}

impl Summary {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Everything a benchmark run produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub prepared: Prepared,
    pub sweeps: BTreeMap<Algorithm, SweepResult>,
    pub optimum: OptimumEstimate,
    pub f0: f64,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Sweeps `algorithms` (SCSG and SVRG are always swept, since the optimum
/// estimate uses their tuned steps) and estimates `F*`.
pub fn sweep_and_optimize(
    prepared: &Prepared,
    config: &RunConfig,
    algorithms: &[Algorithm],
    workers: usize,
) -> Result<(BTreeMap<Algorithm, SweepResult>, OptimumEstimate)> {
    let settings = SolverSettings::from(config);
    let mut all: Vec<Algorithm> = algorithms.to_vec();
    all.extend([Algorithm::Scsg, Algorithm::Svrg]);
    all.sort();
    all.dedup();
    let mut sweeps = BTreeMap::new();
    for algo in all {
        let s = sweep(&prepared.problem, algo, config.eta_grid.clone(), prepared.l(), &settings, workers)?;
        sweeps.insert(algo, s);
    }
    let mut optimum = estimate_optimum(
        &prepared.problem,
        sweeps[&Algorithm::Scsg].best().eta,
        sweeps[&Algorithm::Svrg].best().eta,
        &settings.with_passes(config.optimum_passes),
    )?;
    for s in sweeps.values() {
        for out in s.grid.iter().filter_map(|g| g.output()) {
            optimum.lower_to(out.best_objective);
        }
    }
    Ok((sweeps, optimum))
}

fn summarize(sweep: &SweepResult, f_star: f64, f0: f64) -> Result<AlgorithmSummary> {
    let best = sweep.best();
    let out = sweep.best_output();
    let mut tta = BTreeMap::new();
    for eps in EPSILONS {
        tta.insert(eps_key(eps), time_to_accuracy(&out.trace, f_star, f0, eps)?);
    }
    let runs = sweep
        .grid
        .iter()
        .map(|g| {
            let fin = g.output().and_then(|o| o.trace.final_objective());
            Ok(RunSummary {
                exponent: g.exponent,
                c: g.c,
                eta: g.eta,
                final_objective: fin,
                final_ratio: fin.map(|f| suboptimality_ratio(f, f_star, f0)).transpose()?,
                error: g.outcome.as_ref().err().map(|e| e.to_string()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlgorithmSummary {
        best_exponent: best.exponent,
        best_c: best.c,
        best_eta: best.eta,
        final_objective: best.score,
        final_ratio: suboptimality_ratio(best.score, f_star, f0)?,
        best_seen_objective: out.best_objective,
        best_seen_ratio: suboptimality_ratio(out.best_objective, f_star, f0)?,
        time_to_accuracy: tta,
        runs,
    })
}

/// Runs the full protocol on a prepared problem and writes traces and
/// `summary.json` into `config.out`.
pub fn run_prepared(prepared: Prepared, config: &RunConfig, workers: usize) -> Result<Report> {
    let (sweeps, optimum) = sweep_and_optimize(&prepared, config, &config.algorithms, workers)?;
    let f_star = optimum.value;
    let x0 = vec![0.0; prepared.problem.dim()];
    let f0 = prepared.problem.full_objective(&x0, &mut IfoCounter::new())?;

    fs::create_dir_all(&config.out).map_err(|e| BenchError::io(&config.out, e))?;
    let snapshot = config.snapshot();
    let mut files = Vec::new();
    let mut algorithms = BTreeMap::new();
    for algo in &config.algorithms {
        let s = &sweeps[algo];
        for g in &s.grid {
            let Some(out) = g.output() else { continue };
            if matches!(config.trace_format, TraceFormat::Csv | TraceFormat::Both) {
                let path = config.out.join(trace_file_name(*algo, g.c, "csv"));
                emit_trace_csv(&out.trace, f_star, f0, &path)?;
                files.push(path);
            }
            if matches!(config.trace_format, TraceFormat::Json | TraceFormat::Both) {
                let path = config.out.join(trace_file_name(*algo, g.c, "json"));
                emit_trace_json(&out.trace, f_star, f0, &snapshot, &path)?;
                files.push(path);
            }
        }
        algorithms.insert(algo.tag().to_string(), summarize(s, f_star, f0)?);
    }

    let summary = Summary {
        rows_loaded: prepared.rows_loaded,
        rows_kept: prepared.dataset.n(),
        features: prepared.dataset.p(),
        dim: prepared.problem.dim(),
        smoothness: prepared.l(),
        f0,
        f_star,
        optimum: OptimumSummary {
            f_star,
            scsg_value: optimum.scsg_value,
            svrg_value: optimum.svrg_value,
            scsg_eta: optimum.scsg_eta,
            svrg_eta: optimum.svrg_eta,
            passes: optimum.passes,
            cross_check_passed: optimum.cross_check_passed,
        },
        config: snapshot,
        algorithms,
    };
    let path = config.out.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| BenchError::io(&path, e))?;
    files.push(path);

    Ok(Report {
        prepared,
        sweeps,
        optimum,
        f0,
        summary,
        files,
    })
}

pub fn run(config: &RunConfig, workers: usize) -> Result<Report> {
    run_prepared(prepare(config)?, config, workers)
}

/// Plain-text table of a summary.
pub fn render_summary(summary: &Summary) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "rows {} (kept {}), features {}, L = {:.6e}, F0 = {:.10e}, F* = {:.10e}\n",
        summary.rows_loaded, summary.rows_kept, summary.features, summary.smoothness, summary.f0, summary.f_star
    ));
    s.push_str(&format!(
        "{:<12} {:>8} {:>12} {:>12}",
        "algorithm", "best c", "final ratio", "best seen"
    ));
    for eps in EPSILONS {
        s.push_str(&format!(" {:>9}", format!("T({eps:e})")));
    }
    s.push('\n');
    for (tag, a) in &summary.algorithms {
        s.push_str(&format!(
            "{tag:<12} {:>8} {:>12.4e} {:>12.4e}",
            format!("2^{}", a.best_exponent),
            a.final_ratio,
            a.best_seen_ratio
        ));
        for eps in EPSILONS {
            let cell = match a.time_to_accuracy.get(&eps_key(eps)).copied().flatten() {
                Some(t) => format!("{t:.2}"),
                None => "-".into(),
            };
            s.push_str(&format!(" {cell:>9}"));
        }
        s.push('\n');
    }
    s
}
