use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scsg_bench::config::{RunConfig, KEYS};
use scsg_bench::dataset::write_libsvm;
use scsg_bench::diagnostics::diagnostics;
use scsg_bench::error::{BenchError, Result};
use scsg_bench::optimum::OptimumEstimate;
use scsg_bench::pipeline::{self, render_summary, Summary};
use scsg_bench::sweep::workers_from_env;
use scsg_bench::synthetic::{gaussian_clusters, SyntheticSpec};
use scsg_bench::Algorithm;

#[derive(Parser)]
#[command(name = "bench", version, about = "Step-size sweeps and convergence traces for finite-sum solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the step grid for each algorithm and write traces plus summary.json.
    Run(RunArgs),
    /// Estimate F* with long SCSG and SVRG runs; writes optimum.json.
    Optimum(RunArgs),
    /// Complexity measures H, D_x, D_H and D at the estimated optimum.
    Diagnostics(DiagnosticsArgs),
    /// Print the table stored in <dir>/summary.json.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic 3-class dataset in libsvm format.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        classes: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Every setting is optional here; unset flags fall back to the config
/// file and then to the defaults.
#[derive(Args)]
struct RunArgs {
    /// Flat key=value file whose keys are the flag names below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<String>,
    /// libsvm or csv
    #[arg(long)]
    format: Option<String>,
    /// Comma-separated tags, or `all`: scsg, svrg, sarah, katyusha-ns, sgd, sgd-decay, gd.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    passes: Option<String>,
    #[arg(long = "b-frac")]
    b_frac: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "m0-frac")]
    m0_frac: Option<String>,
    #[arg(long = "B0-frac")]
    batch0_frac: Option<String>,
    /// Exponent range lo:hi of c = 2^k in η = c/L.
    #[arg(long = "eta-grid", allow_hyphen_values = true)]
    eta_grid: Option<String>,
    #[arg(long)]
    trim: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// logistic or least-squares
    #[arg(long)]
    objective: Option<String>,
    /// `1/n` or a fixed weight on ‖x‖².
    #[arg(long)]
    ridge: Option<String>,
    #[arg(long = "optimum-passes")]
    optimum_passes: Option<String>,
    /// paired or strict
    #[arg(long)]
    charge: Option<String>,
    /// csv, json or both
    #[arg(long = "trace-format")]
    trace_format: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let values = [
            &self.data,
            &self.format,
            &self.algo,
            &self.passes,
            &self.b_frac,
            &self.alpha,
            &self.m0_frac,
            &self.batch0_frac,
            &self.eta_grid,
            &self.trim,
            &self.seed,
            &self.out,
            &self.objective,
            &self.ridge,
            &self.optimum_passes,
            &self.charge,
            &self.trace_format,
        ];
        for (key, value) in KEYS.iter().zip(values) {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct DiagnosticsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// optimum.json from `bench optimum`; estimated afresh when absent.
    #[arg(long)]
    optimum: Option<PathBuf>,
    /// Strong-convexity constant, if known; enables κ = L/μ.
    #[arg(long = "mu-hint")]
    mu_hint: Option<f64>,
}

fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| BenchError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| BenchError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn optimum(cfg: &RunConfig, prepared: &pipeline::Prepared) -> Result<OptimumEstimate> {
    let (_, opt) = pipeline::sweep_and_optimize(prepared, cfg, &[Algorithm::Scsg, Algorithm::Svrg], workers_from_env())?;
    Ok(opt)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let report = pipeline::run(&cfg, workers_from_env())?;
            print!("{}", render_summary(&report.summary));
            println!("wrote {} files to {}", report.files.len(), cfg.out.display());
        }
        Command::Optimum(args) => {
            let cfg = args.resolve()?;
            let prepared = pipeline::prepare(&cfg)?;
            let opt = optimum(&cfg, &prepared)?;
            let path = cfg.out.join("optimum.json");
            write_json(&path, &opt)?;
            println!(
                "F* = {:.17e} (SCSG {:.17e}, SVRG {:.17e}, cross-check {})",
                opt.value,
                opt.scsg_value,
                opt.svrg_value,
                if opt.cross_check_passed { "passed" } else { "FAILED" }
            );
            println!("wrote {}", path.display());
        }
        Command::Diagnostics(args) => {
            let cfg = args.run.resolve()?;
            let prepared = pipeline::prepare(&cfg)?;
            let opt = match &args.optimum {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| BenchError::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str::<OptimumEstimate>(&text)?
                }
                None => optimum(&cfg, &prepared)?,
            };
            let x0 = vec![0.0; prepared.problem.dim()];
            let d = diagnostics(&prepared.problem, &opt.x, &x0, prepared.l(), args.mu_hint)?;
            write_json(&cfg.out.join("diagnostics.json"), &d)?;
            println!("{}", serde_json::to_string_pretty(&d)?);
        }
        Command::Report { out } => print!("{}", render_summary(&Summary::read(&out)?)),
        Command::Synth {
            out,
            n,
            p,
            classes,
            seed,
        } => {
            let defaults = SyntheticSpec::default();
            let spec = SyntheticSpec {
                n,
                p,
                classes,
                seed: seed.unwrap_or(defaults.seed),
                ..defaults
            };
            let data = gaussian_clusters(&spec);
            let file = fs::File::create(&out).map_err(|e| BenchError::Io {
                path: out.clone(),
                source: e,
            })?;
            write_libsvm(&data, std::io::BufWriter::new(file)).map_err(|e| BenchError::Io {
                path: out.clone(),
                source: e,
            })?;
            println!("wrote {} rows to {}", data.n(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
