//! Run configuration: defaults, then a flat `key = value` file, then CLI
//! flags. Keys are the long flag names without the leading dashes.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use scsg::scsg::ChargeConvention;

use crate::algorithm::Algorithm;
use crate::dataset::DataFormat;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Logistic,
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// `(1/n)‖x‖²`
    InverseN,
    Fixed(f64),
}

impl Ridge {
    pub fn weight(self, n: usize) -> f64 {
        match self {
            Ridge::InverseN => 1.0 / n as f64,
            Ridge::Fixed(w) => w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    pub algorithms: Vec<Algorithm>,
    pub passes: f64,
    pub b_frac: f64,
    pub alpha: f64,
    pub m0_frac: f64,
    pub batch0_frac: f64,
    pub eta_grid: RangeInclusive<i32>,
    pub trim: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub objective: ObjectiveKind,
    pub ridge: Ridge,
    pub optimum_passes: f64,
    pub charge: ChargeConvention,
    pub trace_format: TraceFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            format: DataFormat::Libsvm,
            algorithms: Algorithm::ALL.to_vec(),
            passes: 50.0,
            b_frac: 1e-4,
            alpha: 1.25,
            m0_frac: 0.005,
            batch0_frac: 0.001,
            eta_grid: -10..=10,
            trim: 0.05,
            seed: 0,
            out: PathBuf::from("bench-out"),
            objective: ObjectiveKind::Logistic,
            ridge: Ridge::InverseN,
            optimum_passes: 5000.0,
            charge: ChargeConvention::Paired,
            trace_format: TraceFormat::Csv,
        }
    }
}

pub const KEYS: [&str; 17] = [
    "data",
    "format",
    "algo",
    "passes",
    "b-frac",
    "alpha",
    "m0-frac",
    "B0-frac",
    "eta-grid",
    "trim",
    "seed",
    "out",
    "objective",
    "ridge",
    "optimum-passes",
    "charge",
    "trace-format",
];

fn bad(key: &str, message: impl Into<String>) -> BenchError {
    BenchError::InvalidSetting {
        key: key.to_string(),
        message: message.into(),
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, format!("cannot parse `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be finite and > 0, got {value}")))
    }
}

/// Parses `lo:hi` with `lo <= hi`.
pub fn parse_grid(value: &str) -> Result<RangeInclusive<i32>> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| bad("eta-grid", format!("expected lo:hi, got `{value}`")))?;
    let lo: i32 = number("eta-grid", lo.trim())?;
    let hi: i32 = number("eta-grid", hi.trim())?;
    if lo > hi {
        return Err(bad("eta-grid", format!("empty range {lo}:{hi}")));
    }
    Ok(lo..=hi)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "algo" => self.algorithms = Algorithm::parse_list(value)?,
            "passes" => {
                let v: f64 = number(key, value)?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(bad(key, "must be finite and >= 0"));
                }
                self.passes = v;
            }
            "b-frac" => self.b_frac = positive(key, value)?,
            "alpha" => {
                let v = positive(key, value)?;
                if v <= 1.0 {
                    return Err(bad(key, "must be > 1"));
                }
                self.alpha = v;
            }
            "m0-frac" => self.m0_frac = positive(key, value)?,
            "B0-frac" => self.batch0_frac = positive(key, value)?,
            "eta-grid" => self.eta_grid = parse_grid(value)?,
            "trim" => {
                let v: f64 = number(key, value)?;
                if !(0.0..1.0).contains(&v) {
                    return Err(bad(key, "must lie in [0, 1)"));
                }
                self.trim = v;
            }
            "seed" => self.seed = number(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "objective" => {
                self.objective = match value {
                    "logistic" => ObjectiveKind::Logistic,
                    "least-squares" => ObjectiveKind::LeastSquares,
                    _ => return Err(bad(key, "expected `logistic` or `least-squares`")),
                }
            }
            "ridge" => {
                self.ridge = if value == "1/n" {
                    Ridge::InverseN
                } else {
                    let w: f64 = number(key, value)?;
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(bad(key, "must be `1/n` or a finite weight >= 0"));
                    }
                    Ridge::Fixed(w)
                }
            }
            "optimum-passes" => self.optimum_passes = positive(key, value)?,
            "charge" => {
                self.charge = match value {
                    "paired" => ChargeConvention::Paired,
                    "strict" => ChargeConvention::Strict,
                    _ => return Err(bad(key, "expected `paired` or `strict`")),
                }
            }
            "trace-format" => {
                self.trace_format = match value {
                    "csv" => TraceFormat::Csv,
                    "json" => TraceFormat::Json,
                    "both" => TraceFormat::Both,
                    _ => return Err(bad(key, "expected `csv`, `json` or `both`")),
                }
            }
            other => return Err(bad(other, "unknown key")),
        }
        Ok(())
    }

    pub fn apply<'a, I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut cfg = Self::default();
        for (line, key, value) in parse_config_text(&text)? {
            cfg.set(&key, &value).map_err(|e| BenchError::Config {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    /// Every key with its canonical value, as stored alongside results.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("data", self.data.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        put("format", self.format.name().into());
        put("algo", self.algorithms.iter().map(|a| a.tag()).collect::<Vec<_>>().join(","));
        put("passes", self.passes.to_string());
        put("b-frac", self.b_frac.to_string());
        put("alpha", self.alpha.to_string());
        put("m0-frac", self.m0_frac.to_string());
        put("B0-frac", self.batch0_frac.to_string());
        put("eta-grid", format!("{}:{}", self.eta_grid.start(), self.eta_grid.end()));
        put("trim", self.trim.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        put(
            "objective",
            match self.objective {
                ObjectiveKind::Logistic => "logistic",
                ObjectiveKind::LeastSquares => "least-squares",
            }
            .into(),
        );
        put(
            "ridge",
            match self.ridge {
                Ridge::InverseN => "1/n".into(),
                Ridge::Fixed(w) => w.to_string(),
            },
        );
        put("optimum-passes", self.optimum_passes.to_string());
        put(
            "charge",
            match self.charge {
                ChargeConvention::Paired => "paired",
                ChargeConvention::Strict => "strict",
            }
            .into(),
        );
        put(
            "trace-format",
            match self.trace_format {
                TraceFormat::Csv => "csv",
                TraceFormat::Json => "json",
                TraceFormat::Both => "both",
            }
            .into(),
        );
        m
    }
}

/// Splits `key = value` lines. `#` starts a comment; blank lines are
/// ignored. Returns `(line number, key, value)`.
pub fn parse_config_text(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| BenchError::Config {
            line: i + 1,
            message: format!("expected key = value, got `{line}`"),
        })?;
        let k = k.trim().trim_start_matches("--");
        if !KEYS.contains(&k) {
            return Err(BenchError::Config {
                line: i + 1,
                message: format!("unknown key `{k}`"),
            });
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
