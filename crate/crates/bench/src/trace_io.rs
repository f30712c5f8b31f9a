//! Trace files: CSV for plotting, JSON with the full configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use scsg::RunTrace;
use serde::{Deserialize, Serialize};

use crate::accuracy::suboptimality_ratio;
use crate::error::{BenchError, Result};

pub const CSV_HEADER: [&str; 3] = ["effective_passes", "objective", "suboptimality_ratio"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub effective_passes: f64,
    pub objective: f64,
    pub suboptimality_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub algorithm: String,
    pub seed: u64,
    pub n: usize,
    pub f_star: f64,
    pub f0: f64,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<TraceRow>,
}

pub fn trace_rows(trace: &RunTrace, f_star: f64, f0: f64) -> Result<Vec<TraceRow>> {
    trace
        .samples()
        .iter()
        .map(|s| {
            Ok(TraceRow {
                effective_passes: trace.passes(s),
                objective: s.objective,
                suboptimality_ratio: suboptimality_ratio(s.objective, f_star, f0)?,
            })
        })
        .collect()
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_float(r.effective_passes),
            format_float(r.objective),
            format_float(r.suboptimality_ratio),
        ])?;
    }
    w.flush().map_err(|e| BenchError::io("<trace>", e))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| BenchError::io(path, e))
}

pub fn emit_trace_csv(trace: &RunTrace, f_star: f64, f0: f64, path: &Path) -> Result<()> {
    let rows = trace_rows(trace, f_star, f0)?;
    write_trace_csv(&rows, create(path)?)
}

/// JSON trace; `extra` is merged into the solver's own config snapshot.
pub fn emit_trace_json(
    trace: &RunTrace,
    f_star: f64,
    f0: f64,
    extra: &BTreeMap<String, String>,
    path: &Path,
) -> Result<()> {
    let mut config = extra.clone();
    config.extend(trace.config.iter().map(|(k, v)| (k.clone(), v.clone())));
    let doc = TraceDocument {
        algorithm: trace.algorithm.clone(),
        seed: trace.seed,
        n: trace.n,
        f_star,
        f0,
        config,
        rows: trace_rows(trace, f_star, f0)?,
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| BenchError::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?)
}
