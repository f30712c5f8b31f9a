//! libsvm and CSV loaders.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use scsg::objectives::{FeatureMatrix, LeastSquares, MulticlassLogistic, RowData};
use scsg::FiniteSumProblem;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Libsvm,
    Csv,
}

impl FromStr for DataFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "libsvm" => Ok(DataFormat::Libsvm),
            "csv" => Ok(DataFormat::Csv),
            other => Err(BenchError::InvalidSetting {
                key: "format".into(),
                message: format!("expected `libsvm` or `csv`, got `{other}`"),
            }),
        }
    }
}

impl DataFormat {
    pub fn name(self) -> &'static str {
        match self {
            DataFormat::Libsvm => "libsvm",
            DataFormat::Csv => "csv",
        }
    }
}

/// A loaded dataset: one feature row and one numeric label per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub format: DataFormat,
    pub features: FeatureMatrix,
    /// Raw label column (class ids or regression targets).
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    /// Maps the sorted distinct label values to `1..=K`.
    pub fn class_labels(&self) -> Result<(Vec<u32>, u32)> {
        for (i, t) in self.targets.iter().enumerate() {
            if t.fract() != 0.0 {
                return Err(BenchError::InvalidSetting {
                    key: "labels".into(),
                    message: format!("row {i} has non-integer class label {t}"),
                });
            }
        }
        let mut distinct = self.targets.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let labels = self
            .targets
            .iter()
            .map(|t| distinct.partition_point(|d| d < t) as u32 + 1)
            .collect();
        Ok((labels, distinct.len() as u32))
    }

    pub fn classes(&self) -> Result<u32> {
        self.class_labels().map(|(_, k)| k)
    }

    pub fn logistic(&self) -> Result<MulticlassLogistic> {
        let (labels, k) = self.class_labels()?;
        Ok(MulticlassLogistic::new(self.features.clone(), labels, k)?)
    }

    pub fn least_squares(&self) -> Result<LeastSquares> {
        Ok(LeastSquares::new(self.features.clone(), self.targets.clone())?)
    }

    /// Multiclass logistic loss with the ridge term `weight·‖x‖²` folded
    /// into every component.
    pub fn logistic_problem(&self, ridge: f64) -> Result<FiniteSumProblem> {
        Ok(FiniteSumProblem::new(Arc::new(self.logistic()?))?.with_ridge(ridge)?)
    }

    pub fn least_squares_problem(&self, ridge: f64) -> Result<FiniteSumProblem> {
        Ok(FiniteSumProblem::new(Arc::new(self.least_squares()?))?.with_ridge(ridge)?)
    }
}

impl RowData for Dataset {
    fn num_rows(&self) -> usize {
        self.n()
    }

    fn row_sq_norm(&self, i: usize) -> f64 {
        self.features.row_sq_norm(i)
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        Dataset {
            format: self.format,
            features: self.features.select_rows(rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    let name = path.display().to_string();
    match format {
        DataFormat::Libsvm => parse_libsvm(BufReader::new(file), &name),
        DataFormat::Csv => parse_csv(file, &name),
    }
}

fn parse_error(source: &str, line: u64, message: impl Into<String>) -> BenchError {
    BenchError::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_number(source: &str, line: u64, what: &str, token: &str) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_error(source, line, format!("invalid {what} `{token}`"))),
    }
}

/// Parses `label index:value ...` lines with 1-based, distinct indices.
/// Blank lines and `#` comments are skipped. The feature count is the
/// largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R, source: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut targets = Vec::new();
    let mut cols = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno as u64 + 1;
        let line = line.map_err(|e| parse_error(source, lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = parse_number(source, lineno, "label", tokens.next().unwrap())?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(source, lineno, format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(source, lineno, format!("invalid feature index `{idx}`")))?;
            if idx == 0 {
                return Err(parse_error(source, lineno, "feature indices are 1-based; found index 0"));
            }
            let val = parse_number(source, lineno, "feature value", val)?;
            if row.iter().any(|(j, _)| *j == idx - 1) {
                return Err(parse_error(source, lineno, format!("duplicate feature index {idx}")));
            }
            cols = cols.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        targets.push(label);
    }
    if rows.is_empty() {
        return Err(BenchError::EmptyDataset(source.to_string()));
    }
    Ok(Dataset {
        format: DataFormat::Libsvm,
        features: FeatureMatrix::from_sparse_rows(cols, &rows)?,
        targets,
    })
}

/// Parses comma-separated rows whose last column is the label. A first
/// row that is not entirely numeric is treated as a header.
pub fn parse_csv<R: Read>(reader: R, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets = Vec::new();
    let mut width: Option<usize> = None;
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if k == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            width = Some(record.len());
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_error(source, line, format!("expected {w} columns, found {}", record.len())));
        }
        if w < 2 {
            return Err(parse_error(source, line, "need at least one feature column and a label column"));
        }
        let mut values = record
            .iter()
            .map(|f| parse_number(source, line, "value", f))
            .collect::<Result<Vec<f64>>>()?;
        targets.push(values.pop().unwrap());
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(BenchError::EmptyDataset(source.to_string()));
    }
    Ok(Dataset {
        format: DataFormat::Csv,
        features: FeatureMatrix::from_dense(&rows)?,
        targets,
    })
}

/// Writes `data` in libsvm format, feature values with 17 significant
/// digits so that a reload is bit-identical.
pub fn write_libsvm<W: std::io::Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    for i in 0..data.n() {
        write!(out, "{}", data.targets[i])?;
        let (idx, val) = data.features.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(out, " {}:{:.16e}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
