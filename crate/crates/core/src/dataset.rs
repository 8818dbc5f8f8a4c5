//! Regression samples `(Y_t, I_t)` with per-dimension covariate kinds.
//!
//! Covariates are stored row-major as an `n x d` matrix. A trend dimension is
//! materialized as the column `t/n`, so downstream code never needs to know
//! where a covariate came from.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when validating a materialized trend column read from text.
const TREND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimKind {
    /// Nonnegative integer levels (e.g. a lagged count).
    Discrete,
    Continuous,
    /// The deterministic covariate `t/n`.
    Trend,
}

impl DimKind {
    pub fn letter(self) -> char {
        match self {
            DimKind::Discrete => 'd',
            DimKind::Continuous => 'c',
            DimKind::Trend => 't',
        }
    }

    /// Continuous and trend dimensions are smoothed over; discrete ones are not.
    pub fn is_smoothed(self) -> bool {
        !matches!(self, DimKind::Discrete)
    }
}

impl fmt::Display for DimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for DimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" | "discrete" => Ok(DimKind::Discrete),
            "c" | "continuous" => Ok(DimKind::Continuous),
            "t" | "trend" => Ok(DimKind::Trend),
            other => Err(Error::InvalidArgument(format!(
                "unknown dimension kind `{other}` (expected d, c or t)"
            ))),
        }
    }
}

/// Parses a comma-separated kind list such as `d,c,t`.
pub fn parse_kinds(s: &str) -> Result<Vec<DimKind>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(DimKind::from_str)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    responses: Vec<f64>,
    covariates: Vec<f64>,
    kinds: Vec<DimKind>,
    names: Vec<String>,
    response_name: String,
}

impl Dataset {
    /// Builds and validates a dataset. `covariates` is row-major with `kinds.len()` columns.
    pub fn new(responses: Vec<f64>, covariates: Vec<f64>, kinds: Vec<DimKind>) -> Result<Self> {
        let names = (1..=kinds.len()).map(|j| format!("x{j}")).collect();
        Self::with_names(responses, covariates, kinds, names, "y".to_string())
    }

    pub fn with_names(
        responses: Vec<f64>,
        covariates: Vec<f64>,
        kinds: Vec<DimKind>,
        names: Vec<String>,
        response_name: String,
    ) -> Result<Self> {
        let n = responses.len();
        let d = kinds.len();
        if n == 0 {
            return Err(Error::EmptyDataset("no observations".into()));
        }
        if d == 0 {
            return Err(Error::Validation(
                "at least one covariate is required".into(),
            ));
        }
        if names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: names.len(),
            });
        }
        if covariates.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: covariates.len(),
            });
        }
        if kinds.iter().filter(|k| **k == DimKind::Trend).count() > 1 {
            return Err(Error::Validation(
                "at most one trend dimension is allowed".into(),
            ));
        }
        if let Some(t) = responses.iter().position(|y| !y.is_finite()) {
            return Err(Error::Validation(format!(
                "response at row {} is not finite",
                t + 1
            )));
        }
        for t in 0..n {
            for j in 0..d {
                let v = covariates[t * d + j];
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "covariate `{}` at row {} is not finite",
                        names[j],
                        t + 1
                    )));
                }
                match kinds[j] {
                    DimKind::Discrete if v < 0.0 || v.fract() != 0.0 => {
                        return Err(Error::Validation(format!(
                            "discrete covariate `{}` has non-integer or negative value {v} at row {}",
                            names[j],
                            t + 1
                        )));
                    }
                    DimKind::Trend => {
                        let expected = (t + 1) as f64 / n as f64;
                        if (v - expected).abs() > TREND_TOL * expected.max(1.0) {
                            return Err(Error::Validation(format!(
                                "trend covariate `{}` must equal t/n; row {} has {v}, expected {expected}",
                                names[j],
                                t + 1
                            )));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            responses,
            covariates,
            kinds,
            names,
            response_name,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn d(&self) -> usize {
        self.kinds.len()
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn kinds(&self) -> &[DimKind] {
        &self.kinds
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let d = self.d();
        &self.covariates[t * d..(t + 1) * d]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let d = self.d();
        (0..self.n()).map(move |t| self.covariates[t * d + j])
    }

    /// Number of discrete dimensions (`d_1`).
    pub fn d_discrete(&self) -> usize {
        self.kinds.iter().filter(|k| !k.is_smoothed()).count()
    }

    /// Number of continuous plus trend dimensions (`d_2`).
    pub fn d_continuous(&self) -> usize {
        self.kinds.iter().filter(|k| k.is_smoothed()).count()
    }

    /// Same covariates with responses replaced.
    pub fn with_responses(&self, responses: Vec<f64>) -> Result<Self> {
        Self::with_names(
            responses,
            self.covariates.clone(),
            self.kinds.clone(),
            self.names.clone(),
            self.response_name.clone(),
        )
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec![self.response_name.clone()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for t in 0..self.n() {
            let mut rec = vec![fmt_f64(self.responses[t])];
            rec.extend(self.row(t).iter().map(|v| fmt_f64(*v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Column roles for CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub response: String,
    /// Explicit covariate columns; `None` means every non-response column in file order.
    pub covariates: Option<Vec<String>>,
    pub kinds: Vec<DimKind>,
}

impl CsvSchema {
    pub fn new(response: impl Into<String>, kinds: Vec<DimKind>) -> Self {
        Self {
            response: response.into(),
            covariates: None,
            kinds,
        }
    }
}

/// Reads a comma-separated file with one header row. Rows keep file order.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let y_col = find(&schema.response)?;
    let cov_names: Vec<String> = match &schema.covariates {
        Some(names) => names.clone(),
        None => header
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != y_col)
            .map(|(_, h)| h.clone())
            .collect(),
    };
    if cov_names.is_empty() {
        return Err(Error::Schema("no covariate columns".into()));
    }
    if cov_names.len() != schema.kinds.len() {
        return Err(Error::Schema(format!(
            "{} covariate column(s) but {} kind(s) declared",
            cov_names.len(),
            schema.kinds.len()
        )));
    }
    let cov_cols = cov_names
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let mut responses = Vec::new();
    let mut covariates = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |col: usize| -> Result<f64> {
            let raw = rec.get(col).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: header[col].clone(),
                value: raw.to_string(),
            })
        };
        responses.push(cell(y_col)?);
        for &c in &cov_cols {
            covariates.push(cell(c)?);
        }
    }
    Dataset::with_names(
        responses,
        covariates,
        schema.kinds.clone(),
        cov_names,
        schema.response.clone(),
    )
}

/// Builds the autoregressive design `I_t = (Y_{t-1}, ..., Y_{t-lags}, t/n)`.
///
/// Row `t` (0-based) has response `series[t + lags]` and covariate `j` (1-based)
/// equal to `series[t + lags - j]`. Lag columns are tagged discrete when the
/// series consists of nonnegative integers and continuous otherwise.
pub fn lag_embed(series: &[f64], lags: usize, with_trend: bool) -> Result<Dataset> {
    if lags == 0 {
        return Err(Error::InvalidArgument("lags must be at least 1".into()));
    }
    if series.len() <= lags {
        return Err(Error::EmptyDataset(format!(
            "series of length {} leaves no rows after {lags} lag(s)",
            series.len()
        )));
    }
    let n = series.len() - lags;
    let lag_kind = if series.iter().all(|v| *v >= 0.0 && v.fract() == 0.0) {
        DimKind::Discrete
    } else {
        DimKind::Continuous
    };
    let d = lags + usize::from(with_trend);
    let mut covariates = Vec::with_capacity(n * d);
    let mut responses = Vec::with_capacity(n);
    for t in 0..n {
        responses.push(series[t + lags]);
        for j in 1..=lags {
            covariates.push(series[t + lags - j]);
        }
        if with_trend {
            covariates.push((t + 1) as f64 / n as f64);
        }
    }
    let mut kinds = vec![lag_kind; lags];
    let mut names: Vec<String> = (1..=lags).map(|j| format!("lag{j}")).collect();
    if with_trend {
        kinds.push(DimKind::Trend);
        names.push("trend".into());
    }
    Dataset::with_names(responses, covariates, kinds, names, "y".into())
}
