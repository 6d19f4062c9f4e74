//! Tabular data ingestion and standardization.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A response vector together with its covariate matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    response: DVector<f64>,
    covariates: DMatrix<f64>,
    response_name: String,
    covariate_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        response: DVector<f64>,
        covariates: DMatrix<f64>,
        response_name: impl Into<String>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let n = response.len();
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, found: n });
        }
        if covariates.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: covariates.nrows() });
        }
        if covariates.ncols() == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one covariate".into()));
        }
        if covariate_names.len() != covariates.ncols() {
            return Err(Error::DimensionMismatch {
                expected: covariates.ncols(),
                found: covariate_names.len(),
            });
        }
        if response.iter().chain(covariates.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        Ok(Dataset { response, covariates, response_name: response_name.into(), covariate_names })
    }

    /// Builds a dataset with generated column names `x1..xp`.
    pub fn from_matrix(response: DVector<f64>, covariates: DMatrix<f64>) -> Result<Self> {
        let names = (1..=covariates.ncols()).map(|j| format!("x{j}")).collect();
        Dataset::new(response, covariates, "y", names)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.covariates
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Replaces the covariates, keeping the response.
    pub fn with_covariates(&self, covariates: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        Dataset::new(self.response.clone(), covariates, self.response_name.clone(), names)
    }
}

/// Selects a CSV column by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ColumnSelector::Index(i) if *i < headers.len() => Ok(*i),
            ColumnSelector::Index(i) => Err(Error::UnknownColumn(i.to_string())),
            ColumnSelector::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::UnknownColumn(name.clone())),
        }
    }
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub response: ColumnSelector,
    /// Columns ignored entirely (neither response nor covariate).
    pub drop: Vec<ColumnSelector>,
}

impl CsvOptions {
    pub fn new(response: ColumnSelector) -> Self {
        CsvOptions { response, drop: Vec::new() }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "na" | "NaN" | "nan" | "null" | "NULL")
}

/// Reads a headed CSV table; every column except the response and dropped
/// columns becomes a covariate.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let response_col = opts.response.resolve(&headers)?;
    let mut dropped = vec![false; headers.len()];
    for sel in &opts.drop {
        dropped[sel.resolve(&headers)?] = true;
    }
    let cov_cols: Vec<usize> =
        (0..headers.len()).filter(|&j| j != response_col && !dropped[j]).collect();

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::DimensionMismatch { expected: headers.len(), found: record.len() });
        }
        let parse = |col: usize| -> Result<f64> {
            let field = &record[col];
            if is_missing(field) {
                return Err(Error::MissingValue { row: row + 1, column: headers[col].clone() });
            }
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                row: row + 1,
                column: headers[col].clone(),
                value: field.to_string(),
            })
        };
        y.push(parse(response_col)?);
        for &j in &cov_cols {
            x.push(parse(j)?);
        }
    }
    let n = y.len();
    let covariates = DMatrix::from_row_slice(n, cov_cols.len(), &x);
    let names = cov_cols.iter().map(|&j| headers[j].clone()).collect();
    Dataset::new(DVector::from_vec(y), covariates, headers[response_col].clone(), names)
}

pub fn read_csv_path(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file), opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Sample variance one, divisor n − 1.
    #[default]
    UnitVariance,
    /// Centered sum of squares one.
    UnitSumOfSquares,
}

/// Centering and scaling applied to a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub y_mean: f64,
    pub y_scale: f64,
    pub x_means: Vec<f64>,
    pub x_scales: Vec<f64>,
    pub mode: ScaleMode,
    pub y_scaled: bool,
}

impl Standardization {
    /// The do-nothing standardization for data that is already on the model scale.
    pub fn identity(p: usize) -> Self {
        Standardization {
            y_mean: 0.0,
            y_scale: 1.0,
            x_means: vec![0.0; p],
            x_scales: vec![1.0; p],
            mode: ScaleMode::UnitVariance,
            y_scaled: false,
        }
    }

    pub fn p(&self) -> usize {
        self.x_means.len()
    }

    /// Maps a covariate row from the original scale to the standardized scale.
    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: x.len() });
        }
        Ok(x.iter()
            .zip(self.x_means.iter().zip(&self.x_scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    /// Maps a standardized-scale prediction back to the response scale.
    pub fn untransform_response(&self, y: f64) -> f64 {
        self.y_mean + self.y_scale * y
    }

    /// Maps standardized slopes to an intercept followed by original-scale slopes.
    pub fn back_transform(&self, beta: &[f64]) -> Result<Vec<f64>> {
        back_transform(beta, self)
    }

    /// Inverse of [`back_transform`]: original-scale slopes to standardized slopes.
    pub fn forward_transform(&self, slopes: &[f64]) -> Result<Vec<f64>> {
        if slopes.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: slopes.len() });
        }
        Ok(slopes.iter().zip(&self.x_scales).map(|(b, s)| b * s / self.y_scale).collect())
    }
}

fn column_scale(values: impl Iterator<Item = f64>, mean: f64, n: usize, mode: ScaleMode) -> f64 {
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    match mode {
        ScaleMode::UnitVariance => (ss / (n as f64 - 1.0)).sqrt(),
        ScaleMode::UnitSumOfSquares => ss.sqrt(),
    }
}

fn is_zero_scale(scale: f64, mean: f64) -> bool {
    !(scale > 1e-13 * mean.abs()) || scale == 0.0
}

/// Centers and scales the covariates (and optionally the response).
pub fn standardize(
    dataset: &Dataset,
    mode: ScaleMode,
    scale_y: bool,
) -> Result<(DMatrix<f64>, DVector<f64>, Standardization)> {
    let n = dataset.n();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    let mut x = dataset.covariates().clone();
    let p = x.ncols();
    let mut x_means = Vec::with_capacity(p);
    let mut x_scales = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = x.column_mut(j);
        let mean = col.mean();
        let scale = column_scale(col.iter().copied(), mean, n, mode);
        if is_zero_scale(scale, mean) {
            return Err(Error::ConstantColumn(j));
        }
        col.apply(|v| *v = (*v - mean) / scale);
        x_means.push(mean);
        x_scales.push(scale);
    }

    let mut y = dataset.response().clone();
    let y_mean = y.mean();
    let y_scale = if scale_y {
        let s = column_scale(y.iter().copied(), y_mean, n, ScaleMode::UnitVariance);
        if is_zero_scale(s, y_mean) {
            return Err(Error::ConstantResponse);
        }
        s
    } else {
        1.0
    };
    y.apply(|v| *v = (*v - y_mean) / y_scale);

    let standardization =
        Standardization { y_mean, y_scale, x_means, x_scales, mode, y_scaled: scale_y };
    Ok((x, y, standardization))
}

/// Converts standardized coefficients into `[intercept, slope_1, …, slope_p]`
/// on the original data scale.
pub fn back_transform(beta: &[f64], s: &Standardization) -> Result<Vec<f64>> {
    if beta.len() != s.p() {
        return Err(Error::DimensionMismatch { expected: s.p(), found: beta.len() });
    }
    let slopes: Vec<f64> = beta.iter().zip(&s.x_scales).map(|(b, sc)| s.y_scale * b / sc).collect();
    let intercept = s.y_mean - slopes.iter().zip(&s.x_means).map(|(b, m)| b * m).sum::<f64>();
    let mut out = Vec::with_capacity(beta.len() + 1);
    out.push(intercept);
    out.extend(slopes);
    Ok(out)
}
