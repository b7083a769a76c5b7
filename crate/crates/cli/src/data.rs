use std::path::Path;

use fric::Dataset;
use log::info;
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, Result};

/// Which columns of a CSV file make up the regression.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub response: String,
    /// Covariates in design order. `None` takes every other column in file order.
    pub covariates: Option<Vec<String>>,
    /// Covariates forced into every submodel, in addition to the intercept.
    pub forced: Vec<String>,
}

/// Reads a comma-separated file with a header row into a [`Dataset`] with an
/// intercept column prepended. Columns not named in `spec` are never parsed.
pub fn load_csv(path: &Path, spec: &DataSpec) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();

    let locate = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))
    };
    let response = locate(&spec.response)?;
    let covariates: Vec<String> = match &spec.covariates {
        Some(c) => c.clone(),
        None => header.iter().filter(|h| **h != spec.response).cloned().collect(),
    };
    if covariates.is_empty() {
        return Err(CliError::Config("no covariates selected".into()));
    }
    if covariates.iter().any(|c| *c == spec.response) {
        return Err(CliError::Config(format!("`{}` is both response and covariate", spec.response)));
    }
    let cols = covariates.iter().map(|c| locate(c)).collect::<Result<Vec<_>>>()?;
    for f in &spec.forced {
        if !covariates.contains(f) {
            return Err(CliError::Config(format!("forced column `{f}` is not a covariate")));
        }
    }

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        let cell = |j: usize| -> Result<f64> {
            let raw = record.get(j).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| CliError::Parse {
                row,
                column: header[j].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(CliError::NonNumeric { row, column: header[j].clone(), value: raw.to_string() });
            }
            Ok(v)
        };
        y.push(cell(response)?);
        for &j in &cols {
            x.push(cell(j)?);
        }
    }
    if y.is_empty() {
        return Err(CliError::EmptyData(path.to_path_buf()));
    }

    let n = y.len();
    let k = covariates.len();
    let cov = DMatrix::from_row_slice(n, k, &x);
    let mut forced = vec![true];
    forced.extend(covariates.iter().map(|c| spec.forced.contains(c)));
    let data = Dataset::with_intercept(cov, DVector::from_vec(y), covariates)?.with_forced(forced)?;
    info!(
        "loaded {}: n = {}, p = {} ({}), response `{}`",
        path.display(),
        data.n(),
        data.p(),
        data.names().join(", "),
        spec.response
    );
    Ok(data)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map(|p| p.record() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        kind => CliError::Csv { row, message: format!("{kind:?}") },
    }
}
