use std::path::{Path, PathBuf};
use std::str::FromStr;

use fric::mc::BatterySelection;
use fric::{Dataset, FocusEnsemble, FocusVector, FricVariant};
use nalgebra::DVector;

use crate::data::DataSpec;
use crate::error::{CliError, Result};

/// Score scale of the tables and plots. Confidence values do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Rr,
    /// Square root of the relative risk.
    Rrr,
}

impl Scale {
    pub fn apply(self, rr: f64) -> f64 {
        match self {
            Scale::Rr => rr,
            Scale::Rrr => rr.max(0.0).sqrt(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scale::Rr => "rr",
            Scale::Rrr => "rrr",
        }
    }
}

impl FromStr for Scale {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rr" => Ok(Scale::Rr),
            "rrr" => Ok(Scale::Rrr),
            _ => Err(CliError::Config(format!("unknown scale `{s}` (expected rr or rrr)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortBy {
    Fric,
    Conf,
    Afric,
}

impl SortBy {
    pub fn label(self) -> &'static str {
        match self {
            SortBy::Fric => "fric",
            SortBy::Conf => "conf",
            SortBy::Afric => "afric",
        }
    }
}

impl FromStr for SortBy {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fric" => Ok(SortBy::Fric),
            "conf" => Ok(SortBy::Conf),
            "afric" => Ok(SortBy::Afric),
            _ => Err(CliError::Config(format!("unknown sort key `{s}` (expected fric, conf or afric)"))),
        }
    }
}

pub fn parse_variant(s: &str) -> Result<FricVariant> {
    match s {
        "u" | "unbiased" => Ok(FricVariant::Unbiased),
        "t" | "truncated" => Ok(FricVariant::Truncated),
        "median" | "0.50" | "0.5" => Ok(FricVariant::Median),
        _ => Err(CliError::Config(format!("unknown variant `{s}` (expected u, t or median)"))),
    }
}

pub fn variant_label(v: FricVariant) -> &'static str {
    match v {
        FricVariant::Unbiased => "u",
        FricVariant::Truncated => "t",
        FricVariant::Median => "median",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

/// Conjunction of `column op number` comparisons, e.g. `age<20&smoke==1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub clauses: Vec<(String, CmpOp, f64)>,
}

impl FromStr for Predicate {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| CliError::Config(format!("predicate `{s}`: {msg}"));
        let mut clauses = Vec::new();
        for part in s.split(['&', ',']).map(str::trim).filter(|p| !p.is_empty()) {
            let at = part.find(['<', '>', '=', '!']).ok_or_else(|| bad("missing comparison"))?;
            let (name, rest) = part.split_at(at);
            let (op, value) = [
                ("<=", CmpOp::Le),
                (">=", CmpOp::Ge),
                ("==", CmpOp::Eq),
                ("!=", CmpOp::Ne),
                ("<", CmpOp::Lt),
                (">", CmpOp::Gt),
                ("=", CmpOp::Eq),
            ]
            .iter()
            .find_map(|(tok, op)| rest.strip_prefix(tok).map(|v| (*op, v)))
            .ok_or_else(|| bad("unknown operator"))?;
            let value: f64 = value.trim().parse().map_err(|_| bad("right-hand side is not a number"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(bad("missing column name"));
            }
            clauses.push((name.to_string(), op, value));
        }
        if clauses.is_empty() {
            return Err(bad("empty"));
        }
        Ok(Predicate { clauses })
    }
}

impl Predicate {
    /// Resolves column names against the design and returns a row filter.
    pub fn compile<'a>(&self, data: &'a Dataset) -> Result<impl Fn(usize) -> bool + 'a> {
        let clauses = self
            .clauses
            .iter()
            .map(|(name, op, v)| {
                data.column_index(name)
                    .map(|j| (j, *op, *v))
                    .ok_or_else(|| CliError::MissingColumn(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(move |i: usize| {
            clauses.iter().all(|&(j, op, v)| {
                let x = data.x()[(i, j)];
                match op {
                    CmpOp::Lt => x < v,
                    CmpOp::Le => x <= v,
                    CmpOp::Gt => x > v,
                    CmpOp::Ge => x >= v,
                    CmpOp::Eq => x == v,
                    CmpOp::Ne => x != v,
                }
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Equal,
    Predicate(Predicate),
    /// CSV with one column per covariate and an optional `weight` column.
    File(PathBuf),
}

impl FromStr for EnsembleSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "equal" {
            Ok(EnsembleSpec::Equal)
        } else if let Some(expr) = s.strip_prefix("pred:") {
            Ok(EnsembleSpec::Predicate(expr.parse()?))
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(EnsembleSpec::File(PathBuf::from(path)))
        } else {
            Err(CliError::Config(format!("unknown ensemble `{s}` (expected equal, pred:<expr> or file:<path>)")))
        }
    }
}

impl EnsembleSpec {
    pub fn build(&self, data: &Dataset) -> Result<FocusEnsemble> {
        match self {
            EnsembleSpec::Equal => Ok(FocusEnsemble::all_rows_equal(data)),
            EnsembleSpec::Predicate(p) => Ok(FocusEnsemble::stratum(data, p.compile(data)?)?),
            EnsembleSpec::File(path) => read_ensemble_file(path, data),
        }
    }
}

fn read_ensemble_file(path: &Path, data: &Dataset) -> Result<FocusEnsemble> {
    let covariates = &data.names()[1..];
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .clone();
    let index = |name: &str| header.iter().position(|h| h == name);
    let cols = covariates
        .iter()
        .map(|c| index(c).ok_or_else(|| CliError::MissingColumn(c.clone())))
        .collect::<Result<Vec<_>>>()?;
    let weight = index("weight");

    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Csv { row, message: e.to_string() })?;
        let cell = |j: usize| -> Result<f64> {
            let raw = record.get(j).unwrap_or("");
            raw.parse().map_err(|_| CliError::Parse {
                row,
                column: header[j].to_string(),
                value: raw.to_string(),
            })
        };
        let mut x = vec![1.0];
        for &j in &cols {
            x.push(cell(j)?);
        }
        let w = match weight {
            Some(j) => cell(j)?,
            None => 1.0,
        };
        points.push((DVector::from_vec(x), w));
    }
    if points.is_empty() {
        return Err(CliError::EmptyData(path.to_path_buf()));
    }
    Ok(FocusEnsemble::explicit(points)?)
}

/// Battery parts by name: `coverage`, `unbiasedness`, `lemma2`, `overshoot`.
pub fn parse_checks(names: &[String]) -> Result<BatterySelection> {
    let mut sel = BatterySelection { coverage: false, unbiasedness: false, lemma2: false, overshoot: false };
    for name in names {
        match name.trim() {
            "coverage" => sel.coverage = true,
            "unbiasedness" => sel.unbiasedness = true,
            "lemma2" => sel.lemma2 = true,
            "overshoot" => sel.overshoot = true,
            "all" => sel = BatterySelection::default(),
            other => return Err(CliError::Config(format!("unknown check group `{other}`"))),
        }
    }
    Ok(sel)
}

/// Parses `name=value,name=value,...`.
pub fn parse_focus(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("focus entry `{pair}` is not name=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("focus value `{v}` for `{k}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Builds `x0` in design order: intercept 1, then one value per covariate.
pub fn focus_vector(data: &Dataset, values: &[(String, f64)]) -> Result<FocusVector> {
    let mut x = vec![f64::NAN; data.p()];
    x[0] = 1.0;
    for (name, v) in values {
        let j = match data.column_index(name) {
            Some(0) | None => return Err(CliError::Config(format!("`{name}` is not a covariate"))),
            Some(j) => j,
        };
        if !x[j].is_nan() {
            return Err(CliError::Config(format!("focus value for `{name}` given twice")));
        }
        x[j] = *v;
    }
    if let Some(j) = x.iter().position(|v| v.is_nan()) {
        return Err(CliError::Config(format!("focus value missing for `{}`", data.names()[j])));
    }
    Ok(FocusVector::new(x, data.p())?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FocusSpec {
    Values(Vec<(String, f64)>),
    Ensemble(EnsembleSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub data: DataSpec,
    pub focus: Option<FocusSpec>,
    pub variant: FricVariant,
    pub sort: Option<SortBy>,
    pub level: f64,
    pub scale: Scale,
    pub out: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, response: &str, out: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            data: DataSpec { response: response.to_string(), covariates: None, forced: vec![] },
            focus: None,
            variant: FricVariant::Truncated,
            sort: None,
            level: 0.80,
            scale: Scale::Rr,
            out: out.into(),
            seed: 20_200_601,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Config(format!("level {} is not in (0, 1)", self.level)));
        }
        Ok(())
    }

    pub fn focus_values(&self) -> Result<&[(String, f64)]> {
        match &self.focus {
            Some(FocusSpec::Values(v)) => Ok(v),
            _ => Err(CliError::Config("this command needs --focus name=value,...".into())),
        }
    }

    pub fn ensemble(&self) -> Result<&EnsembleSpec> {
        match &self.focus {
            Some(FocusSpec::Ensemble(e)) => Ok(e),
            _ => Err(CliError::Config("this command needs --ensemble".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_parsing() {
        let p: Predicate = "age<20 & smoke==1".parse().unwrap();
        assert_eq!(p.clauses, vec![("age".into(), CmpOp::Lt, 20.0), ("smoke".into(), CmpOp::Eq, 1.0)]);
        let p: Predicate = "lwt>=50.5".parse().unwrap();
        assert_eq!(p.clauses, vec![("lwt".into(), CmpOp::Ge, 50.5)]);
        assert!("age".parse::<Predicate>().is_err());
        assert!("<3".parse::<Predicate>().is_err());
        assert!("age<x".parse::<Predicate>().is_err());
    }

    #[test]
    fn ensemble_spec_parsing() {
        assert_eq!("equal".parse::<EnsembleSpec>().unwrap(), EnsembleSpec::Equal);
        assert!(matches!("pred:age<20".parse::<EnsembleSpec>().unwrap(), EnsembleSpec::Predicate(_)));
        assert_eq!("file:a.csv".parse::<EnsembleSpec>().unwrap(), EnsembleSpec::File("a.csv".into()));
        assert!("rows".parse::<EnsembleSpec>().is_err());
    }

    #[test]
    fn focus_parsing() {
        let f = parse_focus("age=40, lwt=60").unwrap();
        assert_eq!(f, vec![("age".into(), 40.0), ("lwt".into(), 60.0)]);
        assert!(parse_focus("age").is_err());
        assert!(parse_focus("age=x").is_err());
    }

    #[test]
    fn check_groups() {
        let sel = parse_checks(&["coverage".into(), "lemma2".into()]).unwrap();
        assert!(sel.coverage && sel.lemma2 && !sel.unbiasedness && !sel.overshoot);
        assert_eq!(parse_checks(&["all".into()]).unwrap(), BatterySelection::default());
        assert!(parse_checks(&["speed".into()]).is_err());
    }

    #[test]
    fn scale_transform() {
        assert_eq!(Scale::Rr.apply(0.25), 0.25);
        assert_eq!(Scale::Rrr.apply(0.25), 0.5);
        assert_eq!(Scale::Rrr.apply(-0.1), 0.0);
    }
}
