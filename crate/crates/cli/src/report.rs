//! Machine-readable run report.
//!
//! The first line is the schema header `#fric-report <version>`. Every
//! following line is one record: a kind, then tab-separated `key=value`
//! fields. Floats are written in Rust's shortest round-trip form, so parsing
//! a value gives back the same bits. Tabs, newlines and backslashes inside
//! values are backslash-escaped.
//!
//! Record kinds:
//!
//! | kind     | fields |
//! |----------|--------|
//! | `run`    | `command`, `input`, `n`, `p`, `m`, `level`, `scale`, `variant`, `sort` |
//! | `column` | `index`, `name`, `forced` |
//! | `focus`  | `name`, `value` |
//! | `wide`   | `beta.<name>`, `sigma2_hat`, `mu_hat`, `rmse_hat`, `rmse_lo`, `rmse_hi` |
//! | `row`    | `rank`, `mask`, `key`, `mu_hat`, `mu_lo`, `mu_hi`, `fric_u`, `fric_t`, `fric_median`, `conf`, `rr_min`, `kappa_hat`, `rr_lo`, `rr_hi` |
//! | `arow`   | `rank`, `mask`, `key`, `afric_u`, `afric_t`, `afric_median`, `conf`, `gamma_tilde`, `rr_min`, `rr_lo`, `rr_hi` |
//! | `check`  | `claim`, `observed`, `expected`, `lo`, `hi`, `pass` |
//! | `summary`| `checks`, `failures`, `pass` |
//!
//! Scores and risks in `row` and `arow` are always on the rr scale. Optional
//! values are written as the empty string.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
const HEADER: &str = "#fric-report";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self { kind: kind.to_string(), fields: Vec::new() }
    }

    pub fn str(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.str(key, format!("{value:?}"))
    }

    pub fn opt(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.num(key, v),
            None => self.str(key, ""),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{HEADER} {SCHEMA_VERSION}\n");
        for r in &self.records {
            out.push_str(&escape(&r.kind));
            for (k, v) in &r.fields {
                let _ = write!(out, "\t{}={}", escape(k), escape(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let version = header
            .strip_prefix(HEADER)
            .map(str::trim)
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| CliError::Config(format!("not a report: header {header:?}")))?;
        if version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported report schema version {version}")));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split('\t');
            let kind = unescape(parts.next().unwrap_or(""));
            let fields = parts
                .map(|f| {
                    f.split_once('=')
                        .map(|(k, v)| (unescape(k), unescape(v)))
                        .ok_or_else(|| CliError::Config(format!("report line {}: field {f:?} lacks '='", i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(Record { kind, fields });
        }
        Ok(Self { records })
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '=' => out.push_str("\\e"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('e') => out.push('='),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}
