//! Command-line front end for focused submodel ranking: CSV ingestion, run
//! configuration, ranked TSV tables, SVG plots and a key/value run report.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod plots;
pub mod report;
pub mod svg;

pub use commands::{
    run_afric, run_conf, run_fit, run_fric, run_mc_check, AfricOutput, FitOutput, FricOutput, McCheckConfig,
    McOutcome,
};
pub use config::{EnsembleSpec, FocusSpec, RunConfig, Scale, SortBy};
pub use data::{load_csv, DataSpec};
pub use error::{CliError, Result};
pub use report::{Record, Report};
