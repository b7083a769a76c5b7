use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fric::mc::BatteryConfig;
use fric_cli::config::{parse_checks, parse_focus, parse_variant};
use fric_cli::{
    run_afric, run_conf, run_fit, run_fric, run_mc_check, CliError, DataSpec, EnsembleSpec, FocusSpec,
    McCheckConfig, RunConfig, Scale, SortBy,
};

// Ignores write errors so that piping into `head` does not panic.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "fric", version, about = "Focused relative risk ranking of regression submodels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the wide model and print its coefficients.
    Fit(Common),
    /// Rank all submodels by FRIC for one focus vector.
    Fric(Common),
    /// Rank all submodels by AFRIC over a focus ensemble.
    Afric(Common),
    /// Rank all submodels by conf(S) and draw the confidence plots.
    Conf(Common),
    /// Run the Monte Carlo verification battery.
    McCheck(McArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: String,
    /// Comma-separated covariates; default is every other column.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
    /// Comma-separated covariates forced into every submodel.
    #[arg(long, value_delimiter = ',')]
    forced: Vec<String>,
    /// Focus covariate values, `name=value,...`.
    #[arg(long, conflicts_with = "ensemble")]
    focus: Option<String>,
    /// `equal`, `pred:<expr>` or `file:<path>`.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long, default_value_t = 0.80)]
    level: f64,
    /// `rr` or `rrr`.
    #[arg(long, default_value = "rr")]
    scale: String,
    /// `fric`, `conf` or `afric`.
    #[arg(long)]
    sort: Option<String>,
    /// Score variant: `u`, `t` or `median`.
    #[arg(long, default_value = "t")]
    variant: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 20_200_601)]
    seed: u64,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 20_200_601)]
    seed: u64,
    /// Replicates per coverage run.
    #[arg(long, default_value_t = 20_000)]
    replicates: usize,
    /// Replicates per mean check.
    #[arg(long, default_value_t = 100_000)]
    mean_replicates: usize,
    /// Check groups: coverage, unbiasedness, lemma2, overshoot or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    checks: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    inject_cdf_bias: f64,
}

impl Common {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let focus = match (self.focus, self.ensemble) {
            (Some(f), _) => Some(FocusSpec::Values(parse_focus(&f)?)),
            (None, Some(e)) => Some(FocusSpec::Ensemble(e.parse::<EnsembleSpec>()?)),
            (None, None) => None,
        };
        Ok(RunConfig {
            input: self.data,
            data: DataSpec { response: self.response, covariates: self.covariates, forced: self.forced },
            focus,
            variant: parse_variant(&self.variant)?,
            sort: self.sort.map(|s| s.parse::<SortBy>()).transpose()?,
            level: self.level,
            scale: self.scale.parse::<Scale>()?,
            out: self.out,
            seed: self.seed,
        })
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Fit(c) => {
            let res = run_fit(&c.into_config()?)?;
            for (j, name) in res.data.names().iter().enumerate() {
                say!("{name}\t{:.6}\t{:.6}", res.fit.beta_hat[j], res.std_errors[j]);
            }
            if let Some(curve) = res.rmse {
                say!("rmse_wide\t{:.6}", curve.rmse_hat);
            }
        }
        Command::Fric(c) => {
            let cfg = c.into_config()?;
            let res = run_fric(&cfg)?;
            print_rows(&res, &cfg);
        }
        Command::Conf(c) => {
            let cfg = c.into_config()?;
            let res = run_conf(&cfg)?;
            print_rows(&res, &cfg);
        }
        Command::Afric(c) => {
            let cfg = c.into_config()?;
            let res = run_afric(&cfg)?;
            for r in res.rows.iter().take(10) {
                say!(
                    "{}\t{:.4}\t{}",
                    fric_cli::output::mask_string(&r.subset),
                    cfg.scale.apply(r.afric_t),
                    r.conf.map_or("NA".into(), |c| format!("{c:.3}"))
                );
            }
            say!("wrote {} files to {}", res.files.len(), cfg.out.display());
        }
        Command::McCheck(a) => {
            let cfg = McCheckConfig {
                battery: BatteryConfig {
                    coverage_replicates: a.replicates,
                    mean_replicates: a.mean_replicates,
                    seed: a.seed,
                    cdf_bias: a.inject_cdf_bias,
                    selection: parse_checks(&a.checks)?,
                    ..BatteryConfig::default()
                },
                out: a.out,
            };
            let res = run_mc_check(&cfg)?;
            for c in &res.report.checks {
                say!(
                    "{}\t{}\tobserved {:.5}\tband [{:.5}, {:.5}]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.claim,
                    c.observed,
                    c.band.0,
                    c.band.1
                );
            }
            let failed = res.report.failures().count();
            say!("{} checks, {failed} failed", res.report.checks.len());
            return Ok(failed == 0);
        }
    }
    Ok(true)
}

fn print_rows(res: &fric_cli::FricOutput, cfg: &RunConfig) {
    say!("mask\tmu_hat\tfric\tconf");
    for r in res.rows.iter().take(10) {
        say!(
            "{}\t{:.3}\t{:.3}\t{}",
            fric_cli::output::mask_string(&r.subset),
            r.mu_hat,
            cfg.scale.apply(r.fric(cfg.variant)),
            r.conf.map_or("NA".into(), |c| format!("{c:.3}"))
        );
    }
    say!("wrote {} files to {}", res.files.len(), cfg.out.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
