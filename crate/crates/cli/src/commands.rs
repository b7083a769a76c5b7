use std::path::PathBuf;

use fric::focus::{rmse_wide_curve, RmseCurve, SortKey, TableOptions};
use fric::mc::{run_battery, BatteryConfig, BatteryReport, MIN_REPLICATES};
use fric::{
    afric_table, enumerate_subsets, fit_wide, score_table, AfricRow, Dataset, FocusVector, FricVariant, ScoreRow,
    WideFit,
};
use log::info;

use crate::config::{focus_vector, variant_label, RunConfig, SortBy};
use crate::data::load_csv;
use crate::error::{CliError, Result};
use crate::output::{afric_tsv, coefficient_tsv, fric_tsv, mask_string, Outputs};
use crate::plots;
use crate::report::{Record, Report};

pub struct FitOutput {
    pub data: Dataset,
    pub fit: WideFit,
    pub std_errors: Vec<f64>,
    pub rmse: Option<RmseCurve>,
    pub files: Vec<PathBuf>,
}

pub struct FricOutput {
    pub data: Dataset,
    pub fit: WideFit,
    pub x0: FocusVector,
    pub rows: Vec<ScoreRow>,
    pub rmse: RmseCurve,
    pub files: Vec<PathBuf>,
}

pub struct AfricOutput {
    pub data: Dataset,
    pub fit: WideFit,
    pub rows: Vec<AfricRow>,
    pub files: Vec<PathBuf>,
}

pub struct McCheckConfig {
    pub battery: BatteryConfig,
    pub out: Option<PathBuf>,
}

pub struct McOutcome {
    pub report: BatteryReport,
    pub files: Vec<PathBuf>,
}

fn load(cfg: &RunConfig) -> Result<(Dataset, WideFit)> {
    cfg.validate()?;
    let data = load_csv(&cfg.input, &cfg.data)?;
    let fit = fit_wide(&data)?;
    Ok((data, fit))
}

fn run_record(command: &str, cfg: &RunConfig, data: &Dataset, fit: &WideFit) -> Record {
    Record::new("run")
        .str("command", command)
        .str("input", cfg.input.display())
        .str("n", data.n())
        .str("p", data.p())
        .str("m", fit.m)
        .num("level", cfg.level)
        .str("scale", cfg.scale.label())
        .str("variant", variant_label(cfg.variant))
        .str("sort", cfg.sort.map_or("default", SortBy::label))
}

fn header_records(report: &mut Report, data: &Dataset, fit: &WideFit, x0: Option<&FocusVector>, level: f64) {
    for (j, name) in data.names().iter().enumerate() {
        report.push(Record::new("column").str("index", j).str("name", name).str("forced", data.forced()[j]));
    }
    let mut wide = Record::new("wide");
    for (j, name) in data.names().iter().enumerate() {
        wide = wide.num(&format!("beta.{name}"), fit.beta_hat[j]);
    }
    wide = wide.num("sigma2_hat", fit.sigma2_hat);
    if let Some(x0) = x0 {
        for (j, name) in data.names().iter().enumerate() {
            report.push(Record::new("focus").str("name", name).num("value", x0.as_vector()[j]));
        }
        let curve = rmse_wide_curve(fit, x0);
        let (lo, hi) = curve.interval(level);
        wide = wide
            .num("mu_hat", x0.as_vector().dot(&fit.beta_hat))
            .num("rmse_hat", curve.rmse_hat)
            .num("rmse_lo", lo)
            .num("rmse_hi", hi);
    }
    report.push(wide);
}

/// Wide-model fit: coefficient table and, with a focus, the rmse curve.
pub fn run_fit(cfg: &RunConfig) -> Result<FitOutput> {
    let (data, fit) = load(cfg)?;
    let x0 = match &cfg.focus {
        Some(_) => Some(focus_vector(&data, cfg.focus_values()?)?),
        None => None,
    };
    let n = data.n() as f64;
    let std_errors: Vec<f64> =
        (0..data.p()).map(|j| (fit.sigma2_hat * fit.sigma_n_inv[(j, j)] / n).sqrt()).collect();
    let rmse = x0.as_ref().map(|x| rmse_wide_curve(&fit, x));

    let mut out = Outputs::create(&cfg.out)?;
    out.write("fit.tsv", &coefficient_tsv(&data, fit.beta_hat.as_slice(), &std_errors))?;
    if let Some(curve) = &rmse {
        out.write("fit_rmse_cc.svg", &plots::rmse_plot(curve, cfg.level))?;
    }
    let mut report = Report::default();
    report.push(run_record("fit", cfg, &data, &fit));
    header_records(&mut report, &data, &fit, x0.as_ref(), cfg.level);
    out.write("fit_report.txt", &report.render())?;
    Ok(FitOutput { data, fit, std_errors, rmse, files: out.commit() })
}

fn focused(command: &str, cfg: &RunConfig, default_sort: SortBy) -> Result<FricOutput> {
    let (data, fit) = load(cfg)?;
    let x0 = focus_vector(&data, cfg.focus_values()?)?;
    let sort = match cfg.sort.unwrap_or(default_sort) {
        SortBy::Fric => SortKey::Fric,
        SortBy::Conf => SortKey::Conf,
        SortBy::Afric => return Err(CliError::Config(format!("`{command}` cannot sort by afric"))),
    };
    let subsets = enumerate_subsets(&data, None)?;
    let opts = TableOptions { level: cfg.level, variant: cfg.variant, sort };
    let rows = score_table(&fit, &data, &x0, &subsets, &opts)?;
    let rmse = rmse_wide_curve(&fit, &x0);
    info!("{command}: scored {} submodels", rows.len());

    let mut out = Outputs::create(&cfg.out)?;
    out.write(&format!("{command}_table.tsv"), &fric_tsv(&rows, cfg.variant, cfg.scale))?;
    if command == "fric" {
        out.write("fric_plot.svg", &plots::fric_plot(&rows, cfg.variant, cfg.scale))?;
        out.write("fric_rmse_cc.svg", &plots::rmse_plot(&rmse, cfg.level))?;
    }
    let conf_name = if command == "conf" { "conf_plot.svg" } else { "fric_conf_plot.svg" };
    out.write(conf_name, &plots::conf_plot(&rows))?;
    out.write(
        &format!("{command}_cd_curves.svg"),
        &plots::cd_plot(
            "Confidence distributions for rr",
            rows.iter().filter(|r| !r.subset.is_full()).map(|r| &r.cd),
            cfg.scale,
        ),
    )?;

    let mut report = Report::default();
    report.push(run_record(command, cfg, &data, &fit));
    header_records(&mut report, &data, &fit, Some(&x0), cfg.level);
    for (rank, r) in rows.iter().enumerate() {
        report.push(
            Record::new("row")
                .str("rank", rank + 1)
                .str("mask", mask_string(&r.subset))
                .str("key", r.subset.key())
                .num("mu_hat", r.mu_hat)
                .num("mu_lo", r.mu_interval.0)
                .num("mu_hi", r.mu_interval.1)
                .num("fric_u", r.fric_u)
                .num("fric_t", r.fric_t)
                .num("fric_median", r.fric_median)
                .opt("conf", r.conf)
                .num("rr_min", r.rr_min)
                .num("kappa_hat", r.kappa_hat)
                .num("rr_lo", r.rr_interval.0)
                .num("rr_hi", r.rr_interval.1),
        );
    }
    out.write(&format!("{command}_report.txt"), &report.render())?;
    Ok(FricOutput { data, fit, x0, rows, rmse, files: out.commit() })
}

/// Focused ranking sorted by FRIC (unless `--sort` says otherwise).
pub fn run_fric(cfg: &RunConfig) -> Result<FricOutput> {
    focused("fric", cfg, SortBy::Fric)
}

/// Focused ranking sorted by `conf(S)`, with the confidence plots.
pub fn run_conf(cfg: &RunConfig) -> Result<FricOutput> {
    focused("conf", cfg, SortBy::Conf)
}

/// Averaged ranking over a focus ensemble.
pub fn run_afric(cfg: &RunConfig) -> Result<AfricOutput> {
    let (data, fit) = load(cfg)?;
    let ens = cfg.ensemble()?.build(&data)?;
    let subsets = enumerate_subsets(&data, None)?;
    let mut rows = afric_table(&fit, &data, &ens, &subsets)?;
    let score = |r: &AfricRow| match cfg.variant {
        FricVariant::Unbiased => r.afric_u,
        FricVariant::Truncated => r.afric_t,
        FricVariant::Median => r.afric_median.unwrap_or(r.afric_t),
    };
    match cfg.sort.unwrap_or(SortBy::Afric) {
        SortBy::Conf => rows.sort_by(|a, b| {
            let ca = a.conf.unwrap_or(f64::NEG_INFINITY);
            let cb = b.conf.unwrap_or(f64::NEG_INFINITY);
            cb.total_cmp(&ca).then(a.subset.key().cmp(&b.subset.key()))
        }),
        SortBy::Afric | SortBy::Fric => {
            rows.sort_by(|a, b| score(a).total_cmp(&score(b)).then(a.subset.key().cmp(&b.subset.key())))
        }
    }
    info!("afric: scored {} submodels over {} focus vectors", rows.len(), ens.points().len());

    let mut out = Outputs::create(&cfg.out)?;
    out.write("afric_table.tsv", &afric_tsv(&rows, cfg.scale, cfg.level))?;
    out.write("afric_plot.svg", &plots::afric_plot(&rows, cfg.variant, cfg.scale))?;
    if rows.iter().any(|r| r.conf.is_some()) {
        out.write(
            "afric_cd_curves.svg",
            &plots::cd_plot(
                "Confidence distributions for averaged rr",
                rows.iter().filter(|r| !r.subset.is_full()).filter_map(|r| r.cd.as_ref()),
                cfg.scale,
            ),
        )?;
    }

    let mut report = Report::default();
    report.push(run_record("afric", cfg, &data, &fit));
    header_records(&mut report, &data, &fit, None, cfg.level);
    for (rank, r) in rows.iter().enumerate() {
        let interval = r.cd.map(|cd| if r.subset.is_full() { (1.0, 1.0) } else { cd.interval(cfg.level) });
        report.push(
            Record::new("arow")
                .str("rank", rank + 1)
                .str("mask", mask_string(&r.subset))
                .str("key", r.subset.key())
                .num("afric_u", r.afric_u)
                .num("afric_t", r.afric_t)
                .opt("afric_median", r.afric_median)
                .opt("conf", r.conf)
                .num("gamma_tilde", r.gamma_tilde)
                .opt("rr_min", r.cd.map(|cd| cd.rr_min))
                .opt("rr_lo", interval.map(|i| i.0))
                .opt("rr_hi", interval.map(|i| i.1)),
        );
    }
    out.write("afric_report.txt", &report.render())?;
    Ok(AfricOutput { data, fit, rows, files: out.commit() })
}

/// Runs the Monte Carlo battery. The caller decides the exit status from
/// [`BatteryReport::passed`].
pub fn run_mc_check(cfg: &McCheckConfig) -> Result<McOutcome> {
    let b = &cfg.battery;
    for (what, count) in [("coverage", b.coverage_replicates), ("mean", b.mean_replicates)] {
        if count < MIN_REPLICATES {
            return Err(CliError::Config(format!(
                "{what} replicates {count} is below the minimum replicate count {MIN_REPLICATES}"
            )));
        }
    }
    let mut out = match &cfg.out {
        Some(dir) => Some(Outputs::create(dir)?),
        None => None,
    };
    let report = run_battery(b)?;
    let files = match out.take() {
        Some(mut o) => {
            let mut rep = Report::default();
            rep.push(
                Record::new("run")
                    .str("command", "mc-check")
                    .str("seed", b.seed)
                    .str("coverage_replicates", b.coverage_replicates)
                    .str("mean_replicates", b.mean_replicates)
                    .num("cdf_bias", b.cdf_bias),
            );
            for c in &report.checks {
                rep.push(
                    Record::new("check")
                        .str("claim", &c.claim)
                        .num("observed", c.observed)
                        .num("expected", c.expected)
                        .num("lo", c.band.0)
                        .num("hi", c.band.1)
                        .str("pass", c.pass),
                );
            }
            let failures = report.failures().count();
            rep.push(
                Record::new("summary")
                    .str("checks", report.checks.len())
                    .str("failures", failures)
                    .str("pass", failures == 0),
            );
            o.write("mc_report.txt", &rep.render())?;
            o.commit()
        }
        None => Vec::new(),
    };
    Ok(McOutcome { report, files })
}
