use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fric::{AfricRow, Dataset, FricVariant, ScoreRow, Subset};
use log::warn;

use crate::config::{variant_label, Scale};
use crate::error::{CliError, Result};

/// Files written by one run. Unless [`Outputs::commit`] is called, dropping
/// the set deletes everything it wrote.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new(), committed: false })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            if let Err(e) = fs::remove_file(path) {
                if e.kind() != std::io::ErrorKind::NotFound {
                    warn!("could not remove partial output {}: {e}", path.display());
                }
            }
        }
    }
}

/// In-or-out string over the covariates, intercept excluded: `"0 1 0 1 0"`.
pub fn mask_string(subset: &Subset) -> String {
    subset.mask()[1..].iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>().join(" ")
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.6}"),
        Some(v) => format!("{v}"),
        None => "NA".into(),
    }
}

pub fn fric_tsv(rows: &[ScoreRow], variant: FricVariant, scale: Scale) -> String {
    let mut out = format!(
        "mask\tmu_hat\tfric_{}\tconf\trr_min\t{s}_lo\t{s}_hi\n",
        variant_label(variant),
        s = scale.label()
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            mask_string(&r.subset),
            cell(Some(r.mu_hat)),
            cell(Some(scale.apply(r.fric(variant)))),
            cell(r.conf),
            cell(Some(scale.apply(r.rr_min))),
            cell(Some(scale.apply(r.rr_interval.0))),
            cell(Some(scale.apply(r.rr_interval.1))),
        );
    }
    out
}

pub fn afric_tsv(rows: &[AfricRow], scale: Scale, level: f64) -> String {
    let mut out = format!(
        "mask\tafric_u\tafric_t\tafric_median\tconf\trr_min\t{s}_lo\t{s}_hi\n",
        s = scale.label()
    );
    for r in rows {
        let interval = r.cd.map(|cd| if r.subset.is_full() { (1.0, 1.0) } else { cd.interval(level) });
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            mask_string(&r.subset),
            cell(Some(scale.apply(r.afric_u))),
            cell(Some(scale.apply(r.afric_t))),
            cell(r.afric_median.map(|v| scale.apply(v))),
            cell(r.conf),
            cell(r.cd.map(|cd| scale.apply(cd.rr_min))),
            cell(interval.map(|i| scale.apply(i.0))),
            cell(interval.map(|i| scale.apply(i.1))),
        );
    }
    out
}

pub fn coefficient_tsv(data: &Dataset, beta: &[f64], se: &[f64]) -> String {
    let mut out = String::from("name\testimate\tstd_error\tt_value\n");
    for (j, name) in data.names().iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            name,
            cell(Some(beta[j])),
            cell(Some(se[j])),
            cell(Some(beta[j] / se[j]))
        );
    }
    out
}
