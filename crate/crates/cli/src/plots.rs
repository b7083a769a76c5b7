use fric::focus::{ConfidenceDistribution, RmseCurve};
use fric::{AfricRow, FricVariant, ScoreRow};

use crate::config::{variant_label, Scale};
use crate::svg::{range_of, Chart, PALETTE};

const CURVE_POINTS: usize = 160;

/// Scores on the x axis, `μ̂_S` with its interval on the y axis.
pub fn fric_plot(rows: &[ScoreRow], variant: FricVariant, scale: Scale) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| scale.apply(r.fric(variant))).collect();
    let ys = rows.iter().flat_map(|r| [r.mu_interval.0, r.mu_interval.1]);
    let mut c = Chart::new(
        "FRIC plot",
        &format!("FRIC^{} ({})", variant_label(variant), scale.label()),
        "estimate of focus",
        range_of(xs.iter().copied().chain([scale.apply(1.0)])),
        range_of(ys),
    );
    c.vline(scale.apply(1.0), "#7f7f7f");
    for (r, &x) in rows.iter().zip(&xs) {
        let color = if r.subset.is_full() { PALETTE[1] } else { PALETTE[0] };
        c.segment((x, r.mu_interval.0), (x, r.mu_interval.1), color, 1.0, false);
        c.point(x, r.mu_hat, 3.5, color);
        if r.subset.is_full() {
            c.text(x, r.mu_hat, "wide", 12.0);
        }
    }
    c.finish()
}

/// `conf(S)` against `μ̂_S` for the non-wide submodels.
pub fn conf_plot(rows: &[ScoreRow]) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.conf.map(|c| (r.mu_hat, c))).collect();
    let mut c = Chart::new(
        "Confidence FRIC plot",
        "estimate of focus",
        "conf",
        range_of(pts.iter().map(|p| p.0)),
        (0.0, 1.0),
    );
    c.hline(0.5, "#7f7f7f");
    if let Some(wide) = rows.iter().find(|r| r.subset.is_full()) {
        c.vline(wide.mu_hat, PALETTE[1]);
    }
    for &(x, y) in &pts {
        c.point(x, y, 3.5, PALETTE[0]);
    }
    c.finish()
}

/// Distribution functions of every non-wide submodel, with the jump at the
/// minimal risk drawn as a vertical riser.
pub fn cd_plot<'a>(
    title: &str,
    cds: impl IntoIterator<Item = &'a ConfidenceDistribution>,
    scale: Scale,
) -> String {
    let cds: Vec<_> = cds.into_iter().collect();
    let upper = cds
        .iter()
        .map(|cd| cd.quantile(0.9))
        .filter(|q| q.is_finite())
        .fold(1.5f64, f64::max)
        .min(10.0);
    let mut c = Chart::new(
        title,
        &format!("relative risk ({})", scale.label()),
        "confidence",
        (0.0, scale.apply(upper)),
        (0.0, 1.0),
    );
    c.vline(scale.apply(1.0), "#7f7f7f");
    for (k, cd) in cds.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let lo = cd.rr_min;
        if lo >= upper {
            continue;
        }
        let x0 = scale.apply(lo);
        c.segment((x0, 0.0), (x0, cd.evaluate(lo)), color, 1.0, false);
        let pts: Vec<(f64, f64)> = (0..=CURVE_POINTS)
            .map(|i| {
                let rr = lo + (upper - lo) * i as f64 / CURVE_POINTS as f64;
                (scale.apply(rr), cd.evaluate(rr))
            })
            .collect();
        c.polyline(&pts, color, 1.0);
    }
    c.finish()
}

/// Confidence curve for the rmse of the wide estimator.
pub fn rmse_plot(curve: &RmseCurve, level: f64) -> String {
    let r0 = curve.rmse_hat;
    let (lo, hi) = curve.interval(level);
    let upper = (2.0 * hi).max(2.0 * r0);
    let mut c = Chart::new("Confidence curve for rmse of the wide estimator", "rmse", "cc", (0.0, upper), (0.0, 1.0));
    let pts: Vec<(f64, f64)> = (1..=CURVE_POINTS)
        .map(|i| {
            let r = upper * i as f64 / CURVE_POINTS as f64;
            (r, curve.cc(r))
        })
        .collect();
    c.polyline(&pts, PALETTE[0], 1.5);
    c.hline(level, "#7f7f7f");
    c.segment((lo, 0.0), (lo, level), PALETTE[1], 1.0, true);
    c.segment((hi, 0.0), (hi, level), PALETTE[1], 1.0, true);
    c.point(curve.median(), 0.0, 3.5, PALETTE[1]);
    c.finish()
}

/// AFRIC scores against `C*_S(1)`, or against submodel size when the
/// ensemble has no exact confidence distribution.
pub fn afric_plot(rows: &[AfricRow], variant: FricVariant, scale: Scale) -> String {
    let score = |r: &AfricRow| match variant {
        FricVariant::Unbiased => r.afric_u,
        FricVariant::Truncated => r.afric_t,
        FricVariant::Median => r.afric_median.unwrap_or(r.afric_t),
    };
    let has_conf = rows.iter().any(|r| r.conf.is_some());
    let pts: Vec<(f64, f64, bool)> = rows
        .iter()
        .map(|r| {
            let y = if has_conf { r.conf.unwrap_or(f64::NAN) } else { (r.subset.size() - 1) as f64 };
            (scale.apply(score(r)), y, r.subset.is_full())
        })
        .collect();
    let (ylabel, yr) = if has_conf {
        ("conf", (0.0, 1.0))
    } else {
        ("covariates included", range_of(pts.iter().map(|p| p.1)))
    };
    let mut c = Chart::new(
        "AFRIC plot",
        &format!("AFRIC^{} ({})", variant_label(variant), scale.label()),
        ylabel,
        range_of(pts.iter().map(|p| p.0).chain([scale.apply(1.0)])),
        yr,
    );
    c.vline(scale.apply(1.0), "#7f7f7f");
    for &(x, y, wide) in &pts {
        c.point(x, y, 3.5, if wide { PALETTE[1] } else { PALETTE[0] });
    }
    c.finish()
}
