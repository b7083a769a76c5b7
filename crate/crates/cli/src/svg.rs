//! Minimal deterministic SVG 1.1 plotting on a fixed 800×600 canvas.

use std::fmt::Write as _;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

pub const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

/// One chart: a frame with axes in data coordinates.
pub struct Chart {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Chart {
    pub fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let x = widen(x);
        let y = widen(y);
        let mut c = Chart { body: String::new(), x, y };
        c.axes(title, xlabel, ylabel);
        c
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&mut self, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            f(x0),
            f(y1),
            f(x1 - x0),
            f(y0 - y1)
        );
        for t in ticks(self.x.0, self.x.1) {
            let px = self.px(t);
            let _ = writeln!(
                self.body,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle" font-size="12">{4}</text>"##,
                f(px),
                f(y0),
                f(y0 + 5.0),
                f(y0 + 20.0),
                label(t)
            );
        }
        for t in ticks(self.y.0, self.y.1) {
            let py = self.py(t);
            let _ = writeln!(
                self.body,
                r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end" font-size="12">{5}</text>"##,
                f(x0 - 5.0),
                f(py),
                f(x0),
                f(x0 - 8.0),
                f(py + 4.0),
                label(t)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="16">{}</text>"#,
            f(WIDTH / 2.0),
            f(TOP - 20.0),
            escape(title)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            f((x0 + x1) / 2.0),
            f(HEIGHT - 25.0),
            escape(xlabel)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="20" y="{0}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {0})">{1}</text>"#,
            f((y0 + y1) / 2.0),
            escape(ylabel)
        );
    }

    pub fn point(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        if !(x.is_finite() && y.is_finite()) {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            f(self.px(x)),
            f(self.py(y)),
            f(r),
            fill
        );
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, dashed: bool) {
        if ![a.0, a.1, b.0, b.1].iter().all(|v| v.is_finite()) {
            return;
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}"{}/>"#,
            f(self.px(a.0)),
            f(self.py(a.1)),
            f(self.px(b.0)),
            f(self.py(b.1)),
            stroke,
            f(width),
            dash
        );
    }

    pub fn hline(&mut self, y: f64, stroke: &str) {
        self.segment((self.x.0, y), (self.x.1, y), stroke, 1.0, true);
    }

    pub fn vline(&mut self, x: f64, stroke: &str) {
        self.segment((x, self.y.0), (x, self.y.1), stroke, 1.0, true);
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            if !d.is_empty() {
                d.push(' ');
            }
            let _ = write!(d, "{},{}", f(self.px(x)), f(self.py(y)));
        }
        if d.is_empty() {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            d,
            stroke,
            f(width)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str, size: f64) {
        if !(x.is_finite() && y.is_finite()) {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}">{}</text>"#,
            f(self.px(x) + 4.0),
            f(self.py(y) - 4.0),
            f(size),
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
                "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
                "<g font-family=\"sans-serif\">\n{body}</g>\n</svg>\n"
            ),
            w = WIDTH,
            h = HEIGHT,
            body = self.body
        )
    }
}

/// Finite min and max of `values`, padded by 5% each side.
pub fn range_of(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return (0.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-9 * hi.abs().max(1.0));
    (lo - pad, hi + pad)
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let d = 0.5 * lo.abs().max(1.0);
        (lo - d, hi + d)
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten, about six per axis.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn f(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
