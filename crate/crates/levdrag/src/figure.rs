//! Figure datasets and their point-data / SVG files.
//!
//! Both files for a figure are written from the same [`FigureDataset`], so
//! the plotted marks and the delimited points never disagree.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use levdrag_core::{cumulative_path, AlignedPanel, LeverageCurve, RatioSeries, ReturnSeries};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    Scatter,
    Cumulative,
    LeverageCurve,
    RatioCloud,
}

impl FigureKind {
    pub const ALL: [FigureKind; 4] =
        [FigureKind::Scatter, FigureKind::Cumulative, FigureKind::LeverageCurve, FigureKind::RatioCloud];

    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Scatter => "scatter",
            FigureKind::Cumulative => "cumulative",
            FigureKind::LeverageCurve => "leverage_curve",
            FigureKind::RatioCloud => "ratio_cloud",
        }
    }

    fn joined(self) -> bool {
        matches!(self, FigureKind::Cumulative | FigureKind::LeverageCurve)
    }
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown figure `{s}` (expected scatter, cumulative, leverage_curve or ratio_cloud)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub kind: FigureKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<FigureSeries>,
    /// Horizontal lines `(label, y)`.
    pub reference_lines: Vec<(String, f64)>,
}

/// Daily ETF returns against daily index returns, both in percent.
pub fn scatter(panel: &AlignedPanel) -> FigureDataset {
    let index = panel.index().returns();
    FigureDataset {
        kind: FigureKind::Scatter,
        title: format!("Daily returns of ETFs versus {}", panel.index().label()),
        x_label: format!("{} daily return (%)", panel.index().label()),
        y_label: "ETF daily return (%)".into(),
        series: panel
            .etfs()
            .iter()
            .map(|etf| FigureSeries {
                label: etf.label().into(),
                points: index.iter().zip(etf.returns()).map(|(r, e)| (r * 100.0, e * 100.0)).collect(),
            })
            .collect(),
        reference_lines: Vec::new(),
    }
}

/// Running cumulative return in percent against trading day, starting at day 0 with 0.
///
/// The last point is `cumulative_return` times 100, from the same running sum.
pub fn cumulative(series: &[ReturnSeries]) -> Result<FigureDataset> {
    let series = series
        .iter()
        .map(|s| {
            let path = cumulative_path(s.returns())?;
            let points = std::iter::once((0.0, 0.0))
                .chain(path.iter().enumerate().map(|(t, c)| ((t + 1) as f64, c * 100.0)))
                .collect();
            Ok(FigureSeries { label: s.label().into(), points })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureDataset {
        kind: FigureKind::Cumulative,
        title: "Cumulative returns".into(),
        x_label: "Trading day".into(),
        y_label: "Cumulative return (%)".into(),
        series,
        reference_lines: Vec::new(),
    })
}

/// Annualized constant-leverage geometric return (%) against leverage.
pub fn leverage_curve(curve: &LeverageCurve, label: &str) -> FigureDataset {
    FigureDataset {
        kind: FigureKind::LeverageCurve,
        title: "Annualized geometric return versus constant leverage".into(),
        x_label: "Leverage".into(),
        y_label: "Annualized geometric return (%)".into(),
        series: vec![FigureSeries {
            label: label.into(),
            points: curve.points.iter().map(|(l, g)| (*l, g * 100.0)).collect(),
        }],
        reference_lines: vec![("0".into(), 0.0)],
    }
}

/// Daily return ratios against index return (%), with a line at each target multiple.
pub fn ratio_cloud(ratios: &[(String, f64, RatioSeries)], index_label: &str) -> FigureDataset {
    FigureDataset {
        kind: FigureKind::RatioCloud,
        title: "Daily return ratios".into(),
        x_label: format!("{index_label} daily return (%)"),
        y_label: "Return ratio".into(),
        series: ratios
            .iter()
            .map(|(label, _, r)| FigureSeries {
                label: label.clone(),
                points: r.index_returns().iter().zip(r.ratios()).map(|(x, l)| (x * 100.0, *l)).collect(),
            })
            .collect(),
        reference_lines: ratios.iter().map(|(label, k, _)| (format!("{label} k={k}"), *k)).collect(),
    }
}

/// `series,x,y` rows, full precision.
pub fn point_data(dataset: &FigureDataset) -> String {
    let mut out = String::from("series,x,y\n");
    for s in &dataset.series {
        for (x, y) in &s.points {
            let _ = writeln!(out, "{},{x},{y}", csv_field(&s.label));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\t']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

pub fn render_svg(dataset: &FigureDataset) -> String {
    let points = || dataset.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = extent(points().map(|p| p.0));
    let (y0, y1) = extent(points().map(|p| p.1).chain(dataset.reference_lines.iter().map(|r| r.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, xml_escape(&dataset.title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top);
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * f64::from(i) / 4.0;
        let fy = y0 + (y1 - y0) * f64::from(i) / 4.0;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text>"#, sx(fx), bottom + 16.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#, left - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, xml_escape(&dataset.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(&dataset.y_label)
    );
    for (label, y) in &dataset.reference_lines {
        let _ = writeln!(
            out,
            r#"<line x1="{left}" y1="{0:.2}" x2="{right}" y2="{0:.2}" stroke="gray" stroke-dasharray="4 3"><title>{1}</title></line>"#,
            sy(*y),
            xml_escape(label)
        );
    }
    for (i, s) in dataset.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if dataset.kind.joined() {
            let path: Vec<String> = s.points.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        } else {
            let _ = writeln!(out, r#"<g fill="{color}" fill-opacity="0.6">"#);
            for (x, y) in &s.points {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(*x), sy(*y));
            }
            out.push_str("</g>\n");
        }
        let ly = top + 16.0 + 16.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, right - 110.0, ly - 9.0);
        let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, right - 94.0, xml_escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `<kind>.csv` and `<kind>.svg` into `dir`.
pub fn emit_figure(dataset: &FigureDataset, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", dataset.kind.name()));
    let svg_path = dir.join(format!("{}.svg", dataset.kind.name()));
    fs::write(&csv_path, point_data(dataset)).map_err(|e| Error::io(&csv_path, e))?;
    fs::write(&svg_path, render_svg(dataset)).map_err(|e| Error::io(&svg_path, e))?;
    Ok((csv_path, svg_path))
}
