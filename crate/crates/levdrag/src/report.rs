//! Table rendering: plain text, delimited (same dialect as ingest), and a
//! versioned TOML report.
//!
//! Rates are carried as decimal fractions and only turned into percent when
//! rendered; plain and delimited output use 3 decimals.

use std::fmt::Write as _;
use std::str::FromStr;

use levdrag_core::{ideal_cl_estimate, DecompositionReport, StatsConfig, SummaryStats};
use serde::Serialize;

use crate::config::RunConfig;
use crate::figure::FigureDataset;
use crate::{Error, Result};

pub const REPORT_FORMAT: &str = "levdrag-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Plain,
    Delimited,
    Structured,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Format::Plain),
            "delimited" | "csv" => Ok(Format::Delimited),
            "structured" | "toml" => Ok(Format::Structured),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Plain => "txt",
            Format::Delimited => "csv",
            Format::Structured => "toml",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Decimal fraction shown as percent.
    Percent(f64),
    Ratio(f64),
    Count(usize),
}

impl Cell {
    pub fn display_value(self) -> f64 {
        match self {
            Cell::Percent(v) => v * 100.0,
            Cell::Ratio(v) => v,
            Cell::Count(n) => n as f64,
        }
    }

    fn unit(self) -> &'static str {
        match self {
            Cell::Percent(_) => "percent",
            Cell::Ratio(_) => "ratio",
            Cell::Count(_) => "count",
        }
    }

    pub fn render(self) -> String {
        match self {
            Cell::Count(n) => n.to_string(),
            other => {
                let s = format!("{:.3}", other.display_value());
                // avoid "-0.000"
                if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                    s.trim_start_matches('-').to_string()
                } else {
                    s
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub metric: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableView {
    pub id: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl TableView {
    fn new(id: &str, title: impl Into<String>, columns: Vec<String>) -> Self {
        Self { id: id.into(), title: title.into(), columns, rows: Vec::new() }
    }

    fn row(&mut self, metric: &str, cells: Vec<Cell>) {
        self.rows.push(Row { metric: metric.into(), cells });
    }

    pub fn cell(&self, metric: &str, column: &str) -> Option<Cell> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|r| r.metric == metric).map(|r| r.cells[c])
    }
}

/// Per-instrument statistics in the layout of a summary-statistics table.
pub fn summary_table(stats: &[(String, SummaryStats)]) -> TableView {
    let mut t = TableView::new(
        "summary",
        "Summary statistics (returns and volatility in annualized %)",
        stats.iter().map(|(l, _)| l.clone()).collect(),
    );
    let col = |f: fn(&SummaryStats) -> Cell| stats.iter().map(|(_, s)| f(s)).collect::<Vec<_>>();
    t.row("Cumulative Return", col(|s| Cell::Percent(s.cumulative_return)));
    t.row("Geometric Return", col(|s| Cell::Percent(s.geometric_annualized)));
    t.row("Arithmetic Return", col(|s| Cell::Percent(s.arithmetic_annualized)));
    t.row("Volatility", col(|s| Cell::Percent(s.volatility_annualized)));
    t.row("Risk-Adjusted Return", col(|s| Cell::Ratio(s.risk_adjusted)));
    t.row("Days in Sample", col(|s| Cell::Count(s.days)));
    t
}

/// Actual geometric return against the three approximation-based estimates.
pub fn estimates_table(
    index: &(String, SummaryStats),
    etfs: &[(String, DecompositionReport)],
    config: &StatsConfig,
) -> Result<TableView> {
    let mut columns = vec![index.0.clone()];
    columns.extend(etfs.iter().map(|(l, _)| l.clone()));
    let mut t = TableView::new("estimates", "Annualized geometric returns and estimates (%)", columns);
    let s = &index.1;
    let own = ideal_cl_estimate(s.arithmetic_annualized, s.volatility_annualized, 1.0, config)?;
    let with = |first: f64, f: fn(&DecompositionReport) -> f64| {
        std::iter::once(Cell::Percent(first)).chain(etfs.iter().map(|(_, r)| Cell::Percent(f(r)))).collect()
    };
    t.row("Geometric Return", with(s.geometric_annualized, |r| r.etf_geometric_annualized));
    t.row("Ideal Constant Leverage Estimate", with(own, |r| r.ideal_estimate_annualized));
    t.row("Empirical Constant Leverage Estimate", with(own, |r| r.empirical_cl_estimate_annualized));
    t.row("Empirical Estimate", with(own, |r| r.empirical_estimate_annualized));
    Ok(t)
}

/// Return-ratio statistics and the covariance term per ETF.
pub fn decomposition_table(
    index: &(String, SummaryStats),
    etfs: &[(String, DecompositionReport)],
    winsorized: Option<(f64, f64)>,
) -> TableView {
    let mut columns = vec![index.0.clone()];
    columns.extend(etfs.iter().map(|(l, _)| l.clone()));
    let (id, title) = match winsorized {
        Some((lo, hi)) => (
            "decomposition_winsorized",
            format!("Return ratio decomposition, ratios winsorized at {lo}/{hi} percentiles (annualized %)"),
        ),
        None => ("decomposition", "Return ratio decomposition (annualized %)".to_string()),
    };
    let mut t = TableView::new(id, title, columns);
    let e = index.1.arithmetic_annualized;
    let with = |first: Cell, f: &dyn Fn(&DecompositionReport) -> Cell| {
        std::iter::once(first).chain(etfs.iter().map(|(_, r)| f(r))).collect()
    };
    t.row("Arithmetic Return", with(Cell::Percent(e), &|r| Cell::Percent(r.etf_mean_annualized())));
    t.row("Average Return Ratio", with(Cell::Ratio(1.0), &|r| Cell::Ratio(r.mean_ratio)));
    t.row("Volatility of Return Ratio", with(Cell::Percent(0.0), &|r| Cell::Percent(r.ratio_volatility_annualized())));
    t.row(
        "Ideal Constant Leverage Estimate Arithmetic Return",
        with(Cell::Percent(e), &|r| Cell::Percent(r.ideal_arithmetic_annualized())),
    );
    t.row(
        "Empirical Constant Leverage Estimate Arithmetic Return",
        with(Cell::Percent(e), &|r| Cell::Percent(r.empirical_cl_arithmetic_annualized())),
    );
    t.row("Covariance(λ, R)", with(Cell::Percent(0.0), &|r| Cell::Percent(r.covariance_annualized())));
    t.row("Zero-Day Residual", with(Cell::Percent(0.0), &|r| Cell::Percent(r.residual_annualized())));
    t.row("Zero Days", with(Cell::Count(0), &|r| Cell::Count(r.zero_days)));
    t
}

/// Constant-leverage estimates straight from annualized scalars.
pub fn scalar_estimates_table(
    mean: f64,
    volatility: f64,
    multiples: &[f64],
    ratios: &[f64],
    config: &StatsConfig,
) -> Result<TableView> {
    let mut columns: Vec<String> = multiples.iter().map(|k| format!("k={k}")).collect();
    columns.extend(ratios.iter().map(|m| format!("ratio={m}")));
    let mut t = TableView::new("scalar_estimates", "Constant leverage geometric return estimates (annualized %)", columns);
    let mut cells = Vec::new();
    for m in multiples.iter().chain(ratios) {
        cells.push(Cell::Percent(ideal_cl_estimate(mean, volatility, *m, config)?));
    }
    t.row("Constant Leverage Estimate", cells);
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub label: String,
    pub path: String,
    pub sha256: String,
}

/// Provenance attached to structured reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub run: RunConfig,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub tables: Vec<TableView>,
    pub figure_datasets: Vec<FigureDataset>,
    pub meta: Option<RunMeta>,
}

impl ReportBundle {
    pub fn table(&self, id: &str) -> Option<&TableView> {
        self.tables.iter().find(|t| t.id == id)
    }
}

pub fn render_tables(bundle: &ReportBundle, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Plain => render_plain(bundle).into_bytes(),
        Format::Delimited => render_delimited(bundle)?,
        Format::Structured => render_structured(bundle)?.into_bytes(),
    })
}

fn render_plain(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    for (i, t) in bundle.tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let metric_w = t.rows.iter().map(|r| r.metric.chars().count()).max().unwrap_or(0);
        let rendered: Vec<Vec<String>> = t.rows.iter().map(|r| r.cells.iter().map(|c| c.render()).collect()).collect();
        let widths: Vec<usize> = t
            .columns
            .iter()
            .enumerate()
            .map(|(c, name)| rendered.iter().map(|r| r[c].len()).chain([name.chars().count()]).max().unwrap_or(0))
            .collect();
        let _ = writeln!(out, "{}", t.title);
        let _ = write!(out, "{:metric_w$}", "");
        for (name, w) in t.columns.iter().zip(&widths) {
            let _ = write!(out, "  {name:>w$}");
        }
        out.push('\n');
        for (row, cells) in t.rows.iter().zip(&rendered) {
            let pad = metric_w - row.metric.chars().count();
            let _ = write!(out, "{}{}", row.metric, " ".repeat(pad));
            for (cell, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        }
    }
    out
}

fn render_delimited(bundle: &ReportBundle) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["table", "metric", "column", "value"]).map_err(ser)?;
    for t in &bundle.tables {
        for row in &t.rows {
            for (col, cell) in t.columns.iter().zip(&row.cells) {
                w.write_record([t.id.as_str(), row.metric.as_str(), col.as_str(), cell.render().as_str()])
                    .map_err(ser)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

#[derive(Serialize)]
struct StructuredRow<'a> {
    metric: &'a str,
    unit: &'a str,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct StructuredTable<'a> {
    id: &'a str,
    title: &'a str,
    columns: &'a [String],
    rows: Vec<StructuredRow<'a>>,
}

#[derive(Serialize)]
struct StructuredFigure<'a> {
    kind: &'a str,
    series: Vec<&'a str>,
    points: usize,
}

#[derive(Serialize)]
struct StructuredReport<'a> {
    format: &'a str,
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<&'a RunConfig>,
    inputs: &'a [InputDigest],
    tables: Vec<StructuredTable<'a>>,
    figures: Vec<StructuredFigure<'a>>,
}

fn render_structured(bundle: &ReportBundle) -> Result<String> {
    let report = StructuredReport {
        format: REPORT_FORMAT,
        version: REPORT_VERSION,
        run: bundle.meta.as_ref().map(|m| &m.run),
        inputs: bundle.meta.as_ref().map(|m| m.inputs.as_slice()).unwrap_or_default(),
        tables: bundle
            .tables
            .iter()
            .map(|t| StructuredTable {
                id: &t.id,
                title: &t.title,
                columns: &t.columns,
                rows: t
                    .rows
                    .iter()
                    .map(|r| StructuredRow {
                        metric: &r.metric,
                        unit: r.cells.first().map(|c| c.unit()).unwrap_or("ratio"),
                        values: r.cells.iter().map(|c| c.display_value()).collect(),
                    })
                    .collect(),
            })
            .collect(),
        figures: bundle
            .figure_datasets
            .iter()
            .map(|f| StructuredFigure {
                kind: f.kind.name(),
                series: f.series.iter().map(|s| s.label.as_str()).collect(),
                points: f.series.iter().map(|s| s.points.len()).sum(),
            })
            .collect(),
    };
    toml::to_string(&report).map_err(|e| Error::Serialize(e.to_string()))
}
