//! The shipped synthetic panel against statistics frozen by `fixtures/oracle.py`.

use std::path::{Path, PathBuf};

use levdrag::figure;
use levdrag::ingest::{parse_table, read_records, Schema};
use levdrag::report::{self, Format, ReportBundle};
use levdrag_core::{
    align, covariance_decomposition, decompose, return_ratios, summarize, winsorize_ratios, AlignedPanel,
    DecompositionReport, StatsConfig, SummaryStats, ZeroDayPolicy,
};

const ETFS: [(&str, f64); 3] = [("lev1", 1.0), ("lev2", 2.0), ("lev3", 3.0)];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.csv"))
}

fn panel() -> AlignedPanel {
    let schema = Schema::prices("date", "close");
    let series = ["index", "lev1", "lev2", "lev3"]
        .iter()
        .map(|n| {
            let bytes = std::fs::read(fixture(n)).unwrap();
            parse_table(&bytes, &schema, n).unwrap().into_returns().unwrap()
        })
        .collect();
    align(series).unwrap()
}

fn expected() -> toml::Table {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/expected.toml");
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

fn section<'a>(t: &'a toml::Table, group: &str, name: &str) -> &'a toml::Table {
    t[group][name].as_table().unwrap()
}

fn close(actual: f64, expected: f64, what: &str) {
    let tol = 1e-12 * expected.abs().max(1.0);
    assert!((actual - expected).abs() <= tol, "{what}: {actual} vs {expected}");
}

fn num(t: &toml::Table, key: &str) -> f64 {
    match &t[key] {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        other => panic!("{key}: {other:?}"),
    }
}

fn check_summary(s: &SummaryStats, e: &toml::Table, who: &str) {
    assert_eq!(s.days as i64, e["days"].as_integer().unwrap());
    close(s.cumulative_return, num(e, "cumulative_return"), &format!("{who} cumulative"));
    close(s.geometric_annualized, num(e, "geometric_annualized"), &format!("{who} geometric"));
    close(s.arithmetic_annualized, num(e, "arithmetic_annualized"), &format!("{who} arithmetic"));
    close(s.volatility_annualized, num(e, "volatility_annualized"), &format!("{who} volatility"));
    close(s.risk_adjusted, num(e, "risk_adjusted"), &format!("{who} risk adjusted"));
}

fn check_report(r: &DecompositionReport, e: &toml::Table, who: &str) {
    assert_eq!(r.days as i64, e["days"].as_integer().unwrap(), "{who}");
    assert_eq!(r.zero_days as i64, e["zero_days"].as_integer().unwrap(), "{who}");
    let pairs = [
        ("mean_ratio", r.mean_ratio),
        ("ratio_volatility_annualized", r.ratio_volatility_annualized()),
        ("etf_mean_annualized", r.etf_mean_annualized()),
        ("covariance_annualized", r.covariance_annualized()),
        ("residual_annualized", r.residual_annualized()),
        ("etf_geometric_annualized", r.etf_geometric_annualized),
        ("ideal_estimate_annualized", r.ideal_estimate_annualized),
        ("empirical_cl_estimate_annualized", r.empirical_cl_estimate_annualized),
        ("empirical_estimate_annualized", r.empirical_estimate_annualized),
    ];
    for (key, value) in pairs {
        close(value, num(e, key), &format!("{who} {key}"));
    }
}

#[test]
fn summary_statistics_match_oracle() {
    let p = panel();
    let exp = expected();
    for s in p.series() {
        check_summary(&summarize(s, &StatsConfig::default()).unwrap(), section(&exp, "summary", s.label()), s.label());
    }
}

#[test]
fn decompositions_match_oracle_under_both_policies() {
    let p = panel();
    let exp = expected();
    let cfg = StatsConfig::default();
    for (label, k) in ETFS {
        let etf = p.etf(label).unwrap();
        for (group, policy) in [("assign", ZeroDayPolicy::default()), ("exclude", ZeroDayPolicy::exclude())] {
            let r = covariance_decomposition(p.index(), etf, k, policy, &cfg).unwrap();
            check_report(&r, section(&exp, group, label), &format!("{group} {label}"));
            assert!(r.identity_residual().abs() < 1e-15, "{group} {label}");
        }
        let ratios = return_ratios(p.index(), etf, k, ZeroDayPolicy::default()).unwrap();
        let w = decompose(&winsorize_ratios(&ratios, 5.0, 95.0).unwrap(), k, &cfg).unwrap();
        check_report(&w, section(&exp, "winsorized", label), &format!("winsorized {label}"));
    }
}

fn bundle() -> ReportBundle {
    let p = panel();
    let cfg = StatsConfig::default();
    let stats: Vec<_> = p.series().map(|s| (s.label().to_string(), summarize(s, &cfg).unwrap())).collect();
    let reports: Vec<_> = ETFS
        .iter()
        .map(|(l, k)| {
            let r = covariance_decomposition(p.index(), p.etf(l).unwrap(), *k, ZeroDayPolicy::default(), &cfg).unwrap();
            (l.to_string(), r)
        })
        .collect();
    ReportBundle {
        tables: vec![
            report::summary_table(&stats),
            report::estimates_table(&stats[0], &reports, &cfg).unwrap(),
            report::decomposition_table(&stats[0], &reports, None),
        ],
        ..Default::default()
    }
}

#[test]
fn rendered_cells_match_oracle_to_three_decimals() {
    let exp = expected();
    let b = bundle();
    let summary = b.table("summary").unwrap();
    for name in ["index", "lev1", "lev2", "lev3"] {
        let e = section(&exp, "summary", name);
        for (metric, key) in [
            ("Cumulative Return", "cumulative_return"),
            ("Geometric Return", "geometric_annualized"),
            ("Arithmetic Return", "arithmetic_annualized"),
            ("Volatility", "volatility_annualized"),
        ] {
            let cell = summary.cell(metric, name).unwrap().render();
            assert_eq!(cell, format!("{:.3}", num(e, key) * 100.0), "{metric} {name}");
        }
        let ra = summary.cell("Risk-Adjusted Return", name).unwrap().render();
        assert_eq!(ra, format!("{:.3}", num(e, "risk_adjusted")));
    }
    let decomposition = b.table("decomposition").unwrap();
    for (label, _) in ETFS {
        let e = section(&exp, "assign", label);
        let cov = decomposition.cell("Covariance(λ, R)", label).unwrap().render();
        assert_eq!(cov, format!("{:.3}", num(e, "covariance_annualized") * 100.0));
        let ratio = decomposition.cell("Average Return Ratio", label).unwrap().render();
        assert_eq!(ratio, format!("{:.3}", num(e, "mean_ratio")));
    }
}

#[test]
fn delimited_output_round_trips_through_ingest() {
    let b = bundle();
    let bytes = report::render_tables(&b, Format::Delimited).unwrap();
    let (headers, rows) = read_records(&bytes).unwrap();
    assert_eq!(headers, ["table", "metric", "column", "value"]);
    let cells: usize = b.tables.iter().map(|t| t.rows.len() * t.columns.len()).sum();
    assert_eq!(rows.len(), cells);
    for row in &rows {
        let t = b.table(&row[0]).unwrap();
        assert_eq!(t.cell(&row[1], &row[2]).unwrap().render(), row[3]);
    }
}

#[test]
fn cumulative_figure_ends_at_cumulative_return() {
    let p = panel();
    let d = figure::cumulative(&p.series().cloned().collect::<Vec<_>>()).unwrap();
    for (s, series) in d.series.iter().zip(p.series()) {
        let stats = summarize(series, &StatsConfig::default()).unwrap();
        assert_eq!(s.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(s.points.last().unwrap().1, stats.cumulative_return * 100.0);
        assert_eq!(s.points.len(), series.len() + 1);
    }
}

#[test]
fn ratio_cloud_lines_at_targets() {
    let p = panel();
    let ratios: Vec<_> = ETFS
        .iter()
        .map(|(l, k)| (l.to_string(), *k, return_ratios(p.index(), p.etf(l).unwrap(), *k, ZeroDayPolicy::default()).unwrap()))
        .collect();
    let d = figure::ratio_cloud(&ratios, "index");
    let ys: Vec<f64> = d.reference_lines.iter().map(|r| r.1).collect();
    assert_eq!(ys, [1.0, 2.0, 3.0]);
    assert_eq!(d.series[1].points.len(), 501);
}
