//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use levdrag::ingest::{parse_table, read_records, Schema};
use levdrag_core::simulator::derive_seed;
use levdrag_core::{
    align, arithmetic_daily, covariance_decomposition, decompose, empirical_cl_estimate, geometric_daily,
    ideal_cl_estimate, return_ratios, simulate, summarize, taylor_log_error, winsorize, winsorize_bounds,
    winsorize_ratios, IndexModel, LeverageScenario, ReturnSeries, StatsConfig, ZeroDayPolicy,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

/// Uniform draws in [0, 1) from independent ChaCha streams.
struct Stream {
    root: u64,
    next: u64,
}

impl Stream {
    fn new(root: u64) -> Self {
        Self { root, next: 0 }
    }

    fn uniform(&mut self) -> f64 {
        self.next += 1;
        (derive_seed(self.root, self.next) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.uniform() * (hi_inclusive - lo + 1) as f64) as usize
    }
}

fn pp(decimal: f64) -> f64 {
    decimal * 100.0
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name}: got {got:.4}, expected {want} ± {tol}"))
    }
}

fn deadline(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

/// Two-day series with daily mean `m` and population volatility `s`.
fn two_point(label: &str, m: f64, s: f64) -> ReturnSeries {
    ReturnSeries::from_returns(label, vec![m + s, m - s]).unwrap()
}

fn criterion_1() -> Check {
    let cfg = StatsConfig::default();
    let mut got = Vec::new();
    for (k, want) in [(1.0, 0.035), (2.0, -3.625), (3.0, -10.580)] {
        let g = pp(ideal_cl_estimate(0.01917, 0.1940, k, &cfg).map_err(|e| e.to_string())?);
        within(&format!("k={k}"), g, want, 0.01)?;
        got.push(format!("{g:.3}"));
    }
    Ok(got.join(" / "))
}

fn criterion_2() -> Check {
    let cfg = StatsConfig::default();
    let mut got = Vec::new();
    for (ratio, want) in [(1.028, -0.018), (2.033, -3.806), (3.106, -11.478)] {
        let g = pp(empirical_cl_estimate(0.01917, 0.1940, ratio, &cfg).map_err(|e| e.to_string())?);
        within(&format!("ratio {ratio}"), g, want, 0.01)?;
        got.push(format!("{g:.3}"));
    }
    for ((e, v), want) in [((1.897, 19.36), 0.024), ((1.655, 38.77), -5.694), ((0.309, 58.01), -15.226)] {
        let etf = two_point("etf", e / 100.0 / 252.0, v / 100.0 / 252f64.sqrt());
        let g = pp(levdrag_core::empirical_estimate(etf.returns(), &cfg).map_err(|e| e.to_string())?);
        within(&format!("E={e} V={v}"), g, want, 0.01)?;
        got.push(format!("{g:.3}"));
    }
    Ok(got.join(" / "))
}

fn criterion_3() -> Check {
    // Index m ± s and ratio μ ± b on the same two days: Cov = b·s, E(R^ETF) = μm + bs.
    let cfg = StatsConfig::default();
    let (m, s) = (0.01917 / 252.0, 0.1940 / 252f64.sqrt());
    let mut got = Vec::new();
    for (etf_mean, ratio, want) in [(1.897, 1.028, -0.073), (1.655, 2.033, -2.242), (0.309, 3.106, -5.643)] {
        let cov_daily = etf_mean / 100.0 / 252.0 - ratio * m;
        let b = cov_daily / s;
        let index = two_point("index", m, s);
        let lam = [ratio + b, ratio - b];
        let etf = ReturnSeries::from_returns("etf", index.returns().iter().zip(lam).map(|(r, l)| r * l).collect()).unwrap();
        let report = covariance_decomposition(&index, &etf, ratio.round(), ZeroDayPolicy::default(), &cfg)
            .map_err(|e| e.to_string())?;
        within("etf mean", pp(report.etf_mean_annualized()), etf_mean, 1e-9)?;
        let c = pp(report.covariance_annualized());
        within(&format!("ratio {ratio}"), c, want, 0.01)?;
        got.push(format!("{c:.3}"));
    }
    Ok(got.join(" / "))
}

fn criterion_4() -> Check {
    let cfg = StatsConfig::default();
    let mut got = Vec::new();
    for ((e, v), want) in [((1.917, 19.40), 0.099), ((1.897, 19.36), 0.098), ((1.655, 38.77), 0.043), ((0.309, 58.01), 0.005)] {
        let s = summarize(&two_point("x", e / 100.0 / 252.0, v / 100.0 / 252f64.sqrt()), &cfg).map_err(|e| e.to_string())?;
        within(&format!("E={e} V={v}"), s.risk_adjusted, want, 0.001)?;
        got.push(format!("{:.3}", s.risk_adjusted));
    }
    let per_day = (0.00076f64).ln_1p() / 501.0;
    let series = ReturnSeries::from_returns("index", vec![per_day.exp_m1(); 501]).unwrap();
    let s = summarize(&series, &cfg).map_err(|e| e.to_string())?;
    within("cumulative", pp(s.cumulative_return), 0.076, 1e-9)?;
    within("geometric", pp(s.geometric_annualized), 0.038, 0.001)?;
    got.push(format!("geometric {:.4}%", pp(s.geometric_annualized)));
    Ok(got.join(" / "))
}

fn criterion_5() -> Check {
    let cfg = StatsConfig::default();
    let mut rng = Stream::new(5);
    let mut worst = 0.0f64;
    let mut with_zero_days = 0;
    for i in 0..1000 {
        let scenario = LeverageScenario {
            days: rng.int(10, 5000),
            index_model: IndexModel::Normal { mean: rng.range(-0.001, 0.001), sigma: rng.range(0.002, 0.03) },
            target_multiple: [1.0, 2.0, 3.0][rng.int(0, 2)],
            timing_coefficient: rng.range(-10.0, 10.0),
            ratio_noise_sigma: rng.range(0.0, 0.05),
            zero_day_probability: if i % 2 == 0 { rng.range(0.01, 0.1) } else { 0.0 },
            zero_day_etf_sigma: 0.001,
            seed: derive_seed(55, i),
            ..LeverageScenario::default()
        };
        let sim = simulate(&scenario).map_err(|e| format!("scenario {i}: {e}"))?;
        if sim.zero_days > 0 {
            with_zero_days += 1;
        }
        for policy in [ZeroDayPolicy::default(), ZeroDayPolicy::exclude()] {
            let p = &sim.panel;
            let r = covariance_decomposition(p.index(), &p.etfs()[0], scenario.target_multiple, policy, &cfg)
                .map_err(|e| format!("scenario {i}: {e}"))?;
            let residual = r.identity_residual().abs();
            worst = worst.max(residual);
            if residual.is_nan() || residual >= 1e-10 {
                return Err(format!("scenario {i} {:?}: residual {residual:e}", policy.mode));
            }
        }
    }
    Ok(format!("2000 decompositions, {with_zero_days} scenarios with zero days, max residual {worst:.1e}"))
}

fn criterion_6() -> Check {
    let n = 10_000;
    for i in 0..n {
        let r = -0.5 + 1.49 * (i as f64 + 0.5) / n as f64;
        let e = taylor_log_error(r).map_err(|e| e.to_string())?;
        let ok = if r > 0.0 { e <= 0.0 && e >= -libm::pow(r, 3.0) / 3.0 } else { e >= 0.0 };
        if !ok {
            return Err(format!("r = {r}: error {e:e}"));
        }
    }
    Ok(format!("{n} grid points"))
}

fn criterion_7() -> Check {
    let cfg = StatsConfig::default();
    let (a, sigma, days) = (-5.0, 0.012, 100_000);
    let scenario = LeverageScenario {
        days,
        index_model: IndexModel::Normal { mean: 0.0003, sigma },
        target_multiple: 2.0,
        timing_coefficient: a,
        ratio_noise_sigma: 0.01,
        seed: 7,
        ..LeverageScenario::default()
    };
    let sim = simulate(&scenario).map_err(|e| e.to_string())?;
    let p = &sim.panel;
    let report = covariance_decomposition(p.index(), &p.etfs()[0], 2.0, ZeroDayPolicy::default(), &cfg)
        .map_err(|e| e.to_string())?;

    let r = p.index().returns();
    let t = days as f64;
    let (lm, rm) = (sim.leverage.iter().sum::<f64>() / t, r.iter().sum::<f64>() / t);
    let products: Vec<f64> = sim.leverage.iter().zip(r).map(|(l, x)| (l - lm) * (x - rm)).collect();
    let pathwise = products.iter().sum::<f64>() / t;
    within("pathwise covariance", report.covariance, pathwise, 1e-12)?;
    let spread = (products.iter().map(|q| (q - pathwise).powi(2)).sum::<f64>() / t).sqrt();
    let se = spread / t.sqrt() * 252.0;
    let target = a * sigma * sigma * 252.0;
    let z = (report.covariance_annualized() - target) / se;
    if z.abs() > 3.0 {
        return Err(format!("annualized Cov {:.6} vs {target:.6}: {z:.2} standard errors", report.covariance_annualized()));
    }

    for k in [1.0, 2.0, 3.0] {
        let ideal = LeverageScenario { days: 2_000, target_multiple: k, seed: 8, ..LeverageScenario::default() };
        let sim = simulate(&ideal).map_err(|e| e.to_string())?;
        let report = covariance_decomposition(sim.panel.index(), &sim.panel.etfs()[0], k, ZeroDayPolicy::default(), &cfg)
            .map_err(|e| e.to_string())?;
        if report.covariance != 0.0 || report.mean_ratio != k {
            return Err(format!("ideal k={k}: Cov {:e}, mean ratio {}", report.covariance, report.mean_ratio));
        }
    }
    Ok(format!("Cov {:.6} vs a·σ²·252 = {target:.6} ({z:+.2} SE); ideal panels exact", report.covariance_annualized()))
}

fn criterion_8() -> Check {
    let mut rng = Stream::new(8);
    let (mut equal, mut strict) = (0, 0);
    for i in 0..10_000 {
        let len = rng.int(1, 60);
        let returns: Vec<f64> = if i % 10 == 0 {
            vec![rng.range(-0.5, 0.5); len]
        } else {
            (0..len).map(|_| rng.range(-0.5, 0.5)).collect()
        };
        let g = geometric_daily(&returns).map_err(|e| e.to_string())?;
        let m = arithmetic_daily(&returns).map_err(|e| e.to_string())?;
        let all_equal = returns.iter().all(|r| *r == returns[0]);
        if all_equal {
            if g != m {
                return Err(format!("case {i}: constant series, geometric {g} != arithmetic {m}"));
            }
            equal += 1;
        } else {
            if g.is_nan() || g >= m {
                return Err(format!("case {i}: geometric {g} not below arithmetic {m}"));
            }
            strict += 1;
        }
    }
    Ok(format!("{equal} equal-return cases, {strict} strict"))
}

fn fixture_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn criterion_9() -> Check {
    let expected: toml::Table =
        std::fs::read_to_string(fixture_path("expected.toml")).map_err(|e| e.to_string())?.parse().map_err(|e: toml::de::Error| e.to_string())?;
    let num = |group: &str, name: &str, key: &str| -> f64 {
        match &expected[group][name][key] {
            toml::Value::Float(f) => *f,
            toml::Value::Integer(i) => *i as f64,
            other => panic!("{other:?}"),
        }
    };
    let names = ["index", "lev1", "lev2", "lev3"];
    let schema = Schema::prices("date", "close");
    let series = names
        .iter()
        .map(|n| {
            let bytes = std::fs::read(fixture_path(&format!("{n}.csv"))).map_err(|e| e.to_string())?;
            parse_table(&bytes, &schema, n).and_then(|t| t.into_returns()).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let panel = align(series).map_err(|e| e.to_string())?;
    let cfg = StatsConfig::default();
    let mut compared = 0;
    let mut check = |what: String, got: f64, want: f64| -> Result<(), String> {
        compared += 1;
        if (got - want).abs() <= 1e-12 * want.abs().max(1.0) {
            Ok(())
        } else {
            Err(format!("{what}: {got} vs {want}"))
        }
    };
    for s in panel.series() {
        let st = summarize(s, &cfg).map_err(|e| e.to_string())?;
        for (key, v) in [
            ("cumulative_return", st.cumulative_return),
            ("geometric_annualized", st.geometric_annualized),
            ("arithmetic_annualized", st.arithmetic_annualized),
            ("volatility_annualized", st.volatility_annualized),
            ("risk_adjusted", st.risk_adjusted),
        ] {
            check(format!("{} {key}", s.label()), v, num("summary", s.label(), key))?;
        }
    }
    for (name, k) in [("lev1", 1.0), ("lev2", 2.0), ("lev3", 3.0)] {
        let etf = panel.etf(name).unwrap();
        let ratios = return_ratios(panel.index(), etf, k, ZeroDayPolicy::default()).map_err(|e| e.to_string())?;
        let reports = [
            ("assign", decompose(&ratios, k, &cfg)),
            ("exclude", covariance_decomposition(panel.index(), etf, k, ZeroDayPolicy::exclude(), &cfg)),
            ("winsorized", winsorize_ratios(&ratios, 5.0, 95.0).and_then(|w| decompose(&w, k, &cfg))),
        ];
        for (group, report) in reports {
            let r = report.map_err(|e| e.to_string())?;
            for (key, v) in [
                ("mean_ratio", r.mean_ratio),
                ("ratio_volatility_annualized", r.ratio_volatility_annualized()),
                ("covariance_annualized", r.covariance_annualized()),
                ("residual_annualized", r.residual_annualized()),
                ("etf_geometric_annualized", r.etf_geometric_annualized),
                ("ideal_estimate_annualized", r.ideal_estimate_annualized),
                ("empirical_cl_estimate_annualized", r.empirical_cl_estimate_annualized),
                ("empirical_estimate_annualized", r.empirical_estimate_annualized),
            ] {
                check(format!("{group} {name} {key}"), v, num(group, name, key))?;
            }
        }
    }

    // Through the command line: delimited decomposition cells equal the oracle rounded to 3 decimals.
    let mut args: Vec<String> = vec!["levdrag".into(), "decompose".into(), "--schema".into(), "date=date,close=close".into()];
    for n in names {
        args.push("--input".into());
        args.push(format!("{n}={}", fixture_path(&format!("{n}.csv")).display()));
    }
    for e in ["lev1:1", "lev2:2", "lev3:3"] {
        args.extend(["--etf".into(), e.into()]);
    }
    args.extend(["--format".into(), "delimited".into()]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = levdrag::cli::run(&args, &mut out, &mut err);
    if code != 0 {
        return Err(format!("decompose exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    let (_, rows) = read_records(&out).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for row in rows.iter().filter(|r| r[0] == "decomposition" && r[2] != "index") {
        let key = match row[1].as_str() {
            "Covariance(λ, R)" => "covariance_annualized",
            "Zero-Day Residual" => "residual_annualized",
            "Volatility of Return Ratio" => "ratio_volatility_annualized",
            "Arithmetic Return" => "etf_mean_annualized",
            _ => continue,
        };
        let want = format!("{:.3}", num("assign", &row[2], key) * 100.0);
        if row[3] != want {
            return Err(format!("cli {} {}: {} vs {want}", row[2], row[1], row[3]));
        }
        cells += 1;
    }
    Ok(format!("{compared} values to 1e-12, {cells} rendered cells exact"))
}

/// Smallest value with at least `ceil(p·n/100)` observations at or below it.
fn brute_upper(values: &[f64], p: f64) -> f64 {
    let need = ((p / 100.0 * values.len() as f64).ceil() as usize).max(1);
    values.iter().copied().filter(|v| values.iter().filter(|w| *w <= v).count() >= need).fold(f64::INFINITY, f64::min)
}

/// Largest value with at least `n − floor(q·n/100)` observations at or above it.
fn brute_lower(values: &[f64], q: f64) -> f64 {
    let need = values.len() - (q / 100.0 * values.len() as f64).floor() as usize;
    values.iter().copied().filter(|v| values.iter().filter(|w| *w >= v).count() >= need).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_10() -> Check {
    let mut rng = Stream::new(10);
    for i in 0..1000 {
        let n = rng.int(1, 600);
        let values: Vec<f64> = (0..n).map(|_| 2.0 + rng.range(-1.0, 1.0) * rng.range(0.0, 3.0)).collect();
        let lo = rng.range(0.0, 20.0);
        let hi = rng.range(80.0, 100.0);
        let (b_lo, b_hi) = winsorize_bounds(&values, lo, hi).map_err(|e| e.to_string())?;
        let once = winsorize(&values, lo, hi).map_err(|e| e.to_string())?;
        let twice = winsorize(&once, lo, hi).map_err(|e| e.to_string())?;
        if once != twice {
            return Err(format!("series {i}: not idempotent"));
        }
        for (v, w) in values.iter().zip(&once) {
            let inside = *v >= b_lo && *v <= b_hi;
            if *w < b_lo || *w > b_hi || (inside && w != v) || (!inside && *w != b_lo && *w != b_hi) {
                return Err(format!("series {i}: {v} -> {w} with bounds [{b_lo}, {b_hi}]"));
            }
        }
    }
    let mut compared = 0;
    for n in 1..=20 {
        for trial in 0..25 {
            let values: Vec<f64> = (0..n).map(|_| (rng.range(0.0, 8.0)).floor() + if trial % 2 == 0 { rng.uniform() } else { 0.0 }).collect();
            for lo in [0.0, 1.0, 2.5, 5.0, 10.0, 25.0, 40.0] {
                for hi in [60.0, 75.0, 90.0, 95.0, 97.5, 99.0, 100.0] {
                    let got = winsorize(&values, lo, hi).map_err(|e| e.to_string())?;
                    let (blo, bhi) = (brute_lower(&values, lo), brute_upper(&values, hi));
                    let want: Vec<f64> = values.iter().map(|v| v.clamp(blo, bhi)).collect();
                    if got != want {
                        return Err(format!("n={n} ({lo},{hi}): {got:?} vs brute force {want:?}"));
                    }
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("1000 series idempotent and clamped; {compared} brute-force comparisons"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 constant-leverage estimates from scalar inputs", criterion_1, Duration::from_secs(1)),
        ("2 empirical estimates from scalar inputs", criterion_2, Duration::from_secs(1)),
        ("3 covariance from scalar inputs", criterion_3, Duration::from_secs(1)),
        ("4 summary-table consistency", criterion_4, Duration::from_secs(1)),
        ("5 decomposition identity over 1000 scenarios", criterion_5, Duration::from_secs(60)),
        ("6 cubic bound on the log approximation error", criterion_6, Duration::from_secs(1)),
        ("7 simulator covariance recovery", criterion_7, Duration::from_secs(10)),
        ("8 geometric mean never exceeds arithmetic mean", criterion_8, Duration::MAX),
        ("9 synthetic fixture reproduction", criterion_9, Duration::MAX),
        ("10 winsorization properties", criterion_10, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| deadline(elapsed, limit).map(|()| detail));
        match result {
            Ok(detail) => println!("PASS  criterion {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
