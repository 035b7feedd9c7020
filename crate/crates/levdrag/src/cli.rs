//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for data
//! and IO errors. Reports go to stdout (or `--out`), messages to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levdrag_core::{
    align, covariance_decomposition, decompose, leverage_curve, return_ratios, simulate, summarize,
    validate_decomposition, winsorize_bounds, winsorize_ratios, AlignedPanel, DecompositionReport, LeverageGrid,
    RatioSeries, ReturnSeries, StatsConfig, SummaryStats,
};
use sha2::{Digest, Sha256};

use crate::config::{self, ConfigLayer, RunConfig};
use crate::figure::{self, FigureKind};
use crate::ingest::{parse_table, write_returns};
use crate::report::{self, Cell, Format, InputDigest, ReportBundle, Row, RunMeta};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "levdrag", version, about = "Volatility drag and leverage-timing decomposition for levered ETFs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-instrument summary statistics.
    Summarize(RunArgs),
    /// Estimator comparison and return-ratio covariance decomposition per ETF.
    Decompose(RunArgs),
    /// Constant-leverage geometric return estimates from scalar inputs.
    Estimate(EstimateArgs),
    /// Decomposition with winsorized return ratios.
    Winsorize(RunArgs),
    /// Generate a synthetic index/ETF panel and validate the decomposition on it.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Write figure point data (.csv) and graphics (.svg).
    Figures {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        fig: FigureArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input file as `label=path` or `path` (label = file stem). Repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<String>,
    /// Column mapping, e.g. `date=date,ret=ret` or `date=Date,close=Close`.
    #[arg(long)]
    pub schema: Option<String>,
    /// Label of the index input (default: first input).
    #[arg(long)]
    pub index: Option<String>,
    /// ETF label and target multiple, `label:k`. Repeatable.
    #[arg(long = "etf", allow_hyphen_values = true)]
    pub etfs: Vec<String>,
    /// Trading days per year.
    #[arg(long)]
    pub annualization: Option<u32>,
    /// Variance divisor: population or sample.
    #[arg(long)]
    pub normalization: Option<String>,
    /// Treatment of days with a zero index return: assign or exclude.
    #[arg(long = "zero-policy")]
    pub zero_policy: Option<String>,
    /// Index returns with absolute value at or below this count as zero days.
    #[arg(long = "zero-threshold")]
    pub zero_threshold: Option<f64>,
    /// Winsorization percentiles `lo,hi`.
    #[arg(long)]
    pub winsor: Option<String>,
    /// plain, delimited or structured.
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub days: Option<usize>,
    /// normal or bootstrap (resamples the index input).
    #[arg(long = "index-model")]
    pub index_model: Option<String>,
    /// Daily index mean, decimal.
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<f64>,
    /// Daily index volatility, decimal.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Target multiple k.
    #[arg(long, allow_hyphen_values = true)]
    pub leverage: Option<f64>,
    /// Timing coefficient a in λ = k + a·R + ε.
    #[arg(long, allow_hyphen_values = true)]
    pub timing: Option<f64>,
    /// Standard deviation of ε.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long = "zero-day-probability")]
    pub zero_day_probability: Option<f64>,
    #[arg(long = "zero-day-sigma")]
    pub zero_day_sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// scatter, cumulative, leverage_curve or ratio_cloud. Repeatable; default: all that the inputs allow.
    #[arg(long = "figure")]
    pub figures: Vec<String>,
    /// Annualized index mean (%) for the leverage curve; default: from the index input.
    #[arg(long = "E", allow_hyphen_values = true)]
    pub mean: Option<f64>,
    /// Annualized index volatility (%) for the leverage curve.
    #[arg(long = "V")]
    pub volatility: Option<f64>,
    #[arg(long = "max-leverage", default_value_t = 4.0)]
    pub max_leverage: f64,
    #[arg(long = "leverage-step", default_value_t = 0.01)]
    pub leverage_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Annualized arithmetic index return, percent.
    #[arg(long = "E", allow_hyphen_values = true)]
    pub mean: f64,
    /// Annualized index volatility, percent.
    #[arg(long = "V")]
    pub volatility: f64,
    /// Target multiples (repeatable or comma separated).
    #[arg(long = "k", value_delimiter = ',', allow_hyphen_values = true)]
    pub multiples: Vec<f64>,
    /// Realized mean return ratios (repeatable or comma separated).
    #[arg(long = "ratio", value_delimiter = ',', allow_hyphen_values = true)]
    pub ratios: Vec<f64>,
    #[arg(long)]
    pub annualization: Option<u32>,
    #[arg(long)]
    pub format: Option<String>,
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn usage(message: impl Into<String>) -> Error {
    Error::Usage(message.into())
}

impl RunArgs {
    fn layer(&self) -> Result<ConfigLayer> {
        let winsor = self
            .winsor
            .as_deref()
            .map(|w| {
                let bad = || usage(format!("--winsor expects lo,hi percentiles, got `{w}`"));
                let (lo, hi) = w.split_once(',').ok_or_else(bad)?;
                Ok::<_, Error>([lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?])
            })
            .transpose()?;
        let normalization = match self.normalization.as_deref() {
            None => None,
            Some("population") => Some(config::NormalizationChoice::Population),
            Some("sample") => Some(config::NormalizationChoice::Sample),
            Some(o) => return Err(usage(format!("--normalization expects population or sample, got `{o}`"))),
        };
        Ok(ConfigLayer {
            inputs: (!self.inputs.is_empty()).then(|| self.inputs.clone()),
            schema: self.schema.clone(),
            index: self.index.clone(),
            etfs: (!self.etfs.is_empty()).then(|| self.etfs.clone()),
            annualization_factor: self.annualization,
            normalization,
            zero_policy: self.zero_policy.as_deref().map(str::parse).transpose()?,
            zero_threshold: self.zero_threshold,
            winsor,
            out: self.out.clone(),
            format: self.format.clone(),
            seed: self.seed,
            ..Default::default()
        })
    }

    fn resolve(&self, subcommand: &str, extra: ConfigLayer) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => config::load_layer(path)?,
            None => ConfigLayer::default(),
        };
        Ok(RunConfig::resolve(subcommand, file.overlay(self.layer()?.overlay(extra)))?)
    }
}

impl SimArgs {
    fn layer(&self) -> Result<ConfigLayer> {
        let index_model = match self.index_model.as_deref() {
            None => None,
            Some("normal") => Some(config::IndexModelChoice::Normal),
            Some("bootstrap") => Some(config::IndexModelChoice::Bootstrap),
            Some(o) => return Err(usage(format!("--index-model expects normal or bootstrap, got `{o}`"))),
        };
        Ok(ConfigLayer {
            days: self.days,
            index_model,
            mean: self.mean,
            sigma: self.sigma,
            leverage: self.leverage,
            timing: self.timing,
            noise: self.noise,
            zero_day_probability: self.zero_day_probability,
            zero_day_sigma: self.zero_day_sigma,
            ..Default::default()
        })
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Summarize(args) => {
            let cfg = args.resolve("summarize", ConfigLayer::default())?;
            let data = load(&cfg, false)?;
            let stats = summaries(&data.series, &cfg.stats_config())?;
            let bundle = bundle(&cfg, &data, vec![report::summary_table(&stats)]);
            emit(&cfg, &bundle, stdout, stderr)
        }
        Command::Decompose(args) => {
            let cfg = args.resolve("decompose", ConfigLayer::default())?;
            let data = load(&cfg, true)?;
            let config = cfg.stats_config();
            let index = index_summary(&data, &config)?;
            let reports = decompositions(&cfg, &data)?;
            let mut tables = vec![
                report::estimates_table(&index, &reports, &config)?,
                report::decomposition_table(&index, &reports, None),
            ];
            if let Some([lo, hi]) = cfg.winsor {
                tables.push(winsorized_table(&cfg, &data, &index, lo, hi)?);
            }
            let bundle = bundle(&cfg, &data, tables);
            emit(&cfg, &bundle, stdout, stderr)
        }
        Command::Winsorize(args) => {
            let cfg = args.resolve("winsorize", ConfigLayer::default())?;
            let data = load(&cfg, true)?;
            let index = index_summary(&data, &cfg.stats_config())?;
            let [lo, hi] = cfg.winsor.unwrap_or([5.0, 95.0]);
            let table = winsorized_table(&cfg, &data, &index, lo, hi)?;
            let bundle = bundle(&cfg, &data, vec![table]);
            emit(&cfg, &bundle, stdout, stderr)
        }
        Command::Estimate(args) => estimate(args, stdout),
        Command::Simulate { run, sim } => {
            let cfg = run.resolve("simulate", sim.layer()?)?;
            simulate_command(&cfg, stdout, stderr)
        }
        Command::Figures { run, fig } => {
            let cfg = run.resolve("figures", ConfigLayer::default())?;
            figures_command(&cfg, &fig, stdout, stderr)
        }
    }
}

/// Loaded, aligned inputs and their digests.
struct Loaded {
    /// Aligned series, index first.
    series: Vec<ReturnSeries>,
    /// `None` for a lone index input.
    panel: Option<AlignedPanel>,
    digests: Vec<InputDigest>,
    /// Target multiple for each ETF in panel order (when given).
    multiples: Vec<Option<f64>>,
}

fn load(cfg: &RunConfig, need_etfs: bool) -> Result<Loaded> {
    if cfg.inputs.is_empty() {
        return Err(usage(format!("{} needs at least one --input", cfg.subcommand)));
    }
    if need_etfs && cfg.etfs.is_empty() {
        return Err(usage(format!("{} needs at least one --etf label:k", cfg.subcommand)));
    }
    let mut series: Vec<ReturnSeries> = Vec::new();
    let mut digests = Vec::new();
    for input in &cfg.inputs {
        if series.iter().any(|s| s.label() == input.label) {
            return Err(usage(format!("input label `{}` given twice", input.label)));
        }
        let bytes = fs::read(&input.path).map_err(|e| Error::io(&input.path, e))?;
        digests.push(InputDigest {
            label: input.label.clone(),
            path: input.path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        let wrap = |source| Error::Input { path: input.path.clone(), source };
        let table = parse_table(&bytes, &cfg.schema, &input.label).map_err(wrap)?;
        series.push(table.into_returns().map_err(wrap)?);
    }
    let take = |series: &mut Vec<ReturnSeries>, label: &str, role: &str| {
        series
            .iter()
            .position(|s| s.label() == label)
            .map(|i| series.remove(i))
            .ok_or_else(|| usage(format!("{role} label `{label}` matches no input")))
    };
    let index_label = cfg.index.clone().unwrap_or_else(|| cfg.inputs[0].label.clone());
    let mut ordered = vec![take(&mut series, &index_label, "index")?];
    let mut multiples = Vec::new();
    for etf in &cfg.etfs {
        ordered.push(take(&mut series, &etf.label, "ETF")?);
        multiples.push(Some(etf.multiple));
    }
    if !need_etfs && cfg.etfs.is_empty() {
        multiples.extend(series.iter().map(|_| None));
        ordered.append(&mut series);
    }
    if ordered.len() == 1 {
        return Ok(Loaded { series: ordered, panel: None, digests, multiples });
    }
    let panel = align(ordered)?;
    for (s, dropped) in panel.series().zip(panel.dropped()).filter(|(_, d)| **d > 0) {
        eprintln!("note: {dropped} rows of `{}` fall outside the common dates and were dropped", s.label());
    }
    Ok(Loaded { series: panel.series().cloned().collect(), panel: Some(panel), digests, multiples })
}

impl Loaded {
    fn index(&self) -> &ReturnSeries {
        &self.series[0]
    }

    fn panel(&self) -> &AlignedPanel {
        self.panel.as_ref().expect("ETF inputs present")
    }
}

fn summaries(series: &[ReturnSeries], config: &StatsConfig) -> Result<Vec<(String, SummaryStats)>> {
    series.iter().map(|s| Ok((s.label().to_string(), summarize(s, config)?))).collect()
}

fn index_summary(data: &Loaded, config: &StatsConfig) -> Result<(String, SummaryStats)> {
    Ok((data.index().label().to_string(), summarize(data.index(), config)?))
}

fn etf_multiples(data: &Loaded) -> impl Iterator<Item = (&ReturnSeries, f64)> {
    data.series[1..].iter().zip(&data.multiples).filter_map(|(s, k)| k.map(|k| (s, k)))
}

fn decompositions(cfg: &RunConfig, data: &Loaded) -> Result<Vec<(String, DecompositionReport)>> {
    let config = cfg.stats_config();
    let policy = cfg.zero_day_policy();
    etf_multiples(data)
        .map(|(etf, k)| {
            let report = covariance_decomposition(data.index(), etf, k, policy, &config)?;
            Ok((etf.label().to_string(), report))
        })
        .collect()
}

fn ratio_series(cfg: &RunConfig, data: &Loaded) -> Result<Vec<(String, f64, RatioSeries)>> {
    let policy = cfg.zero_day_policy();
    etf_multiples(data)
        .map(|(etf, k)| Ok((etf.label().to_string(), k, return_ratios(data.index(), etf, k, policy)?)))
        .collect()
}

fn winsorized_table(
    cfg: &RunConfig,
    data: &Loaded,
    index: &(String, SummaryStats),
    lo: f64,
    hi: f64,
) -> Result<report::TableView> {
    let config = cfg.stats_config();
    let mut reports = Vec::new();
    let mut bounds = Vec::new();
    for (label, k, ratios) in ratio_series(cfg, data)? {
        bounds.push(winsorize_bounds(ratios.ratios(), lo, hi)?);
        reports.push((label, decompose(&winsorize_ratios(&ratios, lo, hi)?, k, &config)?));
    }
    let mut table = report::decomposition_table(index, &reports, Some((lo, hi)));
    let first = |c| std::iter::once(Cell::Ratio(c));
    table.rows.push(Row {
        metric: "Lower Ratio Bound".into(),
        cells: first(1.0).chain(bounds.iter().map(|b| Cell::Ratio(b.0))).collect(),
    });
    table.rows.push(Row {
        metric: "Upper Ratio Bound".into(),
        cells: first(1.0).chain(bounds.iter().map(|b| Cell::Ratio(b.1))).collect(),
    });
    Ok(table)
}

fn bundle(cfg: &RunConfig, data: &Loaded, tables: Vec<report::TableView>) -> ReportBundle {
    ReportBundle {
        tables,
        figure_datasets: Vec::new(),
        meta: Some(RunMeta { run: cfg.clone(), inputs: data.digests.clone() }),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `<out>/<subcommand>.<ext>` when `--out` is set, otherwise prints.
fn emit(cfg: &RunConfig, bundle: &ReportBundle, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let bytes = report::render_tables(bundle, cfg.format)?;
    match &cfg.out {
        Some(dir) => {
            let path = dir.join(format!("{}.{}", cfg.subcommand, cfg.format.extension()));
            write_file(&path, &bytes)?;
            let _ = writeln!(stderr, "wrote {}", path.display());
            Ok(())
        }
        None => stdout.write_all(&bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn estimate(args: EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = match args.annualization {
        Some(f) => StatsConfig::with_factor(f64::from(f))?,
        None => StatsConfig::default(),
    };
    let format: Format = args.format.as_deref().unwrap_or("plain").parse()?;
    let multiples = if args.multiples.is_empty() && args.ratios.is_empty() { vec![1.0, 2.0, 3.0] } else { args.multiples };
    let table =
        report::scalar_estimates_table(args.mean / 100.0, args.volatility / 100.0, &multiples, &args.ratios, &config)?;
    let bundle = ReportBundle { tables: vec![table], ..Default::default() };
    stdout.write_all(&report::render_tables(&bundle, format)?).map_err(|e| Error::io("<stdout>", e))
}

fn simulate_command(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let source = match cfg.simulation.index_model {
        config::IndexModelChoice::Bootstrap => {
            let data = load(cfg, false)?;
            Some(data.index().returns().to_vec())
        }
        config::IndexModelChoice::Normal => None,
    };
    let scenario = cfg.scenario(source)?;
    let sim = simulate(&scenario)?;
    let records = validate_decomposition(&sim.panel, scenario.target_multiple)?;
    let mut text = format!(
        "days {}\ntarget multiple {}\ntiming coefficient {}\nratio noise sigma {}\nseed {}\nclipped returns {}\nzero days {}\n",
        scenario.days,
        scenario.target_multiple,
        scenario.timing_coefficient,
        scenario.ratio_noise_sigma,
        scenario.seed,
        sim.clipped,
        sim.zero_days
    );
    for r in &records {
        text.push_str(&format!(
            "{}: identity residual {:e}, exact geometric {:e}, approximate geometric {:e}, gap {:e}, cubic bound {:e}{}\n",
            r.label,
            r.identity_residual,
            r.exact_geometric,
            r.approx_geometric,
            r.approximation_gap,
            r.taylor_bound,
            if r.flagged { ", FLAGGED" } else { "" }
        ));
    }
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    if let Some(dir) = &cfg.out {
        for s in sim.panel.series() {
            let path = dir.join(format!("{}.csv", s.label()));
            write_file(&path, write_returns(s).as_bytes())?;
            let _ = writeln!(stderr, "wrote {}", path.display());
        }
    }
    if records.iter().any(|r| r.flagged) {
        return Err(Error::Core(levdrag_core::Error::InvalidParameter {
            name: "identity_residual",
            value: records.iter().map(|r| r.identity_residual.abs()).fold(0.0, f64::max),
        }));
    }
    Ok(())
}

fn figures_command(cfg: &RunConfig, fig: &FigureArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let requested: Vec<FigureKind> = fig.figures.iter().map(|f| f.parse()).collect::<Result<_>>()?;
    let scalar_curve = match (fig.mean, fig.volatility) {
        (Some(e), Some(v)) => Some((e / 100.0, v / 100.0)),
        (None, None) => None,
        _ => return Err(usage("--E and --V must be given together")),
    };
    let data = if cfg.inputs.is_empty() { None } else { Some(load(cfg, false)?) };
    let has_ratios = data.as_ref().is_some_and(|d| d.multiples.iter().any(Option::is_some));
    let has_etfs = data.as_ref().is_some_and(|d| d.panel.is_some());
    let available = |k: FigureKind| match k {
        FigureKind::Scatter => has_etfs,
        FigureKind::Cumulative => data.is_some(),
        FigureKind::LeverageCurve => data.is_some() || scalar_curve.is_some(),
        FigureKind::RatioCloud => has_ratios,
    };
    let kinds = if requested.is_empty() {
        FigureKind::ALL.into_iter().filter(|k| available(*k)).collect()
    } else {
        if let Some(k) = requested.iter().find(|k| !available(**k)) {
            let need = match k {
                FigureKind::Scatter => "an index and at least one ETF input",
                FigureKind::Cumulative => "at least one input",
                FigureKind::LeverageCurve => "an index input or --E and --V",
                FigureKind::RatioCloud => "at least one --etf label:k",
            };
            return Err(usage(format!("figure {} needs {need}", k.name())));
        }
        requested
    };
    if kinds.is_empty() {
        return Err(usage("figures needs --input files or --E and --V"));
    }
    let config = cfg.stats_config();
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let mut bundle = ReportBundle::default();
    for kind in kinds {
        let dataset = match kind {
            FigureKind::Scatter => figure::scatter(data.as_ref().expect("checked").panel()),
            FigureKind::Cumulative => figure::cumulative(&data.as_ref().expect("checked").series)?,
            FigureKind::LeverageCurve => {
                let (e, v, label) = match (scalar_curve, &data) {
                    (Some((e, v)), _) => (e, v, "constant leverage".to_string()),
                    (None, Some(d)) => {
                        let s = summarize(d.index(), &config)?;
                        (s.arithmetic_annualized, s.volatility_annualized, d.index().label().to_string())
                    }
                    (None, None) => unreachable!("checked"),
                };
                let grid = LeverageGrid { start: 0.0, end: fig.max_leverage, step: fig.leverage_step };
                figure::leverage_curve(&leverage_curve(e, v, grid, &config)?, &label)
            }
            FigureKind::RatioCloud => {
                let d = data.as_ref().expect("checked");
                figure::ratio_cloud(&ratio_series(cfg, d)?, d.index().label())
            }
        };
        let (csv, svg) = figure::emit_figure(&dataset, &dir)?;
        let _ = writeln!(stdout, "{}\n{}", csv.display(), svg.display());
        bundle.figure_datasets.push(dataset);
    }
    if cfg.format == Format::Structured {
        bundle.meta = Some(RunMeta { run: cfg.clone(), inputs: data.map(|d| d.digests).unwrap_or_default() });
        let path = dir.join("figures.toml");
        write_file(&path, &report::render_tables(&bundle, Format::Structured)?)?;
        let _ = writeln!(stderr, "wrote {}", path.display());
    }
    Ok(())
}
