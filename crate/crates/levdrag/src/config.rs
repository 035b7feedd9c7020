//! Run configuration: a flat TOML file of `key = value` pairs, overridden by
//! command-line flags.
//!
//! ```toml
//! inputs = ["index=spx.csv", "SSO=sso.csv"]
//! schema = "date=date,close=close"
//! index = "index"
//! etfs = ["SSO:2"]
//! annualization_factor = 252
//! zero_policy = "assign"
//! winsor = [5.0, 95.0]
//! format = "structured"
//! seed = 7
//! leverage = 2.0
//! ```
//!
//! Relative input paths in a file are resolved against the file's directory.
//! Simulator keys (`days`, `mean`, `sigma`, `leverage`, `timing`, `noise`,
//! `zero_day_probability`, `zero_day_sigma`) take daily decimal fractions.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use levdrag_core::{
    IndexModel, LeverageScenario, Normalization, StatsConfig, ZeroDayMode, ZeroDayPolicy,
};
use serde::{Deserialize, Serialize, Serializer};

use crate::ingest::Schema;
use crate::report::Format;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown config key `{key}`{}; valid keys: {}", suggestion_text(.suggestion), VALID_KEYS.join(", "))]
    UnknownKey { key: String, suggestion: Option<String> },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|k| format!(" (did you mean `{k}`?)")).unwrap_or_default()
}

pub const VALID_KEYS: [&str; 21] = [
    "inputs",
    "schema",
    "index",
    "etfs",
    "annualization_factor",
    "normalization",
    "zero_policy",
    "zero_threshold",
    "winsor",
    "out",
    "format",
    "seed",
    "days",
    "index_model",
    "mean",
    "sigma",
    "leverage",
    "timing",
    "noise",
    "zero_day_probability",
    "zero_day_sigma",
];

/// Closest valid key by Damerau-Levenshtein distance, if reasonably close.
pub fn suggest_key(key: &str) -> Option<&'static str> {
    VALID_KEYS
        .iter()
        .map(|k| (strsim::damerau_levenshtein(key, k), *k))
        .min()
        .filter(|(d, k)| *d <= (k.len() / 3).max(2))
        .map(|(_, k)| k)
}

/// `label=path`, or a bare path labelled by its file stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputSpec {
    pub label: String,
    pub path: PathBuf,
}

impl FromStr for InputSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (label, path) = match s.split_once('=') {
            Some((l, p)) if !l.is_empty() && !p.is_empty() => (l.to_string(), PathBuf::from(p)),
            Some(_) => return Err(invalid("inputs", format!("`{s}` is not label=path"))),
            None => {
                let path = PathBuf::from(s);
                let stem = path.file_stem().and_then(|x| x.to_str()).unwrap_or_default().to_string();
                if stem.is_empty() {
                    return Err(invalid("inputs", format!("`{s}` has no file name")));
                }
                (stem, path)
            }
        };
        Ok(Self { label, path })
    }
}

/// `label:k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtfSpec {
    pub label: String,
    pub multiple: f64,
}

impl FromStr for EtfSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let bad = || invalid("etfs", format!("`{s}` is not label:multiple"));
        let (label, k) = s.rsplit_once(':').ok_or_else(bad)?;
        let multiple: f64 = k.trim().parse().map_err(|_| bad())?;
        if label.is_empty() || !multiple.is_finite() {
            return Err(bad());
        }
        Ok(Self { label: label.to_string(), multiple })
    }
}

impl fmt::Display for EtfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.multiple)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationChoice {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroPolicyChoice {
    #[default]
    Assign,
    Exclude,
}

impl FromStr for ZeroPolicyChoice {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "assign" => Ok(Self::Assign),
            "exclude" => Ok(Self::Exclude),
            other => Err(invalid("zero_policy", format!("`{other}` (expected assign or exclude)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexModelChoice {
    #[default]
    Normal,
    /// Resample the index input's returns.
    Bootstrap,
}

/// One source of settings; every field optional. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub inputs: Option<Vec<String>>,
    pub schema: Option<String>,
    pub index: Option<String>,
    pub etfs: Option<Vec<String>>,
    pub annualization_factor: Option<u32>,
    pub normalization: Option<NormalizationChoice>,
    pub zero_policy: Option<ZeroPolicyChoice>,
    pub zero_threshold: Option<f64>,
    pub winsor: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub days: Option<usize>,
    pub index_model: Option<IndexModelChoice>,
    pub mean: Option<f64>,
    pub sigma: Option<f64>,
    pub leverage: Option<f64>,
    pub timing: Option<f64>,
    pub noise: Option<f64>,
    pub zero_day_probability: Option<f64>,
    pub zero_day_sigma: Option<f64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        ConfigLayer { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ConfigLayer {
    pub fn overlay(self, top: ConfigLayer) -> ConfigLayer {
        let base = self;
        overlay!(base, top; inputs, schema, index, etfs, annualization_factor, normalization, zero_policy,
            zero_threshold, winsor, out, format, seed, days, index_model, mean, sigma, leverage, timing, noise,
            zero_day_probability, zero_day_sigma)
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
        if let Some(key) = table.keys().find(|k| !VALID_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey { key: key.clone(), suggestion: suggest_key(key).map(String::from) });
        }
        let mut layer: ConfigLayer = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(inputs) = &mut layer.inputs {
            for raw in inputs.iter_mut() {
                let spec: InputSpec = raw.parse()?;
                if spec.path.is_relative() && !base.as_os_str().is_empty() {
                    *raw = format!("{}={}", spec.label, base.join(&spec.path).display());
                }
            }
        }
        if let Some(out) = &mut layer.out {
            if out.is_relative() && !base.as_os_str().is_empty() {
                *out = base.join(&*out);
            }
        }
        Ok(layer)
    }
}

/// Simulator settings, daily decimal fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub days: usize,
    pub index_model: IndexModelChoice,
    pub mean: f64,
    pub sigma: f64,
    pub leverage: f64,
    pub timing: f64,
    pub noise: f64,
    pub zero_day_probability: f64,
    pub zero_day_sigma: f64,
}

fn display<T: fmt::Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

/// TOML integers are signed 64-bit; larger seeds are written as strings.
fn seed_value<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(*seed) {
        Ok(v) => s.serialize_i64(v),
        Err(_) => s.collect_str(seed),
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<InputSpec>,
    #[serde(serialize_with = "display")]
    pub schema: Schema,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    pub etfs: Vec<EtfSpec>,
    pub annualization_factor: u32,
    pub normalization: NormalizationChoice,
    pub zero_policy: ZeroPolicyChoice,
    pub zero_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winsor: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(serialize_with = "seed_value")]
    pub seed: u64,
    pub simulation: SimulationConfig,
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

impl RunConfig {
    pub fn resolve(subcommand: &str, layer: ConfigLayer) -> Result<Self, ConfigError> {
        let defaults = LeverageScenario::default();
        let (default_mean, default_sigma) = match defaults.index_model {
            IndexModel::Normal { mean, sigma } => (mean, sigma),
            IndexModel::Bootstrap(_) => unreachable!("default scenario is normal"),
        };
        let inputs = layer.inputs.unwrap_or_default().iter().map(|s| s.parse()).collect::<Result<Vec<InputSpec>, _>>()?;
        let etfs = layer.etfs.unwrap_or_default().iter().map(|s| s.parse()).collect::<Result<Vec<EtfSpec>, _>>()?;
        let schema = match layer.schema {
            Some(s) => s.parse().map_err(|e: crate::ingest::IngestError| invalid("schema", e.to_string()))?,
            None => Schema::default(),
        };
        let format = match layer.format {
            Some(f) => f.parse().map_err(|e: crate::Error| invalid("format", e.to_string()))?,
            None => Format::default(),
        };
        let annualization_factor = layer.annualization_factor.unwrap_or(252);
        if annualization_factor == 0 {
            return Err(invalid("annualization_factor", "must be positive"));
        }
        let zero_threshold = layer.zero_threshold.unwrap_or(ZeroDayPolicy::default().threshold);
        if !zero_threshold.is_finite() || zero_threshold < 0.0 {
            return Err(invalid("zero_threshold", format!("{zero_threshold} (must be finite and >= 0)")));
        }
        if let Some([lo, hi]) = layer.winsor {
            if !(0.0 <= lo && lo < hi && hi <= 100.0) {
                return Err(invalid("winsor", format!("{lo},{hi} (need 0 <= lo < hi <= 100)")));
            }
        }
        Ok(Self {
            subcommand: subcommand.into(),
            inputs,
            schema,
            index: layer.index,
            etfs,
            annualization_factor,
            normalization: layer.normalization.unwrap_or_default(),
            zero_policy: layer.zero_policy.unwrap_or_default(),
            zero_threshold,
            winsor: layer.winsor,
            out: layer.out,
            format,
            seed: layer.seed.unwrap_or(defaults.seed),
            simulation: SimulationConfig {
                days: layer.days.unwrap_or(defaults.days),
                index_model: layer.index_model.unwrap_or_default(),
                mean: layer.mean.unwrap_or(default_mean),
                sigma: layer.sigma.unwrap_or(default_sigma),
                leverage: layer.leverage.unwrap_or(defaults.target_multiple),
                timing: layer.timing.unwrap_or(defaults.timing_coefficient),
                noise: layer.noise.unwrap_or(defaults.ratio_noise_sigma),
                zero_day_probability: layer.zero_day_probability.unwrap_or(defaults.zero_day_probability),
                zero_day_sigma: layer.zero_day_sigma.unwrap_or(defaults.zero_day_etf_sigma),
            },
        })
    }

    pub fn stats_config(&self) -> StatsConfig {
        StatsConfig {
            annualization_factor: f64::from(self.annualization_factor),
            normalization: match self.normalization {
                NormalizationChoice::Population => Normalization::Population,
                NormalizationChoice::Sample => Normalization::Sample,
            },
        }
    }

    pub fn zero_day_policy(&self) -> ZeroDayPolicy {
        ZeroDayPolicy {
            threshold: self.zero_threshold,
            mode: match self.zero_policy {
                ZeroPolicyChoice::Assign => ZeroDayMode::AssignTarget,
                ZeroPolicyChoice::Exclude => ZeroDayMode::Exclude,
            },
        }
    }

    /// Simulator scenario; `bootstrap_source` is used when the index model is bootstrap.
    pub fn scenario(&self, bootstrap_source: Option<Vec<f64>>) -> Result<LeverageScenario, ConfigError> {
        let sim = &self.simulation;
        let index_model = match (sim.index_model, bootstrap_source) {
            (IndexModelChoice::Normal, _) => IndexModel::Normal { mean: sim.mean, sigma: sim.sigma },
            (IndexModelChoice::Bootstrap, Some(source)) => IndexModel::Bootstrap(source),
            (IndexModelChoice::Bootstrap, None) => {
                return Err(invalid("index_model", "bootstrap needs an index input to resample"))
            }
        };
        Ok(LeverageScenario {
            days: sim.days,
            index_model,
            target_multiple: sim.leverage,
            ratio_noise_sigma: sim.noise,
            timing_coefficient: sim.timing,
            seed: self.seed,
            zero_day_probability: sim.zero_day_probability,
            zero_day_etf_sigma: sim.zero_day_sigma,
            ..LeverageScenario::default()
        })
    }
}

pub fn load_layer(path: &Path) -> Result<ConfigLayer, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    ConfigLayer::from_toml(&text, path)
}

/// Resolves a config file on its own; the CLI overlays its flags with [`ConfigLayer::overlay`] first.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    RunConfig::resolve("", load_layer(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(text: &str) -> Result<ConfigLayer, ConfigError> {
        ConfigLayer::from_toml(text, Path::new("run.toml"))
    }

    #[test]
    fn file_value_used_without_flag() {
        let cfg = RunConfig::resolve("summarize", layer("annualization_factor = 260").unwrap()).unwrap();
        assert_eq!(cfg.stats_config().annualization_factor, 260.0);
    }

    #[test]
    fn flags_win() {
        let file = layer("annualization_factor = 260\nseed = 3").unwrap();
        let flags = ConfigLayer { annualization_factor: Some(250), ..Default::default() };
        let cfg = RunConfig::resolve("summarize", file.overlay(flags)).unwrap();
        assert_eq!(cfg.annualization_factor, 250);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn empty_file_and_flags() {
        let flags = ConfigLayer { etfs: Some(vec!["SSO:2".into()]), index: Some("spx".into()), ..Default::default() };
        let cfg = RunConfig::resolve("decompose", layer("").unwrap().overlay(flags)).unwrap();
        assert_eq!(cfg.etfs, vec![EtfSpec { label: "SSO".into(), multiple: 2.0 }]);
        assert_eq!(cfg.index.as_deref(), Some("spx"));
    }

    #[test]
    fn unknown_key_suggests() {
        let err = layer("levrage = 2").unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownKey { suggestion: Some(s), .. } if s == "leverage"));
        let msg = err.to_string();
        assert!(msg.contains("did you mean `leverage`"), "{msg}");
        assert!(msg.contains("annualization_factor"));
        assert_eq!(suggest_key("zzzzzzzzzzzzzzzz"), None);
    }

    #[test]
    fn wrong_type_is_parse_error() {
        assert!(matches!(layer("seed = \"x\""), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn specs_parse() {
        let i: InputSpec = "spx=data/spx.csv".parse().unwrap();
        assert_eq!(i.label, "spx");
        let i: InputSpec = "data/sso.csv".parse().unwrap();
        assert_eq!(i.label, "sso");
        let e: EtfSpec = "UPRO:3".parse().unwrap();
        assert_eq!(e.multiple, 3.0);
        assert!("UPRO".parse::<EtfSpec>().is_err());
        assert!("UPRO:x".parse::<EtfSpec>().is_err());
    }

    #[test]
    fn relative_inputs_follow_file() {
        let l = ConfigLayer::from_toml("inputs = [\"a=x.csv\"]", Path::new("/tmp/cfg/run.toml")).unwrap();
        assert_eq!(l.inputs.unwrap(), vec!["a=/tmp/cfg/x.csv".to_string()]);
    }

    #[test]
    fn bad_values_rejected() {
        for text in ["winsor = [95.0, 5.0]", "annualization_factor = 0", "zero_threshold = -1.0", "format = \"xml\""] {
            assert!(matches!(RunConfig::resolve("x", layer(text).unwrap()), Err(ConfigError::Invalid { .. })), "{text}");
        }
    }
}
