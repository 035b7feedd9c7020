//! Synthetic index/ETF panels with a controllable leverage-timing effect.
//!
//! Each day draws an index return `R_t` and sets the ETF return to
//! `(k + a·R_t + ε_t)·R_t` with `ε_t ~ N(0, σ_ε²)`, so the pathwise
//! `Cov(λ, R)` is `a·Var(R)` plus sampling noise. The generator is ChaCha8
//! seeded from the scenario's 64-bit seed, with normal draws from the
//! ziggurat sampler of `rand_distr`; the draw order per day is fixed
//! (index, zero-day coin, ratio noise, zero-day ETF noise), so a seed
//! reproduces the same panel on every platform.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform, Uniform};

use crate::series::default_start;
use crate::{
    align, approx_geometric, arithmetic_daily, geometric_daily, return_ratios, volatility_daily, weekday_calendar,
    AlignedPanel, Error, Normalization, Result, ReturnSeries, StatsConfig, ZeroDayPolicy,
};

/// Lower bound applied to every generated return.
pub const RETURN_FLOOR: f64 = -0.99;

#[derive(Debug, Clone, PartialEq)]
pub enum IndexModel {
    /// IID normal daily returns.
    Normal { mean: f64, sigma: f64 },
    /// Resample with replacement from an observed return history.
    Bootstrap(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageScenario {
    pub days: usize,
    pub index_model: IndexModel,
    pub target_multiple: f64,
    pub ratio_noise_sigma: f64,
    /// `a` in `λ_t = k + a·R_t + ε_t`.
    pub timing_coefficient: f64,
    pub seed: u64,
    /// Probability that a day's index return is forced to exactly zero.
    pub zero_day_probability: f64,
    /// ETF return noise on forced zero days.
    pub zero_day_etf_sigma: f64,
    pub start: NaiveDate,
    pub index_label: String,
    pub etf_label: String,
}

impl Default for LeverageScenario {
    fn default() -> Self {
        Self {
            days: 501,
            index_model: IndexModel::Normal { mean: 0.01917 / 252.0, sigma: 0.1940 / libm::sqrt(252.0) },
            target_multiple: 2.0,
            ratio_noise_sigma: 0.0,
            timing_coefficient: 0.0,
            seed: 0,
            zero_day_probability: 0.0,
            zero_day_etf_sigma: 0.0,
            start: default_start(),
            index_label: "index".into(),
            etf_label: "etf".into(),
        }
    }
}

impl LeverageScenario {
    pub fn validate(&self) -> Result<()> {
        if self.days < 2 {
            return Err(Error::InsufficientData { required: 2, actual: self.days });
        }
        let nonneg = |name: &'static str, value: f64| {
            if value >= 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        match &self.index_model {
            IndexModel::Normal { mean, sigma } => {
                nonneg("sigma", *sigma)?;
                if !mean.is_finite() {
                    return Err(Error::InvalidParameter { name: "mean", value: *mean });
                }
            }
            IndexModel::Bootstrap(source) => {
                if source.len() < 2 {
                    return Err(Error::InsufficientData { required: 2, actual: source.len() });
                }
            }
        }
        nonneg("ratio_noise_sigma", self.ratio_noise_sigma)?;
        nonneg("zero_day_etf_sigma", self.zero_day_etf_sigma)?;
        if !(0.0..=1.0).contains(&self.zero_day_probability) {
            return Err(Error::InvalidParameter { name: "zero_day_probability", value: self.zero_day_probability });
        }
        for (name, value) in [("target_multiple", self.target_multiple), ("timing_coefficient", self.timing_coefficient)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPanel {
    pub panel: AlignedPanel,
    /// Generated `λ_t` before any clipping (equal to `k` on forced zero days).
    pub leverage: Vec<f64>,
    /// Returns raised to [`RETURN_FLOOR`].
    pub clipped: usize,
    pub zero_days: usize,
}

/// Independent per-scenario seed for multi-seed sweeps: stream `index` of a
/// ChaCha8 generator keyed by `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn simulate(scenario: &LeverageScenario) -> Result<SimulatedPanel> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let bootstrap = match &scenario.index_model {
        IndexModel::Bootstrap(source) => Some(
            Uniform::new(0, source.len()).map_err(|_| Error::InsufficientData { required: 2, actual: source.len() })?,
        ),
        IndexModel::Normal { .. } => None,
    };

    let k = scenario.target_multiple;
    let a = scenario.timing_coefficient;
    let mut index = Vec::with_capacity(scenario.days);
    let mut etf = Vec::with_capacity(scenario.days);
    let mut leverage = Vec::with_capacity(scenario.days);
    let mut clipped = 0;
    let mut zero_days = 0;
    let mut floor = |x: f64| {
        if x < RETURN_FLOOR {
            clipped += 1;
            RETURN_FLOOR
        } else {
            x
        }
    };
    for _ in 0..scenario.days {
        let raw = match (&scenario.index_model, &bootstrap) {
            (IndexModel::Normal { mean, sigma }, _) => {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + sigma * z
            }
            (IndexModel::Bootstrap(source), Some(pick)) => source[pick.sample(&mut rng)],
            (IndexModel::Bootstrap(_), None) => unreachable!(),
        };
        let coin: f64 = StandardUniform.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let zero_noise: f64 = StandardNormal.sample(&mut rng);

        if coin < scenario.zero_day_probability {
            zero_days += 1;
            index.push(0.0);
            leverage.push(k);
            etf.push(floor(scenario.zero_day_etf_sigma * zero_noise));
            continue;
        }
        let r = floor(raw);
        let lambda = k + a * r + scenario.ratio_noise_sigma * eps;
        index.push(r);
        leverage.push(lambda);
        etf.push(floor(lambda * r));
    }

    let dates = weekday_calendar(scenario.start, scenario.days);
    let index = ReturnSeries::new(scenario.index_label.clone(), dates.clone(), index)?;
    let etf = ReturnSeries::new(scenario.etf_label.clone(), dates, etf)?;
    let panel = align(alloc::vec![index, etf])?;
    Ok(SimulatedPanel { panel, leverage, clipped, zero_days })
}

/// Per-ETF check of the decomposition identity and of the geometric-return approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRecord {
    pub label: String,
    /// `E(R^ETF) − [E(λ)E(R) + Cov(λ, R) + residual]`, daily units.
    pub identity_residual: f64,
    pub exact_geometric: f64,
    pub approx_geometric: f64,
    /// `exact_geometric − approx_geometric`, daily units.
    pub approximation_gap: f64,
    /// `mean |R_t|³ / 3` over the ETF's returns.
    pub taylor_bound: f64,
    pub flagged: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-10;

pub fn validate_decomposition(panel: &AlignedPanel, target_multiple: f64) -> Result<Vec<ValidationRecord>> {
    if panel.etfs().is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    let config = StatsConfig::default();
    panel
        .etfs()
        .iter()
        .map(|etf| {
            let ratios = return_ratios(panel.index(), etf, target_multiple, ZeroDayPolicy::default())?;
            let report = crate::decompose(&ratios, target_multiple, &config)?;
            let r = etf.returns();
            let exact = geometric_daily(r)?;
            let approx = approx_geometric(arithmetic_daily(r)?, volatility_daily(r, Normalization::Population)?)?;
            let identity_residual = report.identity_residual();
            Ok(ValidationRecord {
                label: etf.label().into(),
                identity_residual,
                exact_geometric: exact,
                approx_geometric: approx,
                approximation_gap: exact - approx,
                taylor_bound: r.iter().map(|x| libm::pow(libm::fabs(*x), 3.0) / 3.0).sum::<f64>() / r.len() as f64,
                flagged: !(libm::fabs(identity_residual) <= IDENTITY_TOLERANCE),
            })
        })
        .collect()
}
