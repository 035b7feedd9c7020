//! Return ratios and the leverage-timing decomposition
//! `E(R^ETF) = E(λ)·E(R) + Cov(λ, R)`, plus constant-leverage estimators
//! built on the geometric-return approximation.
//!
//! Covariances use population normalization so that the decomposition is an
//! algebraic identity on any sample.

use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::stats::{annualize, approx_geometric, deannualize, Annualization};
use crate::{arithmetic_daily, geometric_daily, volatility_daily, Error, Normalization, Result, ReturnSeries, StatsConfig};

/// What to do with days whose index return is too small to divide by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroDayMode {
    /// Set `λ_t = k` and book `R_t^ETF − k·R_t` into the residual.
    #[default]
    AssignTarget,
    /// Drop the day from the ratio sample entirely.
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroDayPolicy {
    /// A day is a zero day when `|R_t| <= threshold`.
    pub threshold: f64,
    pub mode: ZeroDayMode,
}

impl Default for ZeroDayPolicy {
    fn default() -> Self {
        Self { threshold: 1e-12, mode: ZeroDayMode::AssignTarget }
    }
}

impl ZeroDayPolicy {
    pub fn exclude() -> Self {
        Self { mode: ZeroDayMode::Exclude, ..Self::default() }
    }
}

/// Daily return ratios `λ_t = R_t^ETF / R_t` with the returns they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries {
    dates: Vec<NaiveDate>,
    ratios: Vec<f64>,
    index_returns: Vec<f64>,
    etf_returns: Vec<f64>,
    zero_days: Vec<NaiveDate>,
    residual_mean: f64,
}

impl RatioSeries {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Index returns on the retained days.
    pub fn index_returns(&self) -> &[f64] {
        &self.index_returns
    }

    /// ETF returns on the retained days.
    pub fn etf_returns(&self) -> &[f64] {
        &self.etf_returns
    }

    pub fn zero_days(&self) -> &[NaiveDate] {
        &self.zero_days
    }

    /// Mean daily ETF return not explained by `λ_t·R_t` on zero days.
    pub fn residual_mean(&self) -> f64 {
        self.residual_mean
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub(crate) fn with_ratios(&self, ratios: Vec<f64>) -> Self {
        debug_assert_eq!(ratios.len(), self.ratios.len());
        Self { ratios, ..self.clone() }
    }
}

/// `λ_t = R_t^ETF / R_t`, with zero days handled per `policy`. Days on which
/// `R_t^ETF` equals the floating-point product `k·R_t` get `λ_t = k` exactly.
pub fn return_ratios(
    index: &ReturnSeries,
    etf: &ReturnSeries,
    target_multiple: f64,
    policy: ZeroDayPolicy,
) -> Result<RatioSeries> {
    if index.dates() != etf.dates() {
        return Err(Error::Misaligned);
    }
    if !(policy.threshold >= 0.0) {
        return Err(Error::InvalidParameter { name: "zero-day threshold", value: policy.threshold });
    }
    let n = index.len();
    let mut out = RatioSeries {
        dates: Vec::with_capacity(n),
        ratios: Vec::with_capacity(n),
        index_returns: Vec::with_capacity(n),
        etf_returns: Vec::with_capacity(n),
        zero_days: Vec::new(),
        residual_mean: 0.0,
    };
    let mut orphaned = 0.0;
    for ((&date, &r), &r_etf) in index.dates().iter().zip(index.returns()).zip(etf.returns()) {
        let zero = libm::fabs(r) <= policy.threshold;
        if zero {
            out.zero_days.push(date);
            if policy.mode == ZeroDayMode::Exclude {
                continue;
            }
            orphaned += r_etf - target_multiple * r;
        }
        out.dates.push(date);
        // A day on which the ETF return is the floating-point product k·R is an
        // exact target day; the quotient could otherwise miss k by an ulp.
        let exact = zero || r_etf == target_multiple * r;
        out.ratios.push(if exact { target_multiple } else { r_etf / r });
        out.index_returns.push(r);
        out.etf_returns.push(r_etf);
    }
    if !out.dates.is_empty() {
        out.residual_mean = orphaned / out.dates.len() as f64;
    }
    Ok(out)
}

/// Daily-unit decomposition of one ETF against its index. Every rate field is
/// a daily decimal fraction; the `*_annualized` methods convert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    pub target_multiple: f64,
    pub days: usize,
    pub zero_days: usize,
    pub annualization_factor: f64,
    pub mean_ratio: f64,
    pub ratio_volatility: f64,
    pub etf_mean: f64,
    pub index_mean: f64,
    pub index_volatility: f64,
    pub etf_volatility: f64,
    /// Population `Cov(λ, R)`.
    pub covariance: f64,
    pub residual: f64,
    /// Annualized geometric returns.
    pub etf_geometric_annualized: f64,
    pub ideal_estimate_annualized: f64,
    pub empirical_cl_estimate_annualized: f64,
    pub empirical_estimate_annualized: f64,
}

impl DecompositionReport {
    /// `E(R^ETF) − [E(λ)E(R) + Cov(λ, R) + residual]`, zero up to rounding for raw ratios.
    pub fn identity_residual(&self) -> f64 {
        self.etf_mean - (self.mean_ratio * self.index_mean + self.covariance + self.residual)
    }

    fn arith(&self, daily: f64) -> f64 {
        daily * self.annualization_factor
    }

    pub fn etf_mean_annualized(&self) -> f64 {
        self.arith(self.etf_mean)
    }

    pub fn index_mean_annualized(&self) -> f64 {
        self.arith(self.index_mean)
    }

    pub fn covariance_annualized(&self) -> f64 {
        self.arith(self.covariance)
    }

    pub fn residual_annualized(&self) -> f64 {
        self.arith(self.residual)
    }

    /// `k · E(R)`, annualized.
    pub fn ideal_arithmetic_annualized(&self) -> f64 {
        self.arith(self.target_multiple * self.index_mean)
    }

    /// `E(λ) · E(R)`, annualized.
    pub fn empirical_cl_arithmetic_annualized(&self) -> f64 {
        self.arith(self.mean_ratio * self.index_mean)
    }

    pub fn ratio_volatility_annualized(&self) -> f64 {
        self.ratio_volatility * libm::sqrt(self.annualization_factor)
    }
}

/// Decomposes a (possibly winsorized) ratio series.
pub fn decompose(ratios: &RatioSeries, target_multiple: f64, config: &StatsConfig) -> Result<DecompositionReport> {
    config.validate()?;
    if ratios.is_empty() {
        return Err(Error::AllDaysExcluded);
    }
    if ratios.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: ratios.len() });
    }
    let lam = ratios.ratios();
    let idx = ratios.index_returns();
    let etf = ratios.etf_returns();
    let n = lam.len() as f64;
    let mean_ratio = arithmetic_daily(lam)?;
    let index_mean = arithmetic_daily(idx)?;
    let etf_mean = arithmetic_daily(etf)?;
    let covariance = lam
        .iter()
        .zip(idx)
        .map(|(l, r)| (l - mean_ratio) * (r - index_mean))
        .sum::<f64>()
        / n;
    let ratio_volatility = volatility_daily(lam, Normalization::Population)?;
    let index_volatility = volatility_daily(idx, config.normalization)?;
    let etf_volatility = volatility_daily(etf, config.normalization)?;

    let factor = config.annualization_factor;
    let index_mean_annual = annualize(index_mean, Annualization::Arithmetic, factor)?;
    let index_vol_annual = annualize(index_volatility, Annualization::Volatility, factor)?;
    Ok(DecompositionReport {
        target_multiple,
        days: lam.len(),
        zero_days: ratios.zero_days().len(),
        annualization_factor: factor,
        mean_ratio,
        ratio_volatility,
        etf_mean,
        index_mean,
        index_volatility,
        etf_volatility,
        covariance,
        residual: ratios.residual_mean(),
        etf_geometric_annualized: annualize(geometric_daily(etf)?, Annualization::Geometric, factor)?,
        ideal_estimate_annualized: ideal_cl_estimate(index_mean_annual, index_vol_annual, target_multiple, config)?,
        empirical_cl_estimate_annualized: empirical_cl_estimate(index_mean_annual, index_vol_annual, mean_ratio, config)?,
        empirical_estimate_annualized: estimate_from_daily(etf_mean, etf_volatility, factor)?,
    })
}

/// Return ratios followed by [`decompose`].
pub fn covariance_decomposition(
    index: &ReturnSeries,
    etf: &ReturnSeries,
    target_multiple: f64,
    policy: ZeroDayPolicy,
    config: &StatsConfig,
) -> Result<DecompositionReport> {
    let ratios = return_ratios(index, etf, target_multiple, policy)?;
    decompose(&ratios, target_multiple, config)
}

fn estimate_from_daily(mean: f64, volatility: f64, factor: f64) -> Result<f64> {
    annualize(approx_geometric(mean, volatility)?, Annualization::Geometric, factor)
}

/// Annualized geometric return of an ETF held at constant leverage `multiple`
/// on an index with annualized arithmetic mean `mean` and volatility `volatility`.
pub fn ideal_cl_estimate(mean: f64, volatility: f64, multiple: f64, config: &StatsConfig) -> Result<f64> {
    config.validate()?;
    if !(volatility >= 0.0) {
        return Err(Error::InvalidParameter { name: "volatility", value: volatility });
    }
    let factor = config.annualization_factor;
    let e = deannualize(mean, Annualization::Arithmetic, factor)?;
    let v = deannualize(volatility, Annualization::Volatility, factor)?;
    estimate_from_daily(multiple * e, libm::fabs(multiple) * v, factor)
}

/// [`ideal_cl_estimate`] with the leverage set to the observed mean return ratio.
pub fn empirical_cl_estimate(mean: f64, volatility: f64, mean_ratio: f64, config: &StatsConfig) -> Result<f64> {
    ideal_cl_estimate(mean, volatility, mean_ratio, config)
}

/// The approximation applied to the ETF's own daily mean and volatility, annualized.
pub fn empirical_estimate(etf: &[f64], config: &StatsConfig) -> Result<f64> {
    config.validate()?;
    let mean = arithmetic_daily(etf)?;
    let vol = volatility_daily(etf, config.normalization)?;
    estimate_from_daily(mean, vol, config.annualization_factor)
}

/// Inclusive leverage grid `start, start + step, …, ≤ end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverageGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl LeverageGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidParameter { name: "step", value: self.step });
        }
        if !(self.end >= self.start) {
            return Err(Error::InvalidParameter { name: "end", value: self.end });
        }
        let count = libm::floor((self.end - self.start) / self.step + 1e-9) as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageCurve {
    /// `(leverage, annualized geometric return)` pairs.
    pub points: Vec<(f64, f64)>,
    pub argmax: (f64, f64),
}

pub fn leverage_curve(mean: f64, volatility: f64, grid: LeverageGrid, config: &StatsConfig) -> Result<LeverageCurve> {
    let points = grid
        .points()?
        .into_iter()
        .map(|l| ideal_cl_estimate(mean, volatility, l, config).map(|g| (l, g)))
        .collect::<Result<Vec<_>>>()?;
    let argmax = points
        .iter()
        .copied()
        .fold(points[0], |best, p| if p.1 > best.1 { p } else { best });
    Ok(LeverageCurve { points, argmax })
}
