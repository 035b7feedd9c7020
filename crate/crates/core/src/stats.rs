//! Per-series return statistics, annualization, and the geometric-return
//! approximation `G ≈ (1 + E)·exp(−V²/2) − 1`.
//!
//! All quantities are decimal fractions (0.01 is one percent). Daily values
//! annualize as: arithmetic `×F`, volatility `×√F`, geometric `(1 + g)^F − 1`,
//! with `F` trading days per year (252 by default).

use alloc::vec::Vec;

use crate::{Error, ReturnSeries, Result};

/// Variance divisor: `T` (population) or `T − 1` (sample).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub annualization_factor: f64,
    pub normalization: Normalization,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { annualization_factor: 252.0, normalization: Normalization::Population }
    }
}

impl StatsConfig {
    pub fn with_factor(annualization_factor: f64) -> Result<Self> {
        let cfg = Self { annualization_factor, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_factor(self.annualization_factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annualization {
    Arithmetic,
    Geometric,
    Volatility,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub days: usize,
    /// `Π(1 + R_t) − 1` over the whole sample.
    pub cumulative_return: f64,
    pub geometric_daily: f64,
    pub arithmetic_daily: f64,
    pub volatility_daily: f64,
    pub geometric_annualized: f64,
    pub arithmetic_annualized: f64,
    pub volatility_annualized: f64,
    /// Annualized arithmetic return over annualized volatility; 0 when volatility is 0.
    pub risk_adjusted: f64,
}

fn check_factor(factor: f64) -> Result<()> {
    if factor.is_finite() && factor > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "annualization_factor", value: factor })
    }
}

fn check_relatives(returns: &[f64]) -> Result<()> {
    match returns.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > -1.0)) {
        Some((position, &value)) => Err(Error::NonpositivePriceRelative { position, value }),
        None => Ok(()),
    }
}

fn log_growth(returns: &[f64]) -> f64 {
    returns.iter().map(|r| libm::log1p(*r)).sum()
}

/// Mean daily return; exactly the common value for a constant series.
pub fn arithmetic_daily(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    if returns.iter().all(|r| *r == returns[0]) {
        return Ok(returns[0]);
    }
    Ok(returns.iter().sum::<f64>() / returns.len() as f64)
}

/// `[Π(1 + R_t)]^{1/T} − 1`, evaluated through the mean log return.
pub fn geometric_daily(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    check_relatives(returns)?;
    if returns.iter().all(|r| *r == returns[0]) {
        return Ok(returns[0]);
    }
    Ok(libm::expm1(log_growth(returns) / returns.len() as f64))
}

pub fn cumulative_return(returns: &[f64]) -> Result<f64> {
    Ok(*cumulative_path(returns)?.last().unwrap_or(&0.0))
}

/// Cumulative return after each day; the last entry is [`cumulative_return`].
pub fn cumulative_path(returns: &[f64]) -> Result<Vec<f64>> {
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    check_relatives(returns)?;
    let mut growth = 0.0;
    Ok(returns
        .iter()
        .map(|r| {
            growth += libm::log1p(*r);
            libm::expm1(growth)
        })
        .collect())
}

pub fn volatility_daily(returns: &[f64], normalization: Normalization) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: returns.len() });
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let ss: f64 = returns.iter().map(|r| (r - mean) * (r - mean)).sum();
    let divisor = match normalization {
        Normalization::Population => n,
        Normalization::Sample => n - 1.0,
    };
    Ok(libm::sqrt(ss / divisor))
}

/// Converts a daily statistic to its yearly counterpart.
pub fn annualize(value: f64, kind: Annualization, factor: f64) -> Result<f64> {
    check_factor(factor)?;
    match kind {
        Annualization::Arithmetic => Ok(value * factor),
        Annualization::Volatility => Ok(value * libm::sqrt(factor)),
        Annualization::Geometric => {
            if !(value > -1.0) {
                return Err(Error::InvalidParameter { name: "geometric return", value });
            }
            Ok(libm::expm1(factor * libm::log1p(value)))
        }
    }
}

/// Inverse of [`annualize`].
pub fn deannualize(value: f64, kind: Annualization, factor: f64) -> Result<f64> {
    check_factor(factor)?;
    match kind {
        Annualization::Arithmetic => Ok(value / factor),
        Annualization::Volatility => Ok(value / libm::sqrt(factor)),
        Annualization::Geometric => {
            if !(value > -1.0) {
                return Err(Error::InvalidParameter { name: "geometric return", value });
            }
            Ok(libm::expm1(libm::log1p(value) / factor))
        }
    }
}

pub fn summarize(series: &ReturnSeries, config: &StatsConfig) -> Result<SummaryStats> {
    config.validate()?;
    let r = series.returns();
    let factor = config.annualization_factor;
    let volatility_daily = volatility_daily(r, config.normalization)?;
    let arithmetic_daily = arithmetic_daily(r)?;
    let geometric_daily = geometric_daily(r)?;
    let arithmetic_annualized = annualize(arithmetic_daily, Annualization::Arithmetic, factor)?;
    let volatility_annualized = annualize(volatility_daily, Annualization::Volatility, factor)?;
    let risk_adjusted = if volatility_annualized > 0.0 {
        arithmetic_annualized / volatility_annualized
    } else {
        0.0
    };
    Ok(SummaryStats {
        days: r.len(),
        cumulative_return: cumulative_return(r)?,
        geometric_daily,
        arithmetic_daily,
        volatility_daily,
        geometric_annualized: annualize(geometric_daily, Annualization::Geometric, factor)?,
        arithmetic_annualized,
        volatility_annualized,
        risk_adjusted,
    })
}

/// `(1 + E)·exp(−V²/2) − 1` for daily mean `E` and daily volatility `V`.
///
/// Evaluated as `E·exp(−V²/2) + expm1(−V²/2)`, so a zero volatility returns `E` unchanged.
pub fn approx_geometric(mean: f64, volatility: f64) -> Result<f64> {
    if !(mean > -1.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter { name: "mean return", value: mean });
    }
    if !(volatility >= 0.0) || !volatility.is_finite() {
        return Err(Error::InvalidParameter { name: "volatility", value: volatility });
    }
    let half_var = -0.5 * volatility * volatility;
    Ok(mean * libm::exp(half_var) + libm::expm1(half_var))
}

/// Per-day error of the quadratic log approximation: `(r − r²/2) − ln(1 + r)`.
///
/// Non-positive and at least `−r³/3` for `0 < r < 1`; non-negative for `−1 < r < 0`.
pub fn taylor_log_error(r: f64) -> Result<f64> {
    if !(r > -1.0) || !r.is_finite() {
        return Err(Error::NonpositivePriceRelative { position: 0, value: r });
    }
    if libm::fabs(r) >= 0.1 {
        return Ok((r - 0.5 * r * r) - libm::log1p(r));
    }
    // −r³/3 + r⁴/4 − r⁵/5 + …, tail summed smallest-first so the leading term
    // dominates the rounding.
    let mut terms = [0.0f64; 40];
    let mut power = r * r * r;
    let mut count = 0;
    for (n, slot) in terms.iter_mut().enumerate().skip(1) {
        power *= r;
        let term = if n % 2 == 1 { power } else { -power } / (n + 3) as f64;
        *slot = term;
        count = n + 1;
        if libm::fabs(term) <= libm::fabs(r * r * r) * 1e-20 {
            break;
        }
    }
    let tail: f64 = terms[1..count].iter().rev().sum();
    Ok(tail - libm::pow(r, 3.0) / 3.0)
}
