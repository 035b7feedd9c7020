//! Pure return mathematics for daily-levered ETFs.
//!
//! The crate splits the long-horizon return of a levered fund into two parts:
//! the compounding (volatility drag) effect captured by
//! `G ≈ (1 + E)·exp(−V²/2) − 1`, and a leverage-timing effect, the covariance
//! between the realized daily return ratio `λ_t = R_t^ETF / R_t` and the index
//! return `R_t`, which satisfies `E(R^ETF) = E(λ)E(R) + Cov(λ, R)` exactly.
//!
//! Everything here is `no_std` with `alloc`; file formats, reporting and the
//! command line live in the `levdrag` crate.

#![no_std]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decomposition;
mod error;
pub mod series;
pub mod simulator;
pub mod stats;
pub mod winsorize;

pub use chrono::NaiveDate;
pub use decomposition::{
    covariance_decomposition, decompose, empirical_cl_estimate, empirical_estimate,
    ideal_cl_estimate, leverage_curve, return_ratios, DecompositionReport, LeverageCurve,
    LeverageGrid, RatioSeries, ZeroDayMode, ZeroDayPolicy,
};
pub use error::{Error, Result};
pub use series::{align, returns_from_prices, weekday_calendar, AlignedPanel, PriceSeries, ReturnSeries};
pub use simulator::{simulate, validate_decomposition, IndexModel, LeverageScenario, SimulatedPanel, ValidationRecord};
pub use stats::{
    annualize, approx_geometric, arithmetic_daily, cumulative_path, cumulative_return, deannualize,
    geometric_daily, summarize, taylor_log_error, volatility_daily, Annualization, Normalization,
    StatsConfig, SummaryStats,
};
pub use winsorize::{winsorize, winsorize_bounds, winsorize_ratios};
