//! Percentile clamping of return ratios.
//!
//! Clamp bounds are order statistics of the sample, never interpolated
//! values: the upper bound for percentile `p` is the value of nearest rank
//! `⌈p·n/100⌉` (1-based) and the lower bound for percentile `q` is the value
//! of rank `⌊q·n/100⌋ + 1`, its mirror image from the top. Both ranks survive
//! clamping unchanged, so winsorizing twice gives the same result as once.

use alloc::vec::Vec;

use crate::{Error, RatioSeries, Result};

fn check_percentiles(lower: f64, upper: f64) -> Result<()> {
    if lower >= 0.0 && lower < upper && upper <= 100.0 {
        Ok(())
    } else {
        Err(Error::InvalidPercentiles { lower, upper })
    }
}

/// 1-based ranks of the lower and upper clamp bounds in a sample of `n`.
fn clamp_ranks(n: usize, lower: f64, upper: f64) -> (usize, usize) {
    let n_f = n as f64;
    let hi = (libm::ceil(upper / 100.0 * n_f) as usize).clamp(1, n);
    let lo = (libm::floor(lower / 100.0 * n_f) as usize + 1).clamp(1, hi);
    (lo, hi)
}

/// `(lower bound, upper bound)` used by [`winsorize`].
pub fn winsorize_bounds(values: &[f64], lower: f64, upper: f64) -> Result<(f64, f64)> {
    check_percentiles(lower, upper)?;
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some((_, &value)) = values.iter().enumerate().find(|(_, v)| v.is_nan()) {
        return Err(Error::InvalidParameter { name: "ratio", value });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = clamp_ranks(sorted.len(), lower, upper);
    Ok((sorted[lo - 1], sorted[hi - 1]))
}

/// Clamps `values` into the `[lower, upper]` percentile bounds of their own distribution.
pub fn winsorize(values: &[f64], lower: f64, upper: f64) -> Result<Vec<f64>> {
    let (lo, hi) = winsorize_bounds(values, lower, upper)?;
    Ok(values.iter().map(|v| v.clamp(lo, hi)).collect())
}

/// Winsorizes the ratios; zero days, residual and return columns pass through.
pub fn winsorize_ratios(ratios: &RatioSeries, lower: f64, upper: f64) -> Result<RatioSeries> {
    let clamped = winsorize(ratios.ratios(), lower, upper)?;
    Ok(ratios.with_ratios(clamped))
}
