//! Dated price and return series, and date alignment across instruments.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::{Error, Result};

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    for (i, w) in dates.windows(2).enumerate() {
        if w[1] == w[0] {
            return Err(Error::DuplicateDate(w[1]));
        }
        if w[1] < w[0] {
            return Err(Error::UnorderedDates { position: i + 1 });
        }
    }
    Ok(())
}

/// Daily simple returns for one instrument, as decimal fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    label: String,
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    /// Dates must be strictly increasing and every return finite and above −1.
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::LengthMismatch { dates: dates.len(), values: returns.len() });
        }
        check_dates(&dates)?;
        if let Some((position, &value)) =
            returns.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > -1.0))
        {
            return Err(Error::NonpositivePriceRelative { position, value });
        }
        Ok(Self { label: label.into(), dates, returns })
    }

    /// Attaches a weekday calendar starting 2022-01-03.
    pub fn from_returns(label: impl Into<String>, returns: Vec<f64>) -> Result<Self> {
        let dates = weekday_calendar(default_start(), returns.len());
        Self::new(label, dates, returns)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn restrict_to(&self, keep: &[NaiveDate]) -> Self {
        let mut dates = Vec::with_capacity(keep.len());
        let mut returns = Vec::with_capacity(keep.len());
        let mut j = 0;
        for (d, r) in self.dates.iter().zip(&self.returns) {
            while j < keep.len() && keep[j] < *d {
                j += 1;
            }
            if j < keep.len() && keep[j] == *d {
                dates.push(*d);
                returns.push(*r);
            }
        }
        Self { label: self.label.clone(), dates, returns }
    }
}

impl AsRef<[f64]> for ReturnSeries {
    fn as_ref(&self) -> &[f64] {
        &self.returns
    }
}

/// Dated daily closing prices for one instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    label: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::LengthMismatch { dates: dates.len(), values: closes.len() });
        }
        check_dates(&dates)?;
        if let Some((position, &value)) =
            closes.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::NonpositivePrice { position, value });
        }
        Ok(Self { label: label.into(), dates, closes })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// `R_t = (P_{t+1} − P_t) / P_t`, each return dated by the later day of its pair.
pub fn returns_from_prices(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: prices.len() });
    }
    let returns = prices.closes.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    ReturnSeries::new(prices.label.clone(), prices.dates[1..].to_vec(), returns)
}

/// Index and ETF return series sharing one calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    dates: Vec<NaiveDate>,
    index: ReturnSeries,
    etfs: Vec<ReturnSeries>,
    dropped: Vec<usize>,
    provenance: Vec<String>,
}

impl AlignedPanel {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn index(&self) -> &ReturnSeries {
        &self.index
    }

    pub fn etfs(&self) -> &[ReturnSeries] {
        &self.etfs
    }

    pub fn etf(&self, label: &str) -> Option<&ReturnSeries> {
        self.etfs.iter().find(|s| s.label() == label)
    }

    /// Rows removed from each input series, index first.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Vec<String>) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Index series followed by the ETF series, in input order.
    pub fn series(&self) -> impl Iterator<Item = &ReturnSeries> {
        core::iter::once(&self.index).chain(self.etfs.iter())
    }
}

/// Restricts every series to the dates they all share. The first series is the index.
pub fn align(series: Vec<ReturnSeries>) -> Result<AlignedPanel> {
    if series.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: series.len() });
    }
    let mut common: Vec<NaiveDate> = series[0].dates.clone();
    for s in &series[1..] {
        common = intersect(&common, &s.dates);
    }
    if common.is_empty() {
        return Err(Error::NoOverlappingDates);
    }
    let dropped = series.iter().map(|s| s.len() - common.len()).collect();
    let mut restricted: Vec<ReturnSeries> = series.iter().map(|s| s.restrict_to(&common)).collect();
    let etfs = restricted.split_off(1);
    let index = restricted.pop().expect("at least two series");
    Ok(AlignedPanel {
        dates: common,
        index,
        etfs,
        dropped,
        provenance: Vec::new(),
    })
}

fn intersect(a: &[NaiveDate], b: &[NaiveDate]) -> Vec<NaiveDate> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 3).expect("valid date")
}

/// `n` consecutive Monday–Friday dates beginning at `start` (rolled forward off a weekend).
pub fn weekday_calendar(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}
