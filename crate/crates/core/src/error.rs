use core::fmt;

use chrono::NaiveDate;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptySeries,
    /// A return at or below −1 (or not finite) would imply a nonpositive price.
    NonpositivePriceRelative { position: usize, value: f64 },
    NonpositivePrice { position: usize, value: f64 },
    InsufficientData { required: usize, actual: usize },
    LengthMismatch { dates: usize, values: usize },
    DuplicateDate(NaiveDate),
    UnorderedDates { position: usize },
    NoOverlappingDates,
    Misaligned,
    AllDaysExcluded,
    InvalidParameter { name: &'static str, value: f64 },
    InvalidPercentiles { lower: f64, upper: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySeries => f.write_str("empty series"),
            Error::NonpositivePriceRelative { position, value } => write!(
                f,
                "nonpositive price relative at position {position}: return {value}"
            ),
            Error::NonpositivePrice { position, value } => {
                write!(f, "nonpositive price at position {position}: {value}")
            }
            Error::InsufficientData { required, actual } => write!(
                f,
                "insufficient data: need at least {required} observations, got {actual}"
            ),
            Error::LengthMismatch { dates, values } => {
                write!(f, "length mismatch: {dates} dates for {values} values")
            }
            Error::DuplicateDate(d) => write!(f, "duplicate date {d}"),
            Error::UnorderedDates { position } => {
                write!(f, "dates not increasing at position {position}")
            }
            Error::NoOverlappingDates => f.write_str("no overlapping dates"),
            Error::Misaligned => f.write_str("series are not aligned on identical dates"),
            Error::AllDaysExcluded => f.write_str("every day was excluded as a zero-return day"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value for {name}: {value}")
            }
            Error::InvalidPercentiles { lower, upper } => write!(
                f,
                "invalid percentiles: need 0 <= lower < upper <= 100, got {lower} and {upper}"
            ),
        }
    }
}

impl core::error::Error for Error {}
