//! Delimited daily price and return files.
//!
//! Files are UTF-8 with a header row, comma or tab separated (chosen by
//! which one appears in the header line), dates in `YYYY-MM-DD`. Return
//! columns hold decimal fractions unless the schema sets `percent=true`.
//! Numbers parse with `f64::from_str`, which never consults the locale.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use levdrag_core::{PriceSeries, ReturnSeries};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("empty file: a header row is required")]
    MissingHeader,
    #[error("schema mismatch: no column `{column}` (available: {available})")]
    SchemaMismatch { column: String, available: String },
    #[error("row {row}: unparseable date `{value}` (expected YYYY-MM-DD)")]
    BadDate { row: usize, value: String },
    #[error("row {row}: unparseable number `{value}` in column `{column}`")]
    BadNumber { row: usize, column: String, value: String },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("invalid schema `{0}`: expected date=<col> plus close=<col> or ret=<col>, optionally percent=true")]
    BadSchema(String),
    #[error(transparent)]
    Series(#[from] levdrag_core::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueColumn {
    Price(String),
    Return { column: String, percent: bool },
}

/// Which columns of a file hold the date and the value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub date: String,
    pub value: ValueColumn,
}

impl Schema {
    pub fn returns(date: &str, column: &str) -> Self {
        Self { date: date.into(), value: ValueColumn::Return { column: column.into(), percent: false } }
    }

    pub fn prices(date: &str, column: &str) -> Self {
        Self { date: date.into(), value: ValueColumn::Price(column.into()) }
    }
}

impl Default for Schema {
    fn default() -> Self {
        Self::returns("date", "ret")
    }
}

impl FromStr for Schema {
    type Err = IngestError;

    /// `date=<col>,ret=<col>[,percent=true]` or `date=<col>,close=<col>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IngestError::BadSchema(s.to_string());
        let mut date = None;
        let mut price = None;
        let mut ret = None;
        let mut percent = false;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value = value.trim().to_string();
            match key.trim() {
                "date" => date = Some(value),
                "close" | "price" => price = Some(value),
                "ret" | "return" => ret = Some(value),
                "percent" => percent = value.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        let date = date.unwrap_or_else(|| "date".into());
        let value = match (price, ret) {
            (Some(col), None) if !percent => ValueColumn::Price(col),
            (None, Some(column)) => ValueColumn::Return { column, percent },
            _ => return Err(bad()),
        };
        Ok(Self { date, value })
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            ValueColumn::Price(col) => write!(f, "date={},close={}", self.date, col),
            ValueColumn::Return { column, percent: false } => write!(f, "date={},ret={}", self.date, column),
            ValueColumn::Return { column, percent: true } => {
                write!(f, "date={},ret={},percent=true", self.date, column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Prices(PriceSeries),
    Returns(ReturnSeries),
}

impl Table {
    /// Price tables are converted with `returns_from_prices`.
    pub fn into_returns(self) -> Result<ReturnSeries, IngestError> {
        match self {
            Table::Returns(r) => Ok(r),
            Table::Prices(p) => Ok(levdrag_core::returns_from_prices(&p)?),
        }
    }
}

/// Tab when the header line contains one, otherwise comma.
pub fn detect_delimiter(bytes: &[u8]) -> u8 {
    let header = bytes.split(|b| *b == b'\n').next().unwrap_or_default();
    if header.contains(&b'\t') {
        b'\t'
    } else {
        b','
    }
}

/// Header and rows of a delimited table, cells trimmed.
pub fn read_records(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(IngestError::MissingHeader);
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(bytes))
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Malformed { row: 0, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Malformed { row: i + 1, message: e.to_string() })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((headers, rows))
}

fn column_index(headers: &[String], name: &str) -> Result<usize, IngestError> {
    headers.iter().position(|h| h == name).ok_or_else(|| IngestError::SchemaMismatch {
        column: name.to_string(),
        available: headers.join(", "),
    })
}

pub fn parse_date(row: usize, value: &str) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|_| IngestError::BadDate { row, value: value.to_string() })
}

/// Parses one series from `bytes`. Rows are numbered from 1 after the header.
pub fn parse_table(bytes: &[u8], schema: &Schema, label: &str) -> Result<Table, IngestError> {
    let (headers, rows) = read_records(bytes)?;
    let date_col = column_index(&headers, &schema.date)?;
    let (value_name, scale) = match &schema.value {
        ValueColumn::Price(c) => (c.as_str(), 1.0),
        ValueColumn::Return { column, percent } => (column.as_str(), if *percent { 0.01 } else { 1.0 }),
    };
    let value_col = column_index(&headers, value_name)?;

    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row_no = i + 1;
        let date = parse_date(row_no, &row[date_col])?;
        let raw = &row[value_col];
        let value: f64 = raw.parse().map_err(|_| IngestError::BadNumber {
            row: row_no,
            column: value_name.to_string(),
            value: raw.clone(),
        })?;
        points.push((date, value * scale));
    }
    points.sort_by_key(|(d, _)| *d);
    if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(IngestError::DuplicateDate(w[0].0));
    }
    let (dates, values): (Vec<_>, Vec<_>) = points.into_iter().unzip();
    Ok(match schema.value {
        ValueColumn::Price(_) => Table::Prices(PriceSeries::new(label, dates, values)?),
        ValueColumn::Return { .. } => Table::Returns(ReturnSeries::new(label, dates, values)?),
    })
}

/// `date,ret` file with full-precision returns, readable by [`parse_table`] with the default schema.
pub fn write_returns(series: &ReturnSeries) -> String {
    let mut out = String::from("date,ret\n");
    for (d, r) in series.dates().iter().zip(series.returns()) {
        out.push_str(&format!("{d},{r}\n"));
    }
    out
}
