//! Price and risk-free-rate ingestion.
//!
//! Input files are CSV with a header row, ISO-8601 dates and configurable
//! column names (the usual vendor export shape). Loaded series are immutable
//! and expose a calendar-day axis: weekends and holidays are forward-filled
//! from the most recent observation.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("missing column {column:?} in {path}")]
    MissingColumn { path: String, column: String },
    #[error("{path}:{line}: {message}")]
    Validation {
        path: String,
        line: usize,
        message: String,
    },
    #[error("series is empty")]
    Empty,
    #[error("date {queried} precedes first observation {first}")]
    BeforeFirstObservation { queried: NaiveDate, first: NaiveDate },
}

/// Column names used when reading a CSV file.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub date: String,
    pub value: String,
}

impl ColumnMapping {
    pub fn new(date: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            date: date.into(),
            value: value.into(),
        }
    }
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self::new("date", "close")
    }
}

/// Dated adjusted-close observations on trading days.
///
/// Dates are strictly increasing and all prices are positive. Lookups on the
/// calendar axis forward-fill from the most recent prior observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    name: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Build a series from observations, enforcing ordering and positivity.
    pub fn new(
        name: impl Into<String>,
        observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, DataError> {
        let name = name.into();
        if observations.is_empty() {
            return Err(DataError::Empty);
        }
        for (i, (date, price)) in observations.iter().enumerate() {
            if !price.is_finite() || *price <= 0.0 {
                return Err(DataError::Validation {
                    path: name.clone(),
                    line: i + 1,
                    message: format!("non-positive price {price} on {date}"),
                });
            }
            if i > 0 && observations[i - 1].0 >= *date {
                return Err(DataError::Validation {
                    path: name.clone(),
                    line: i + 1,
                    message: format!("dates not strictly increasing at {date}"),
                });
            }
        }
        Ok(Self { name, observations })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].0
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].0
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty series
    }

    /// Price on a calendar date: the observation on that date, or the most
    /// recent prior observation (weekends and holidays forward-filled).
    pub fn price_on(&self, d: NaiveDate) -> Result<f64, DataError> {
        match self
            .observations
            .binary_search_by_key(&d, |(date, _)| *date)
        {
            Ok(i) => Ok(self.observations[i].1),
            Err(0) => Err(DataError::BeforeFirstObservation {
                queried: d,
                first: self.first_date(),
            }),
            Err(i) => Ok(self.observations[i - 1].1),
        }
    }

    /// True if `d` is an observation date (a trading day of the series).
    pub fn is_observation(&self, d: NaiveDate) -> bool {
        self.observations
            .binary_search_by_key(&d, |(date, _)| *date)
            .is_ok()
    }

    /// Observations with `t1 <= date <= t2`.
    pub fn slice(&self, t1: NaiveDate, t2: NaiveDate) -> &[(NaiveDate, f64)] {
        let lo = self.observations.partition_point(|(d, _)| *d < t1);
        let hi = self.observations.partition_point(|(d, _)| *d <= t2);
        &self.observations[lo..hi]
    }

    /// Write the series as ISO-date CSV with a `date,<value>` header.
    pub fn write_csv(&self, path: &Path, mapping: &ColumnMapping) -> Result<(), DataError> {
        write_csv(path, mapping, &self.observations)
    }
}

/// Annualized risk-free rates in decimal units (0.03 = 3%).
///
/// Missing dates forward-fill like prices; a constant series stands in when
/// no rate file is available.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    observations: Vec<(NaiveDate, f64)>,
    constant: Option<f64>,
}

impl RateSeries {
    pub fn new(observations: Vec<(NaiveDate, f64)>) -> Result<Self, DataError> {
        if observations.is_empty() {
            return Err(DataError::Empty);
        }
        for (i, (date, rate)) in observations.iter().enumerate() {
            if !rate.is_finite() {
                return Err(DataError::Validation {
                    path: "rates".into(),
                    line: i + 1,
                    message: format!("non-finite rate on {date}"),
                });
            }
            if i > 0 && observations[i - 1].0 >= *date {
                return Err(DataError::Validation {
                    path: "rates".into(),
                    line: i + 1,
                    message: format!("dates not strictly increasing at {date}"),
                });
            }
        }
        Ok(Self {
            observations,
            constant: None,
        })
    }

    /// A series returning the same annualized rate on every date.
    pub fn constant(rate: f64) -> Self {
        Self {
            observations: Vec::new(),
            constant: Some(rate),
        }
    }

    pub fn rate_on(&self, d: NaiveDate) -> Result<f64, DataError> {
        if let Some(r) = self.constant {
            return Ok(r);
        }
        match self
            .observations
            .binary_search_by_key(&d, |(date, _)| *date)
        {
            Ok(i) => Ok(self.observations[i].1),
            Err(0) => Err(DataError::BeforeFirstObservation {
                queried: d,
                first: self.observations[0].0,
            }),
            Err(i) => Ok(self.observations[i - 1].1),
        }
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }
}

/// Load a price series from CSV. Malformed rows report their line number;
/// non-positive prices and duplicate dates are validation errors.
pub fn load_price_series(path: &Path, mapping: &ColumnMapping) -> Result<PriceSeries, DataError> {
    let rows = read_dated_column(path, mapping)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "prices".to_string());
    let path_str = path.display().to_string();
    for (i, (date, price, line)) in rows.iter().enumerate() {
        if !price.is_finite() || *price <= 0.0 {
            return Err(DataError::Validation {
                path: path_str.clone(),
                line: *line,
                message: format!("non-positive price {price} on {date}"),
            });
        }
        if i > 0 && rows[i - 1].0 == *date {
            return Err(DataError::Validation {
                path: path_str.clone(),
                line: *line,
                message: format!("duplicate date {date}"),
            });
        }
        if i > 0 && rows[i - 1].0 > *date {
            return Err(DataError::Validation {
                path: path_str.clone(),
                line: *line,
                message: format!("dates out of order at {date}"),
            });
        }
    }
    PriceSeries::new(name, rows.into_iter().map(|(d, v, _)| (d, v)).collect())
}

/// Load a risk-free-rate series from CSV; same contracts as
/// [`load_price_series`] with the rate allowed to be any finite value.
pub fn load_riskfree(path: &Path, mapping: &ColumnMapping) -> Result<RateSeries, DataError> {
    let rows = read_dated_column(path, mapping)?;
    let path_str = path.display().to_string();
    for (i, (date, rate, line)) in rows.iter().enumerate() {
        if !rate.is_finite() {
            return Err(DataError::Validation {
                path: path_str.clone(),
                line: *line,
                message: format!("non-finite rate on {date}"),
            });
        }
        if i > 0 && rows[i - 1].0 >= *date {
            return Err(DataError::Validation {
                path: path_str.clone(),
                line: *line,
                message: format!("duplicate or out-of-order date {date}"),
            });
        }
    }
    RateSeries::new(rows.into_iter().map(|(d, v, _)| (d, v)).collect())
}

fn read_dated_column(
    path: &Path,
    mapping: &ColumnMapping,
) -> Result<Vec<(NaiveDate, f64, usize)>, DataError> {
    let path_str = path.display().to_string();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path_str.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| DataError::Parse {
            path: path_str.clone(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col_idx = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::MissingColumn {
                path: path_str.clone(),
                column: name.to_string(),
            })
    };
    let date_idx = col_idx(&mapping.date)?;
    let value_idx = col_idx(&mapping.value)?;

    let mut rows = Vec::new();
    for (rec_no, record) in reader.records().enumerate() {
        let line = rec_no + 2; // header is line 1
        let record = record.map_err(|e| DataError::Parse {
            path: path_str.clone(),
            line,
            message: e.to_string(),
        })?;
        let date_str = record.get(date_idx).ok_or_else(|| DataError::Parse {
            path: path_str.clone(),
            line,
            message: "missing date field".into(),
        })?;
        let date: NaiveDate = date_str.parse().map_err(|e| DataError::Parse {
            path: path_str.clone(),
            line,
            message: format!("bad date {date_str:?}: {e}"),
        })?;
        let value_str = record.get(value_idx).ok_or_else(|| DataError::Parse {
            path: path_str.clone(),
            line,
            message: "missing value field".into(),
        })?;
        let value: f64 = value_str.parse().map_err(|e| DataError::Parse {
            path: path_str.clone(),
            line,
            message: format!("bad value {value_str:?}: {e}"),
        })?;
        rows.push((date, value, line));
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(rows)
}

fn write_csv(
    path: &Path,
    mapping: &ColumnMapping,
    observations: &[(NaiveDate, f64)],
) -> Result<(), DataError> {
    let mut file = File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    writeln!(file, "{},{}", mapping.date, mapping.value).map_err(io_err)?;
    for (date, value) in observations {
        writeln!(file, "{date},{value}").map_err(io_err)?;
    }
    Ok(())
}
