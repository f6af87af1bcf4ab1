//! Append-only JSON-lines store of fit results.
//!
//! One record per line with a stable key set:
//! `{index, t1, t2, tc, m, omega, phi, A, B, C, q, b, bubble_type}`.
//! `tc` is a fractional calendar-day number on the same axis as
//! [`crate::calendar::day_number`].

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::windows::Window;

use super::{BubbleType, FitError, FitResult, LpplParams};

/// Wire format of one stored fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub index: u64,
    pub t1: NaiveDate,
    pub t2: NaiveDate,
    pub tc: f64,
    pub m: f64,
    pub omega: f64,
    pub phi: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b_amplitude: f64,
    #[serde(rename = "C")]
    pub c_amplitude: f64,
    pub q: f64,
    #[serde(rename = "b")]
    pub damping: f64,
    pub bubble_type: BubbleType,
}

impl FitRecord {
    pub fn from_result(index: u64, fit: &FitResult) -> Self {
        Self {
            index,
            t1: fit.window.t1,
            t2: fit.window.t2,
            tc: fit.params.tc,
            m: fit.params.m,
            omega: fit.params.omega,
            phi: fit.params.phi,
            a: fit.params.a,
            b_amplitude: fit.params.b,
            c_amplitude: fit.params.c,
            q: fit.q,
            damping: fit.damping,
            bubble_type: fit.bubble_type,
        }
    }

    pub fn into_result(self) -> Result<FitResult, FitError> {
        let window = Window::new(self.t1, self.t2)
            .map_err(|e| FitError::Store(format!("record {}: {e}", self.index)))?;
        let params = LpplParams {
            tc: self.tc,
            m: self.m,
            omega: self.omega,
            phi: self.phi,
            a: self.a,
            b: self.b_amplitude,
            c: self.c_amplitude,
        };
        if params.bubble_type() != self.bubble_type {
            return Err(FitError::Store(format!(
                "record {}: stored bubble_type {:?} inconsistent with parameters",
                self.index, self.bubble_type
            )));
        }
        Ok(FitResult {
            window,
            params,
            q: self.q,
            damping: self.damping,
            bubble_type: self.bubble_type,
        })
    }
}

/// Streaming writer that appends records with consecutive indices.
pub struct FitStoreWriter {
    out: BufWriter<File>,
    next_index: u64,
}

impl FitStoreWriter {
    /// Create (truncate) a store at `path`.
    pub fn create(path: &Path) -> Result<Self, FitError> {
        let file = File::create(path).map_err(|e| FitError::Store(e.to_string()))?;
        Ok(Self {
            out: BufWriter::new(file),
            next_index: 0,
        })
    }

    /// Open an existing store for appending, continuing the index sequence.
    pub fn append(path: &Path) -> Result<Self, FitError> {
        let next_index = if path.exists() {
            read_fit_store(path)?.len() as u64
        } else {
            0
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| FitError::Store(e.to_string()))?;
        Ok(Self {
            out: BufWriter::new(file),
            next_index,
        })
    }

    pub fn write(&mut self, fit: &FitResult) -> Result<u64, FitError> {
        let record = FitRecord::from_result(self.next_index, fit);
        let line =
            serde_json::to_string(&record).map_err(|e| FitError::Store(e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|e| FitError::Store(e.to_string()))?;
        self.next_index += 1;
        Ok(record.index)
    }

    pub fn finish(mut self) -> Result<(), FitError> {
        self.out.flush().map_err(|e| FitError::Store(e.to_string()))
    }
}

/// Write all fits to a fresh store at `path`.
pub fn write_fit_store(path: &Path, fits: &[FitResult]) -> Result<(), FitError> {
    let mut writer = FitStoreWriter::create(path)?;
    for fit in fits {
        writer.write(fit)?;
    }
    writer.finish()
}

/// Read a store back into fit results, preserving order.
pub fn read_fit_store(path: &Path) -> Result<Vec<FitResult>, FitError> {
    let file = File::open(path).map_err(|e| FitError::Store(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut fits = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FitError::Store(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FitRecord = serde_json::from_str(&line)
            .map_err(|e| FitError::Store(format!("line {}: {e}", lineno + 1)))?;
        fits.push(record.into_result()?);
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_fit(shift: f64) -> FitResult {
        let window = Window::new(
            "2001-01-01".parse().unwrap(),
            "2002-01-01".parse().unwrap(),
        )
        .unwrap();
        let params = LpplParams {
            tc: 731_000.25 + shift,
            m: 0.5,
            omega: 7.0,
            phi: 0.25,
            a: 5.0,
            b: -0.3,
            c: 0.01,
        };
        FitResult {
            window,
            params,
            q: 0.012,
            damping: params.damping(),
            bubble_type: params.bubble_type(),
        }
    }

    #[test]
    fn roundtrip_preserves_fits_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fits.jsonl");
        let fits = vec![sample_fit(0.0), sample_fit(10.5)];
        write_fit_store(&path, &fits).unwrap();
        let loaded = read_fit_store(&path).unwrap();
        assert_eq!(loaded, fits);
    }

    #[test]
    fn record_uses_expected_keys() {
        let record = FitRecord::from_result(3, &sample_fit(0.0));
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&record).unwrap()).unwrap();
        for key in [
            "index",
            "t1",
            "t2",
            "tc",
            "m",
            "omega",
            "phi",
            "A",
            "B",
            "C",
            "q",
            "b",
            "bubble_type",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["index"], 3);
        assert_eq!(json["t1"], "2001-01-01");
    }

    #[test]
    fn append_continues_index_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fits.jsonl");
        write_fit_store(&path, &[sample_fit(0.0)]).unwrap();
        let mut w = FitStoreWriter::append(&path).unwrap();
        let idx = w.write(&sample_fit(5.0)).unwrap();
        w.finish().unwrap();
        assert_eq!(idx, 1);
        assert_eq!(read_fit_store(&path).unwrap().len(), 2);
    }

    #[test]
    fn inconsistent_bubble_type_rejected() {
        let record = FitRecord {
            bubble_type: BubbleType::NegativeBubble, // params say Bubble
            ..FitRecord::from_result(0, &sample_fit(0.0))
        };
        assert!(record.into_result().is_err());
    }
}
