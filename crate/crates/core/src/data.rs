//! Lifetime datasets: validation, CSV ingestion and the two bundled samples.

use serde::Serialize;

use crate::error::{McgError, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset<T> {
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Real> Dataset<T> {
    pub fn new(values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(McgError::Data("dataset is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > T::zero())) {
            return Err(McgError::Data(format!("lifetimes must be finite and > 0, found {bad}")));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    /// One value per line, optional single header line, LF or CRLF.
    pub fn from_csv_str(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut values = Vec::new();
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let field = line.split(',').next().unwrap_or("").trim();
            match field.parse::<f64>() {
                Ok(v) => values.push(T::lit(v)),
                Err(_) if lineno == 0 || (values.is_empty() && lineno == first_nonempty(text)) => continue,
                Err(_) => {
                    return Err(McgError::Data(format!("line {}: cannot parse '{field}' as a number", lineno + 1)));
                }
            }
        }
        Self::new(values, label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_count(self.len())
    }

    pub fn median(&self) -> T {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
        }
    }
}

fn first_nonempty(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

const AARSET: &str = include_str!("../../../data/aarset_devices.csv");
const GLASS: &str = include_str!("../../../data/glass_fibers.csv");

/// Failure times of 50 devices put on life test (n = 50).
pub fn aarset_devices<T: Real>() -> Dataset<T> {
    Dataset::from_csv_str(AARSET, "aarset_devices").expect("bundled data parses")
}

/// Strengths of 1.5 cm glass fibres (n = 63).
pub fn glass_fibers<T: Real>() -> Dataset<T> {
    Dataset::from_csv_str(GLASS, "glass_fibers").expect("bundled data parses")
}
