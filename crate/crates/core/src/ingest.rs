//! Loading observed series from text files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map `y ↦ offset + scale · y` applied on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rescale {
    pub offset: f64,
    pub scale: f64,
}

impl Default for Rescale {
    fn default() -> Self {
        Self { offset: 0.0, scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedSeries {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl IngestedSeries {
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Splits into `m` equal consecutive segments, dropping the remainder.
    pub fn cut(&self, m: usize) -> Result<Vec<IngestedSeries>> {
        if m == 0 {
            return Err(Error::Config("cut must be at least 1".into()));
        }
        let len = self.samples.len() / m;
        if len == 0 {
            return Err(Error::Ingest(format!("{} samples cannot be cut into {m} segments", self.samples.len())));
        }
        Ok(self
            .samples
            .chunks_exact(len)
            .take(m)
            .map(|c| IngestedSeries { samples: c.to_vec(), sample_rate: self.sample_rate })
            .collect())
    }
}

/// Parses one value per line, a single-column CSV, or a `t,y` CSV (the last
/// column is used). A non-numeric first line is treated as a header; blank
/// lines are skipped.
pub fn parse_series(text: &str, sample_rate: f64, rescale: Rescale) -> Result<IngestedSeries> {
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(Error::Config(format!("sample rate must be positive, got {sample_rate}")));
    }
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(rescale.offset + rescale.scale * v),
            _ if samples.is_empty() && i == 0 && field.parse::<f64>().is_err() => continue,
            _ => return Err(Error::Ingest(format!("line {}: `{line}` is not a finite number", i + 1))),
        }
    }
    if samples.is_empty() {
        return Err(Error::Ingest("no samples found".into()));
    }
    Ok(IngestedSeries { samples, sample_rate })
}

pub fn read_series(path: &Path, sample_rate: f64, rescale: Rescale) -> Result<IngestedSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    parse_series(&text, sample_rate, rescale).map_err(|e| match e {
        Error::Ingest(msg) => Error::Ingest(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let s = parse_series("1\n2\n\n3\n", 173.61, Rescale::default()).unwrap();
        assert_eq!(s.samples, vec![1.0, 2.0, 3.0]);
        assert!((s.dt() - 5.76e-3).abs() < 1e-5);
        let s = parse_series("t,y\n0.1,4\n0.2,5\n", 10.0, Rescale { offset: 1.0, scale: 2.0 }).unwrap();
        assert_eq!(s.samples, vec![9.0, 11.0]);
        let s = parse_series("value\n-7\n", 1.0, Rescale::default()).unwrap();
        assert_eq!(s.samples, vec![-7.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_series("1\n2\nabc\n", 1.0, Rescale::default()).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(matches!(parse_series("", 1.0, Rescale::default()), Err(Error::Ingest(_))));
        assert!(matches!(parse_series("1\n", 0.0, Rescale::default()), Err(Error::Config(_))));
    }

    #[test]
    fn cutting() {
        let s = IngestedSeries { samples: (0..10).map(f64::from).collect(), sample_rate: 1.0 };
        let parts = s.cut(4).unwrap();
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| p.samples.len() == 2));
        assert_eq!(parts[3].samples, vec![6.0, 7.0]);
        assert!(s.cut(11).is_err());
    }
}
