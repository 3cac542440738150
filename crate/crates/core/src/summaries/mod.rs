//! Invariant-measure summaries of a path: a smoothed periodogram of the
//! stationary spectral density and a kernel estimate of the invariant
//! marginal density, plus the IAE distance between such curves.

mod fft;
mod iae;
mod kde;
mod spectrum;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use iae::{iae, iae_curves, trapezoid, Curve, Support};
pub use kde::{kde, silverman_bandwidth, DensityEstimate, KdeConfig};
pub use spectrum::{modified_daniell, smoothed_periodogram, split_cosine_bell, SpectralConfig, SpectralEstimate};

use crate::error::{Error, Result};
use crate::sim::Trajectory;

pub const MIN_SAMPLES: usize = 10;

pub(crate) fn check_input(y: &[f64]) -> Result<()> {
    if y.len() < MIN_SAMPLES {
        return Err(Error::Summary(format!("need at least {MIN_SAMPLES} samples, got {}", y.len())));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Summary(format!("sample {i} is not finite ({})", y[i])));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummaryConfig {
    pub spectral: SpectralConfig,
    pub density: KdeConfig,
}

/// Spectral and density estimates of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPair {
    pub spec: SpectralEstimate,
    pub dens: DensityEstimate,
}

impl SummaryPair {
    /// Writes `x,value` rows of the spectrum followed by a blank line and the density.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_curve_csv(&mut w, &self.spec.frequencies, &self.spec.values)?;
        writeln!(w)?;
        write_curve_csv(&mut w, &self.dens.grid, &self.dens.values)
    }
}

pub fn write_curve_csv<W: Write>(mut w: W, x: &[f64], y: &[f64]) -> std::io::Result<()> {
    writeln!(w, "x,value")?;
    for (a, b) in x.iter().zip(y) {
        writeln!(w, "{a:.16e},{b:.16e}")?;
    }
    Ok(())
}

fn check_trajectory(y: &Trajectory) -> Result<()> {
    if y.overflowed {
        return Err(Error::Summary("trajectory overflowed".into()));
    }
    Ok(())
}

pub fn density_of(y: &Trajectory, cfg: &SummaryConfig) -> Result<DensityEstimate> {
    check_trajectory(y)?;
    kde(&y.values, &cfg.density)
}

pub fn spectrum_of(y: &Trajectory, cfg: &SummaryConfig) -> Result<SpectralEstimate> {
    check_trajectory(y)?;
    smoothed_periodogram(&y.values, y.grid.dt, &cfg.spectral)
}

pub fn summarize(y: &Trajectory, cfg: &SummaryConfig) -> Result<SummaryPair> {
    check_trajectory(y)?;
    summarize_series(&y.values, y.grid.dt, cfg)
}

/// Summaries of a raw series sampled every `dt`.
pub fn summarize_series(y: &[f64], dt: f64, cfg: &SummaryConfig) -> Result<SummaryPair> {
    Ok(SummaryPair { spec: smoothed_periodogram(y, dt, &cfg.spectral)?, dens: kde(y, &cfg.density)? })
}
