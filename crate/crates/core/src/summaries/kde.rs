use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::with_fft;
use super::{check_input, Curve, Support};
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sd, sorted_copy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdeConfig {
    /// Number of output abscissae.
    pub grid_points: usize,
    /// The grid extends `cut` bandwidths beyond the data range.
    pub cut: f64,
    /// Internal binning resolution (rounded up to a power of two).
    pub bins: usize,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self { grid_points: 1000, cut: 3.0, bins: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

impl Curve for DensityEstimate {
    const SUPPORT: Support = Support::ZeroExtended;

    fn abscissae(&self) -> &[f64] {
        &self.grid
    }

    fn ordinates(&self) -> &[f64] {
        &self.values
    }
}

/// `0.9 · min(sd, IQR/1.34) · m^{-1/5}`, falling back to `sd` when the IQR is zero.
pub fn silverman_bandwidth(y: &[f64]) -> Result<f64> {
    let s = sd(y);
    let sorted = sorted_copy(y);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut lo = s.min(iqr / 1.34);
    if !(lo > 0.0) {
        lo = s;
    }
    if !(lo > 0.0) || !lo.is_finite() {
        return Err(Error::Summary("zero-variance series has no density estimate".into()));
    }
    Ok(0.9 * lo * (y.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate.
///
/// Samples are linearly binned onto a regular mesh covering the data range
/// plus four bandwidths, convolved with the kernel by FFT, and interpolated
/// onto the output grid.
pub fn kde(y: &[f64], cfg: &KdeConfig) -> Result<DensityEstimate> {
    check_input(y)?;
    if cfg.grid_points < 2 {
        return Err(Error::Config("density grid needs at least 2 points".into()));
    }
    let h = silverman_bandwidth(y)?;
    let (min, max) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));

    let n = cfg.bins.max(cfg.grid_points).next_power_of_two();
    let lo = min - 4.0 * h;
    let up = max + 4.0 * h;
    let dx = (up - lo) / (n - 1) as f64;

    let w = 1.0 / y.len() as f64;
    let mut bins = vec![Complex::new(0.0, 0.0); 2 * n];
    for &v in y {
        let pos = (v - lo) / dx;
        let ix = pos.floor();
        let fx = pos - ix;
        let ix = ix as usize;
        // Data lie at least 4h inside the mesh, so ix + 1 < n.
        bins[ix].re += w * (1.0 - fx);
        bins[ix + 1].re += w * fx;
    }

    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let mut kernel: Vec<Complex<f64>> = (0..2 * n)
        .map(|k| {
            let off = if k <= n { k as f64 } else { k as f64 - (2 * n) as f64 } * dx;
            Complex::new(norm * (-0.5 * (off / h).powi(2)).exp(), 0.0)
        })
        .collect();
    // Discrete kernel mass is exactly one, so the mesh conserves probability.
    let kmass: f64 = kernel.iter().map(|c| c.re).sum::<f64>() * dx;
    for k in kernel.iter_mut() {
        k.re /= kmass;
    }

    with_fft(2 * n, |fwd, inv| {
        fwd.process(&mut bins);
        fwd.process(&mut kernel);
        for (b, k) in bins.iter_mut().zip(&kernel) {
            *b *= k;
        }
        inv.process(&mut bins);
    });
    let scale = 1.0 / (2 * n) as f64;
    let mesh: Vec<f64> = bins[..n].iter().map(|c| (c.re * scale).max(0.0)).collect();

    let g0 = min - cfg.cut * h;
    let g1 = max + cfg.cut * h;
    let step = (g1 - g0) / (cfg.grid_points - 1) as f64;
    let mut grid = Vec::with_capacity(cfg.grid_points);
    let mut values = Vec::with_capacity(cfg.grid_points);
    for i in 0..cfg.grid_points {
        let x = if i + 1 == cfg.grid_points { g1 } else { g0 + i as f64 * step };
        let pos = ((x - lo) / dx).clamp(0.0, (n - 1) as f64);
        let j = (pos.floor() as usize).min(n - 2);
        let f = pos - j as f64;
        grid.push(x);
        values.push(mesh[j] * (1.0 - f) + mesh[j + 1] * f);
    }
    // Interpolation onto the output grid can add quadrature error of order
    // 1e-7 on top of the unit mesh mass; the estimate never claims more than one.
    let mass = super::trapezoid(&grid, &values);
    // A mesh wider than f64 range loses all mass; such a series has no usable estimate.
    if !(mass > 0.0 && mass.is_finite()) || !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::Summary("density estimate is not finite".into()));
    }
    if mass > 1.0 {
        for v in values.iter_mut() {
            *v /= mass;
        }
    }
    Ok(DensityEstimate { grid, values, bandwidth: h })
}
