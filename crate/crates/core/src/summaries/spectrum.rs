use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::with_fft;
use super::{check_input, Curve, Support};
use crate::error::{Error, Result};

/// Periodogram conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// Fraction of the series tapered at each end by a split cosine bell.
    pub taper_per_end: f64,
    /// Smoothing span in units of the series duration `T`; the modified
    /// Daniell half-width is `⌊span_factor · T / 2⌋` bins.
    pub span_factor: f64,
    pub demean: bool,
    pub detrend: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { taper_per_end: 0.05, span_factor: 5.0, demean: true, detrend: false }
    }
}

impl SpectralConfig {
    pub fn halfwidth(&self, duration: f64) -> usize {
        (self.span_factor * duration / 2.0).floor().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    /// `ν_j = j/(mΔ)`, `j = 1..⌊m/2⌋`, in cycles per unit time.
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub smoother_halfwidths: Vec<usize>,
}

impl SpectralEstimate {
    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        self.frequencies[i]
    }
}

impl Curve for SpectralEstimate {
    const SUPPORT: Support = Support::Overlap;

    fn abscissae(&self) -> &[f64] {
        &self.frequencies
    }

    fn ordinates(&self) -> &[f64] {
        &self.values
    }
}

/// Split-cosine-bell weights tapering `p·m` points at each end.
pub fn split_cosine_bell(m: usize, p: f64) -> Vec<f64> {
    let mut w = vec![1.0; m];
    let k = (p * m as f64).floor() as usize;
    for i in 0..k.min(m / 2) {
        let v = 0.5 * (1.0 - (PI * (2 * i + 1) as f64 / (2 * k) as f64).cos());
        w[i] = v;
        w[m - 1 - i] = v;
    }
    w
}

/// One circular pass of the modified Daniell kernel: weight `1/(2h)` inside,
/// `1/(4h)` at both ends.
pub fn modified_daniell(x: &[f64], h: usize) -> Vec<f64> {
    let mut out = Vec::new();
    modified_daniell_into(x, h, &mut Vec::new(), &mut out);
    out
}

fn modified_daniell_into(x: &[f64], h: usize, ext: &mut Vec<f64>, out: &mut Vec<f64>) {
    let n = x.len();
    out.clear();
    if h == 0 || n == 0 {
        out.extend_from_slice(x);
        return;
    }
    // Circular extension by h on both sides: ext[k] = x[(k - h) mod n].
    ext.clear();
    if h < n {
        ext.extend_from_slice(&x[n - h..]);
        ext.extend_from_slice(x);
        ext.extend_from_slice(&x[..h]);
    } else {
        ext.extend((0..n + 2 * h).map(|k| x[(k + n * (h / n + 1) - h) % n]));
    }
    let inner = 1.0 / (2 * h) as f64;
    // Running sum of ext[i + 1 .. i + 2h], i.e. x[i - h + 1 ..= i + h - 1].
    let mut window: f64 = ext[1..2 * h].iter().sum();
    for i in 0..n {
        out.push(inner * (window + 0.5 * (ext[i] + ext[i + 2 * h])));
        if i + 1 < n {
            window += ext[i + 2 * h] - ext[i + 1];
        }
    }
}

/// Per-thread buffers reused across calls; large fresh allocations dominate
/// the cost of a single estimate otherwise.
#[derive(Default)]
struct Workspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    taper: (usize, u64, Vec<f64>),
    pgram: Vec<f64>,
    ext: Vec<f64>,
    smooth: Vec<f64>,
}

thread_local! {
    static WORKSPACE: RefCell<Workspace> = RefCell::new(Workspace::default());
}

/// Smoothed periodogram of a series sampled every `dt`.
pub fn smoothed_periodogram(y: &[f64], dt: f64, cfg: &SpectralConfig) -> Result<SpectralEstimate> {
    check_input(y)?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("sampling interval must be positive, got {dt}")));
    }
    if !(0.0..0.5).contains(&cfg.taper_per_end) {
        return Err(Error::Config(format!("taper fraction must lie in [0, 0.5), got {}", cfg.taper_per_end)));
    }
    let m = y.len();
    // Removed trend: ybar + slope · (i - tm).
    let tm = (m - 1) as f64 / 2.0;
    let ybar = if cfg.demean || cfg.detrend { y.iter().sum::<f64>() / m as f64 } else { 0.0 };
    let slope = if cfg.detrend {
        let sxx: f64 = (0..m).map(|i| (i as f64 - tm).powi(2)).sum();
        y.iter().enumerate().map(|(i, v)| (i as f64 - tm) * (v - ybar)).sum::<f64>() / sxx
    } else {
        0.0
    };

    let h = cfg.halfwidth(m as f64 * dt).min((m - 1) / 2);
    let half = m / 2;
    let span = m as f64 * dt;
    // Power lost to the taper.
    let u2 = 1.0 - 1.25 * cfg.taper_per_end;
    let norm = dt / (m as f64 * u2);

    let values = WORKSPACE.with(|ws| {
        let ws = &mut *ws.borrow_mut();
        if ws.taper.0 != m || ws.taper.1 != cfg.taper_per_end.to_bits() {
            ws.taper = (m, cfg.taper_per_end.to_bits(), split_cosine_bell(m, cfg.taper_per_end));
        }
        ws.buf.clear();
        ws.buf.extend(
            y.iter()
                .zip(&ws.taper.2)
                .enumerate()
                .map(|(i, (v, w))| Complex::new((v - ybar - slope * (i as f64 - tm)) * w, 0.0)),
        );
        with_fft(m, |fwd, _| {
            ws.scratch.resize(fwd.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
            fwd.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        });
        ws.pgram.clear();
        ws.pgram.extend(ws.buf.iter().map(|c| c.norm_sqr() * norm));
        ws.pgram[0] = 0.5 * (ws.pgram[1] + ws.pgram[m - 1]);
        if !ws.pgram.iter().all(|v| v.is_finite()) {
            return Vec::new();
        }
        modified_daniell_into(&ws.pgram, h, &mut ws.ext, &mut ws.smooth);
        ws.smooth[1..=half].iter().map(|v| v.max(0.0)).collect::<Vec<f64>>()
    });
    // Power beyond f64 range turns into inf or NaN, which `max` would hide.
    if not_finite(&values) {
        return Err(Error::Summary("periodogram ordinates are not finite".into()));
    }

    Ok(SpectralEstimate {
        frequencies: (1..=half).map(|j| j as f64 / span).collect(),
        values,
        smoother_halfwidths: vec![h],
    })
}

fn not_finite(values: &[f64]) -> bool {
    values.is_empty() || !values.iter().all(|v| v.is_finite())
}
