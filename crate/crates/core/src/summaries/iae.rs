use crate::error::{Error, Result};

/// How a curve is continued outside its grid when compared on another grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Zero outside the grid (densities).
    ZeroExtended,
    /// Only the common abscissa range is compared (spectra).
    Overlap,
}

/// A function sampled on an increasing grid.
pub trait Curve {
    const SUPPORT: Support;
    fn abscissae(&self) -> &[f64];
    fn ordinates(&self) -> &[f64];
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * 0.5).sum()
}

fn trapezoid_abs_diff(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut prev = (a[0] - b[0]).abs();
    for i in 1..x.len() {
        let d = (a[i] - b[i]).abs();
        acc += (x[i] - x[i - 1]) * (prev + d) * 0.5;
        prev = d;
    }
    acc
}

/// Integrated absolute error `∫|f1 − f2|` by the trapezoidal rule on the grid
/// of `f1`. `f2` is linearly interpolated onto that grid when the grids differ.
pub fn iae(x1: &[f64], y1: &[f64], x2: &[f64], y2: &[f64], support: Support) -> Result<f64> {
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::Domain("IAE of an empty curve".into()));
    }
    if x1.len() != y1.len() || x2.len() != y2.len() {
        return Err(Error::Dimension(format!(
            "curve abscissae and ordinates differ in length ({}/{} and {}/{})",
            x1.len(),
            y1.len(),
            x2.len(),
            y2.len()
        )));
    }
    if x1 == x2 {
        return Ok(trapezoid_abs_diff(x1, y1, y2));
    }
    let (lo, hi) = (x2[0], x2[x2.len() - 1]);
    let (start, end) = match support {
        Support::ZeroExtended => (0, x1.len()),
        Support::Overlap => {
            let s = x1.partition_point(|&x| x < lo);
            let e = x1.partition_point(|&x| x <= hi);
            if e <= s + 1 {
                return Err(Error::Domain("spectral curves have no overlapping frequency range".into()));
            }
            (s, e)
        }
    };
    let xs = &x1[start..end];
    let mut interp = Vec::with_capacity(xs.len());
    let mut j = 0;
    for &x in xs {
        if x < lo || x > hi {
            interp.push(0.0);
            continue;
        }
        while j + 2 < x2.len() && x2[j + 1] < x {
            j += 1;
        }
        if x2.len() == 1 {
            interp.push(y2[0]);
            continue;
        }
        let k = j + 1;
        let w = if x2[k] > x2[j] { (x - x2[j]) / (x2[k] - x2[j]) } else { 0.0 };
        interp.push(y2[j] + w * (y2[k] - y2[j]));
    }
    Ok(trapezoid_abs_diff(xs, &y1[start..end], &interp))
}

pub fn iae_curves<C: Curve>(a: &C, b: &C) -> Result<f64> {
    iae(a.abscissae(), a.ordinates(), b.abscissae(), b.ordinates(), C::SUPPORT)
}
