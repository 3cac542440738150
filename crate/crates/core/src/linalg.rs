//! Dense small-matrix kernels for linear SDEs with additive noise.
//!
//! The simulators need three things from linear algebra: the propagator
//! `e^{AΔ}`, the covariance `C(Δ)` of the Gaussian increment accumulated over
//! one step (solution of `Ċ = AC + CA' + BB'`, `C(0) = 0`), and a Cholesky
//! factor of that covariance for sampling. Matrices here are at most 12×12,
//! so everything is plain row-major `Vec<f64>`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Dense row-major matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("matrix entry {bad} is not finite")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `out = self · x`.
    #[inline]
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Matrix {
        let mut out = Matrix::zeros(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.data[i * nc + j] = self.get(r0 + i, c0 + j);
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Matrix) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self.set(r0 + i, c0 + j, src.get(i, j));
            }
        }
    }

    /// `(M + M')/2`.
    pub fn symmetrized(&self) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "cannot solve {}x{} system with {}x{} right-hand side",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut x = rhs.data.clone();
        let m = rhs.cols;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap_or(k);
            let pivot = lu[p * n + k];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Numeric("singular matrix in LU solve".into()));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                for j in 0..m {
                    x.swap(k * m + j, p * m + j);
                }
            }
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
                for j in 0..m {
                    x[i * m + j] -= f * x[k * m + j];
                }
            }
        }
        for k in (0..n).rev() {
            let pivot = lu[k * n + k];
            for j in 0..m {
                let mut s = x[k * m + j];
                for i in (k + 1)..n {
                    s -= lu[k * n + i] * x[i * m + j];
                }
                x[k * m + j] = s / pivot;
            }
        }
        Ok(Matrix { rows: n, cols: m, data: x })
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product dimensions")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum dimensions");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference dimensions");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

// Padé coefficients and switching thresholds for scaling and squaring
// (degrees 3, 5, 7, 9, 13).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.539398330063230e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068e0, 9),
];
const THETA13: f64 = 5.371920351148152;

/// `e^{a·t}` by scaling and squaring with a degree ≤ 13 Padé approximant.
///
/// Diagonal inputs (including the zero matrix) are exponentiated entrywise.
pub fn matrix_exp(a: &Matrix, t: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !t.is_finite() || a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix exponential of non-finite input".into()));
    }
    if a.is_diagonal() {
        let d: Vec<f64> = (0..a.rows).map(|i| (a.get(i, i) * t).exp()).collect();
        return Ok(Matrix::diag(&d));
    }
    let x = a.scale(t);
    let norm = x.norm_1();
    let n = x.rows;
    let ident = Matrix::identity(n);

    for &(theta, degree) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(&x, coeffs, &ident);
        }
    }

    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let xs = x.scale(2f64.powi(-squarings));
    let mut r = pade13(&xs, &ident)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(x: &Matrix, b: &[f64], ident: &Matrix) -> Result<Matrix> {
    let x2 = x * x;
    // Even powers X^0, X^2, X^4, ...
    let mut powers = vec![ident.clone(), x2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &x2;
        powers.push(next);
    }
    let mut u = Matrix::zeros(x.rows, x.cols);
    let mut v = Matrix::zeros(x.rows, x.cols);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u = &u + &p.scale(b[2 * k + 1]);
        }
        v = &v + &p.scale(b[2 * k]);
    }
    let u = x * &u;
    (&v - &u).solve(&(&v + &u))
}

fn pade13(x: &Matrix, ident: &Matrix) -> Result<Matrix> {
    let b = &PADE13;
    let x2 = x * x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let u_inner = &(&x6.scale(b[13]) + &x4.scale(b[11])) + &x2.scale(b[9]);
    let u_tail = &(&(&x6.scale(b[7]) + &x4.scale(b[5])) + &x2.scale(b[3])) + &ident.scale(b[1]);
    let u = x * &(&(&x6 * &u_inner) + &u_tail);
    let v_inner = &(&x6.scale(b[12]) + &x4.scale(b[10])) + &x2.scale(b[8]);
    let v_tail = &(&(&x6.scale(b[6]) + &x4.scale(b[4])) + &x2.scale(b[2])) + &ident.scale(b[0]);
    let v = &(&x6 * &v_inner) + &v_tail;
    (&v - &u).solve(&(&v + &u))
}

/// Covariance `C(dt)` of the Gaussian increment of `dX = AX dt + B dW`,
/// i.e. the solution of `Ċ = AC + CA' + BB'` with `C(0) = 0`.
///
/// Uses the augmented exponential of `[[A, BB'], [0, -A']]`: with
/// `F = exp(τ·block)`, `C(τ) = F₁₂·F₁₁'`. The block is exponentiated over a
/// short interval `τ = dt/2^k` and the result is extended by the exact
/// doubling `C(2τ) = C(τ) + e^{Aτ} C(τ) e^{A'τ}`, which avoids forming
/// `e^{-A'dt}` for stiff `A`. `BB'` enters linearly, so it is normalised
/// before exponentiation and the scale is restored afterwards.
pub fn increment_covariance(a: &Matrix, b: &Matrix, dt: f64) -> Result<Matrix> {
    if !a.is_square() || b.rows != a.rows {
        return Err(Error::Dimension(format!(
            "drift {}x{} and noise {}x{} do not fit together",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let n = a.rows;
    let q = b * &b.transpose();
    let q_scale = q.max_abs();
    if q_scale == 0.0 {
        return Ok(Matrix::zeros(n, n));
    }

    let a_norm = a.norm_1() * dt;
    let doublings = if a_norm > 0.5 { (a_norm / 0.5).log2().ceil() as i32 } else { 0 };
    let tau = dt * 2f64.powi(-doublings);

    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.set_block(0, 0, a);
    block.set_block(0, n, &q.scale(1.0 / q_scale));
    block.set_block(n, n, &a.transpose().scale(-1.0));
    let f = matrix_exp(&block, tau)?;
    let mut prop = f.block(0, 0, n, n);
    let f12 = f.block(0, n, n, n);
    let mut cov = (&f12 * &prop.transpose()).scale(q_scale).symmetrized();

    for _ in 0..doublings {
        cov = (&cov + &(&(&prop * &cov) * &prop.transpose())).symmetrized();
        prop = &prop * &prop;
    }
    Ok(cov)
}

/// Lower-triangular `L` with `L·L' = c` for symmetric positive semidefinite `c`.
///
/// A non-positive pivot within tolerance triggers one retry with
/// `1e-14·trace(c)/n` added to the diagonal; pivots that are still zero
/// yield a zero column. Pivots below `-1e-10·max|c|` are reported as
/// indefiniteness.
pub fn cholesky_psd(c: &Matrix) -> Result<Matrix> {
    if !c.is_square() {
        return Err(Error::Dimension(format!("cholesky of {}x{} matrix", c.rows, c.cols)));
    }
    let n = c.rows;
    let scale = c.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (c.get(i, j) - c.get(j, i)).abs() > 1e-10 * scale {
                return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let tol = 1e-10 * scale;
    match cholesky_attempt(c, 0.0, tol, false)? {
        Some(l) => Ok(l),
        None => {
            let jitter = 1e-14 * c.trace() / n as f64;
            Ok(cholesky_attempt(c, jitter, tol, true)?.expect("semidefinite retry always completes"))
        }
    }
}

fn cholesky_attempt(c: &Matrix, jitter: f64, tol: f64, final_pass: bool) -> Result<Option<Matrix>> {
    let n = c.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = c.get(j, j) + jitter;
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d < -tol {
            return Err(Error::Numeric(format!(
                "matrix is indefinite: pivot {j} gives eigenvalue estimate {d:.3e}"
            )));
        }
        if d <= 0.0 {
            if !final_pass {
                return Ok(None);
            }
            // Zero column: the remaining rows must already be explained by earlier columns.
            continue;
        }
        let ljj = d.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut s = c.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(Some(l))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Intended for small verification tasks (PSD checks), not for performance.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = m.rows;
    let mut a = m.symmetrized();
    for _sweep in 0..100 {
        let off: f64 =
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a.get(i, j).powi(2)).sum();
        if off <= 1e-30 * a.norm_fro().powi(2).max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, cs * akp - sn * akq);
                    a.set(k, q, sn * akp + cs * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, cs * apk - sn * aqk);
                    a.set(q, k, sn * apk + cs * aqk);
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        let diff = (a - b).max_abs();
        assert!(diff <= tol * (1.0 + b.max_abs()), "diff {diff:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&Matrix::zeros(2, 2), 1.0).unwrap();
        assert_eq!(e, Matrix::identity(2));
    }

    #[test]
    fn exp_of_diagonal_is_entrywise() {
        let e = matrix_exp(&Matrix::diag(&[-1.0, -2.0]), 1.0).unwrap();
        assert_eq!(e, Matrix::diag(&[(-1f64).exp(), (-2f64).exp()]));
    }

    #[test]
    fn exp_rejects_bad_input() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(matrix_exp(&rect, 1.0), Err(Error::Dimension(_))));
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!(matches!(matrix_exp(&a, f64::NAN), Err(Error::Domain(_))));
        assert!(Matrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn exp_of_rotation_generator() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let t = 0.7f64;
        let e = matrix_exp(&a, t).unwrap();
        let want = Matrix::from_rows(&[&[t.cos(), t.sin()], &[-t.sin(), t.cos()]]).unwrap();
        assert_close(&e, &want, 1e-14);
        // Large argument goes through the squaring phase.
        let e = matrix_exp(&a, 40.0).unwrap();
        let want = Matrix::from_rows(&[&[40f64.cos(), 40f64.sin()], &[-40f64.sin(), 40f64.cos()]]).unwrap();
        assert_close(&e, &want, 1e-12);
    }

    #[test]
    fn covariance_without_noise_is_zero() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[-400.0, -2.0]]).unwrap();
        let c = increment_covariance(&a, &Matrix::zeros(2, 1), 0.3).unwrap();
        assert_eq!(c, Matrix::zeros(2, 2));
    }

    #[test]
    fn covariance_of_brownian_motion() {
        let c = increment_covariance(&Matrix::zeros(2, 2), &Matrix::identity(2), 0.5).unwrap();
        assert_close(&c, &Matrix::diag(&[0.5, 0.5]), 1e-15);
    }

    #[test]
    fn covariance_reaches_oscillator_stationary_law() {
        // λ = 20, γ = 1, σ = 2: stationary covariance diag(σ²/(4γλ²), σ²/(4γ)).
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[-400.0, -2.0]]).unwrap();
        let b = Matrix::from_rows(&[&[0.0], &[2.0]]).unwrap();
        let c = increment_covariance(&a, &b, 10.0).unwrap();
        let want = Matrix::diag(&[0.0025, 1.0]);
        assert!((&c - &want).max_abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn covariance_dimension_errors() {
        let a = Matrix::zeros(2, 2);
        assert!(matches!(increment_covariance(&a, &Matrix::zeros(3, 1), 1.0), Err(Error::Dimension(_))));
        assert!(matches!(increment_covariance(&Matrix::zeros(2, 3), &Matrix::zeros(2, 1), 1.0), Err(Error::Dimension(_))));
        assert!(increment_covariance(&a, &Matrix::zeros(2, 1), 0.0).is_err());
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(cholesky_psd(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let c = Matrix::from_rows(&[&[4.0, 2.0], &[2.0, 2.0]]).unwrap();
        let l = cholesky_psd(&c).unwrap();
        assert_eq!(l, Matrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0]]).unwrap());
        assert_eq!(cholesky_psd(&Matrix::zeros(2, 2)).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn cholesky_of_rank_deficient_matrix() {
        // v v' with v = (1, 2, 3): rank one.
        let v = [1.0, 2.0, 3.0];
        let data: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| v[i] * v[j])).collect();
        let c = Matrix::new(3, 3, data).unwrap();
        let l = cholesky_psd(&c).unwrap();
        let back = &l * &l.transpose();
        assert!((&back - &c).max_abs() <= 1e-10 * c.max_abs());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let c = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        match cholesky_psd(&c) {
            Err(Error::Numeric(msg)) => assert!(msg.contains("eigenvalue estimate"), "{msg}"),
            other => panic!("expected numeric error, got {other:?}"),
        }
        let asym = Matrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        assert!(matches!(cholesky_psd(&asym), Err(Error::Domain(_))));
    }

    #[test]
    fn jacobi_eigenvalues() {
        let c = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let ev = symmetric_eigenvalues(&c).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_recovers_solution() {
        let a = Matrix::from_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]).unwrap();
        let x = Matrix::from_rows(&[&[1.0], &[-2.0], &[0.5]]).unwrap();
        let b = &a * &x;
        assert_close(&a.solve(&b).unwrap(), &x, 1e-14);
    }
}
