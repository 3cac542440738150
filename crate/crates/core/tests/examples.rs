//! Worked examples checked against independent oracles.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use specabc::abc::{pilot_ratio, ReferenceSet};
use specabc::summaries::{iae, kde, modified_daniell, smoothed_periodogram, KdeConfig, SpectralConfig, Support};
use specabc::{
    matrix_exp, pilot_weight, run_abc, simulate, AbcSettings, DistanceConfig, Error, HamiltonianModel, Matrix,
    ModelId, ModelSpec, ParameterVector, RngStream, Scheme, SimGrid, SummaryConfig, UniformPrior,
};

fn params(pairs: &[(&str, f64)]) -> ParameterVector {
    ParameterVector::from_pairs(pairs.iter().copied()).unwrap()
}

fn mp2(lambda: f64, gamma: f64, sigma: f64) -> HamiltonianModel {
    ModelId::Mp2.build(&params(&[("lambda", lambda), ("gamma", gamma), ("sigma", sigma)])).unwrap()
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn to_f64(x: &BigRational) -> f64 {
    // Exact numerator/denominator scaled into f64 range before dividing.
    let shift = (x.denom().bits() as i64 - 60).max(0);
    let num = x.numer() >> shift as usize;
    let den = x.denom() >> shift as usize;
    let n: f64 = num.to_string().parse().unwrap();
    let d: f64 = den.to_string().parse().unwrap();
    n / d
}

#[test]
fn oscillator_exponential_matches_exact_taylor_series() {
    let t = 0.01;
    let a = Matrix::from_rows(&[&[0.0, 1.0], &[-400.0, -2.0]]).unwrap();
    // Σ_{k≤50} (a t)^k / k! in exact rational arithmetic on the rounded entries of a·t.
    let at: Vec<Vec<BigRational>> = (0..2).map(|i| (0..2).map(|j| rational(a.get(i, j) * t)).collect()).collect();
    let zero = BigRational::from_integer(BigInt::from(0));
    let one = BigRational::from_integer(BigInt::from(1));
    let mut term = vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]];
    let mut sum = term.clone();
    for k in 1..=50 {
        let mut next = vec![vec![zero.clone(), zero.clone()], vec![zero.clone(), zero.clone()]];
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    next[i][j] += &term[i][l] * &at[l][j];
                }
                next[i][j] /= BigRational::from_integer(BigInt::from(k));
            }
        }
        term = next;
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += &term[i][j];
            }
        }
    }
    let e = matrix_exp(&a, t).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let oracle = to_f64(&sum[i][j]);
            assert!((e.get(i, j) - oracle).abs() < 1e-12, "({i},{j}): {} vs {oracle}", e.get(i, j));
        }
    }
}

fn mp2_path(t_end: f64, seed: u64) -> Vec<f64> {
    let grid = SimGrid::new(0.01, t_end).unwrap();
    simulate(&mp2(20.0, 1.0, 2.0), &grid, Scheme::Exact, &RngStream::new(seed, 0)).unwrap().values
}

#[test]
fn mp2_density_estimate_matches_invariant_law() {
    let y = mp2_path(1000.0, 41);
    let d = kde(&y, &KdeConfig::default()).unwrap();
    let v: f64 = 0.0025;
    let truth: Vec<f64> = d.grid.iter().map(|x| (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()).collect();
    let err = iae(&d.grid, &d.values, &d.grid, &truth, Support::ZeroExtended).unwrap();
    assert!(err < 0.1, "IAE {err}");
}

/// Analytic spectral density of the MP2 output on the full circle of Fourier
/// frequencies, smoothed by the same Daniell kernel as the estimator. The
/// density is the Fourier transform of the closed-form autocovariance,
/// `σ² / ((λ² - ω²)² + 4γ²ω²)` at angular frequency `ω`.
fn smoothed_analytic_peak(lambda: f64, gamma: f64, sigma: f64, m: usize, dt: f64, h: usize) -> f64 {
    let span = m as f64 * dt;
    let s: Vec<f64> = (0..m)
        .map(|j| {
            let j = j.min(m - j);
            let w = 2.0 * PI * j as f64 / span;
            sigma * sigma / ((lambda * lambda - w * w).powi(2) + 4.0 * gamma * gamma * w * w)
        })
        .collect();
    let smooth = modified_daniell(&s, h);
    let best = (1..=m / 2).max_by(|&a, &b| smooth[a].total_cmp(&smooth[b])).unwrap();
    best as f64 / span
}

#[test]
fn mp2_spectrum_peaks_where_the_smoothed_analytic_density_does() {
    let y = mp2_path(1000.0, 42);
    let cfg = SpectralConfig::default();
    let s = smoothed_periodogram(&y, 0.01, &cfg).unwrap();
    let oracle = smoothed_analytic_peak(20.0, 1.0, 2.0, y.len(), 0.01, s.smoother_halfwidths[0]);
    let peak = s.peak_frequency();
    assert!((peak - oracle).abs() <= 0.5, "estimate {peak}, oracle {oracle}");
    // Without smoothing the line sits at the damped frequency κ/2π.
    let raw = smoothed_periodogram(&y, 0.01, &SpectralConfig { span_factor: 0.0, ..cfg }).unwrap();
    let kappa = (400.0f64 - 1.0).sqrt() / (2.0 * PI);
    let narrow = smoothed_periodogram(&y, 0.01, &SpectralConfig { span_factor: 0.2, ..cfg }).unwrap();
    assert!((narrow.peak_frequency() - kappa).abs() <= 0.5, "{} vs {kappa}", narrow.peak_frequency());
    assert_eq!(raw.smoother_halfwidths, vec![0]);
}

#[test]
fn strang_preserves_the_invariant_law_across_steps() {
    let model = mp2(20.0, 1.0, 2.0);
    let v = 0.0025;
    let t_end = 1000.0;
    for (k, dt) in [1e-3, 2.5e-3, 5e-3, 1e-2].into_iter().enumerate() {
        let grid = SimGrid::from_steps(dt, (t_end / dt).round() as usize).unwrap();
        for scheme in [Scheme::StrangSdeOuter, Scheme::Exact] {
            let y = simulate(&model, &grid, scheme, &RngStream::new(300 + k as u64, 0)).unwrap().values;
            let n = y.len() as f64;
            let mean = y.iter().sum::<f64>() / n;
            let var = y.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / (t_end * 1.0)).sqrt();
            assert!(mean.abs() < 3.0 * se, "{scheme} dt={dt}: mean {mean}");
            assert!((var / v - 1.0).abs() < 0.1, "{scheme} dt={dt}: var {var}");
        }
    }
}

#[test]
fn strang_variance_error_does_not_grow_with_the_step() {
    let model = mp2(20.0, 1.0, 2.0);
    let v = 0.0025;
    let t_end = 1000.0;
    let mean_error = |dt: f64| {
        let grid = SimGrid::from_steps(dt, (t_end / dt).round() as usize).unwrap();
        let errs: Vec<f64> = (0..8)
            .map(|k| {
                let y = simulate(&model, &grid, Scheme::StrangSdeOuter, &RngStream::new(500 + k, 0)).unwrap().values;
                let n = y.len() as f64;
                let m = y.iter().sum::<f64>() / n;
                (y.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) - v).abs()
            })
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let coarse = mean_error(1e-2);
    let fine = mean_error(1e-3);
    assert!(coarse <= 2.0 * fine, "error {coarse} at 1e-2 vs {fine} at 1e-3");
}

#[test]
fn euler_density_is_worse_at_large_steps() {
    let model = mp2(20.0, 1.0, 2.0);
    let dt = 4.5e-3;
    let grid = SimGrid::from_steps(dt, (1000.0 / dt).round() as usize).unwrap();
    let stream = RngStream::new(77, 0);
    let v: f64 = 0.0025;
    let err = |scheme| {
        let y = simulate(&model, &grid, scheme, &stream).unwrap().values;
        let d = kde(&y, &KdeConfig::default()).unwrap();
        let truth: Vec<f64> = d.grid.iter().map(|x| (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()).collect();
        iae(&d.grid, &d.values, &d.grid, &truth, Support::ZeroExtended).unwrap()
    };
    let (euler, strang) = (err(Scheme::Euler), err(Scheme::StrangSdeOuter));
    assert!(euler > strang, "euler {euler} strang {strang}");
}

fn oscillator_prior() -> UniformPrior {
    UniformPrior::new([("lambda", 18.0, 22.0), ("gamma", 0.01, 2.01), ("sigma", 1.0, 3.0)]).unwrap()
}

fn settings(grid: SimGrid, scheme: Scheme, n_total: usize) -> AbcSettings {
    AbcSettings {
        grid,
        scheme,
        n_total,
        percentile: 5.0,
        distance: DistanceConfig::default(),
        summary: SummaryConfig::default(),
        seed: 13,
        workers: 0,
    }
}

#[test]
fn pilot_examples() {
    let spec = ModelSpec { id: ModelId::Mp2, fixed: ParameterVector::new() };
    let grid = SimGrid::new(0.01, 100.0).unwrap();
    let s = settings(grid, Scheme::Exact, 1);

    let one = pilot_weight(&spec, &oscillator_prior(), 1, &s).unwrap();
    assert_eq!(one.ratios.len(), 1);
    assert_eq!(one.weight, one.ratios[0]);

    let report = pilot_weight(&spec, &oscillator_prior(), 1000, &s).unwrap();
    assert_eq!(report.ratios.len(), 1000);
    assert!(report.weight > 0.0 && report.weight.is_finite(), "w = {}", report.weight);

    // Two summaries of the same path give 0/0, which is not a valid ratio.
    let path = simulate(&mp2(20.0, 1.0, 2.0), &grid, Scheme::Exact, &RngStream::new(1, 0)).unwrap();
    let a = specabc::summarize(&path, &SummaryConfig::default()).unwrap();
    assert_eq!(pilot_ratio(&a, &a), None);
}

#[test]
fn euler_run_near_truth_fails_outright() {
    let grid = SimGrid::new(0.01, 1000.0).unwrap();
    let reference =
        ReferenceSet::simulate(&mp2(20.0, 1.0, 2.0), &grid, Scheme::Exact, 2, 3, &SummaryConfig::default()).unwrap();
    // Euler grows by |1 + Δ(-γ ± iκ)| = sqrt(1 - 2γΔ + λ²Δ²) per step; at γ = 1 and
    // λ ≥ 19 that exceeds e^709 within 1e5 steps, so every path overflows.
    let prior = UniformPrior::new([("lambda", 19.0, 21.0)]).unwrap();
    let spec = ModelSpec { id: ModelId::Mp2, fixed: params(&[("gamma", 1.0), ("sigma", 2.0)]) };
    let err = run_abc(&spec, &prior, &reference, &settings(grid, Scheme::Euler, 40)).unwrap_err();
    assert!(matches!(err, Error::Run(ref m) if m.contains("no candidate produced valid summaries")), "{err}");
}

#[test]
fn reference_sets_round_trip_through_json() {
    let grid = SimGrid::new(0.01, 20.0).unwrap();
    let reference =
        ReferenceSet::simulate(&mp2(20.0, 1.0, 2.0), &grid, Scheme::Exact, 3, 8, &SummaryConfig::default()).unwrap();
    let text = serde_json::to_string(&reference).unwrap();
    let back: ReferenceSet = serde_json::from_str(&text).unwrap();
    assert_eq!(back, reference);
    assert_eq!(back.m_count(), 3);
}
