//! Trajectory generation on a uniform grid.
//!
//! Four one-step maps are available:
//!
//! * `exact`: `X ← e^{AΔ}X + ξ`, `ξ ~ N(0, C(Δ))`; linear models only.
//! * `euler`: Euler–Maruyama.
//! * `strang_ode_outer`: half nonlinear kick, exact linear SDE step, half kick.
//! * `strang_sde_outer`: half deterministic linear flow, full kick with
//!   noise, half deterministic linear flow.
//!
//! The per-parameter coefficients (`e^{AΔ}`, `e^{AΔ/2}`, the Cholesky factor
//! of `C(Δ)`) are computed once in [`Integrator::new`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd, increment_covariance, matrix_exp, Matrix};
use crate::models::HamiltonianModel;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Exact,
    Euler,
    StrangOdeOuter,
    StrangSdeOuter,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Exact, Scheme::Euler, Scheme::StrangOdeOuter, Scheme::StrangSdeOuter];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Euler => "euler",
            Scheme::StrangOdeOuter => "strang_ode_outer",
            Scheme::StrangSdeOuter => "strang_sde_outer",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// Uniform time grid `t_i = iΔ`, `i = 1..n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub dt: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl SimGrid {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Config(format!("grid needs Δ > 0 and T > 0, got Δ = {dt}, T = {t_end}")));
        }
        let n = (t_end / dt).round();
        if (n * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::Config(format!("T = {t_end} is not a multiple of Δ = {dt}")));
        }
        Self::from_steps(dt, n as usize)
    }

    pub fn from_steps(dt: f64, n_steps: usize) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::Config(format!("grid needs at least 2 steps, got {n_steps}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("grid needs Δ > 0, got {dt}")));
        }
        Ok(Self { dt, t_end: dt * n_steps as f64, n_steps })
    }

    pub fn time(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dt
    }
}

/// Sampled output path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: SimGrid,
    /// `y(t_i)`, one per grid point. After an overflow the remaining entries are NaN.
    pub values: Vec<f64>,
    pub scheme: Scheme,
    pub stream: RngStream,
    pub overflowed: bool,
}

impl Trajectory {
    /// Writes `t,y` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,y")?;
        for (i, y) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.time(i), y)?;
        }
        w.flush()
    }
}

/// Full state path, mainly for inspection and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub state_dim: usize,
    /// Row-major `n_steps × state_dim`, excluding the initial state.
    pub states: Vec<f64>,
    pub overflowed: bool,
}

impl StatePath {
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.state_dim..(i + 1) * self.state_dim]
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Exact { prop: Matrix, chol: Matrix },
    Euler { noise: Vec<f64> },
    StrangOde { prop: Matrix, chol: Matrix },
    StrangSde { half: Matrix, noise: Vec<f64> },
}

/// One-step map for a fixed model, scheme and step size.
#[derive(Debug, Clone)]
pub struct Integrator<'m> {
    model: &'m HamiltonianModel,
    scheme: Scheme,
    dt: f64,
    linear: bool,
    kernel: Kernel,
}

struct Scratch {
    z: Vec<f64>,
    tmp: Vec<f64>,
    g: Vec<f64>,
}

impl<'m> Integrator<'m> {
    pub fn new(model: &'m HamiltonianModel, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let sqrt_dt = dt.sqrt();
        let kernel = match scheme {
            Scheme::Exact | Scheme::StrangOdeOuter => {
                if scheme == Scheme::Exact && !model.is_linear() {
                    return Err(Error::UnsupportedScheme {
                        scheme: scheme.to_string(),
                        reason: "exact simulation needs a linear model (G ≡ 0)".into(),
                    });
                }
                let (a, b) = model.linear_part_coefficients();
                let prop = matrix_exp(&a, dt)?;
                let chol = cholesky_psd(&increment_covariance(&a, &b, dt)?)?;
                if scheme == Scheme::Exact {
                    Kernel::Exact { prop, chol }
                } else {
                    Kernel::StrangOde { prop, chol }
                }
            }
            Scheme::Euler => Kernel::Euler { noise: model.sigma().iter().map(|s| s * sqrt_dt).collect() },
            Scheme::StrangSdeOuter => {
                let (a, _) = model.linear_part_coefficients();
                Kernel::StrangSde {
                    half: matrix_exp(&a, 0.5 * dt)?,
                    noise: model.sigma().iter().map(|s| s * sqrt_dt).collect(),
                }
            }
        };
        Ok(Self { model, scheme, dt, linear: model.is_linear(), kernel })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn scratch(&self) -> Scratch {
        let n = self.model.state_dim();
        Scratch { z: vec![0.0; n], tmp: vec![0.0; n], g: vec![0.0; n / 2] }
    }

    #[inline]
    fn kick(&self, x: &mut [f64], h: f64, g: &mut [f64]) {
        let d = self.model.dim();
        let (q, p) = x.split_at_mut(d);
        self.model.displacement().eval(q, g);
        for (pi, gi) in p.iter_mut().zip(g.iter()) {
            *pi += h * gi;
        }
    }

    #[inline]
    fn step(&self, x: &mut [f64], s: &mut Scratch, rng: &mut ChaCha8Rng) {
        let d = self.model.dim();
        let linear = self.linear;
        match &self.kernel {
            Kernel::Exact { prop, chol } | Kernel::StrangOde { prop, chol } => {
                if !linear {
                    self.kick(x, 0.5 * self.dt, &mut s.g);
                }
                for zi in s.z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                match x.len() {
                    2 => affine_fixed::<2>(prop.as_slice(), chol.as_slice(), x, &s.z),
                    6 => affine_fixed::<6>(prop.as_slice(), chol.as_slice(), x, &s.z),
                    _ => affine(prop.as_slice(), chol.as_slice(), x, &mut s.tmp, &s.z),
                }
                if !linear {
                    self.kick(x, 0.5 * self.dt, &mut s.g);
                }
            }
            Kernel::Euler { noise } => {
                self.model.drift(x, &mut s.tmp);
                for (xi, fi) in x.iter_mut().zip(&s.tmp) {
                    *xi += fi * self.dt;
                }
                for (pi, ni) in x[d..].iter_mut().zip(noise) {
                    let z: f64 = rng.sample(StandardNormal);
                    *pi += ni * z;
                }
            }
            Kernel::StrangSde { half, noise } => {
                half.mul_vec_into(x, &mut s.tmp);
                x.copy_from_slice(&s.tmp);
                if !linear {
                    self.kick(x, self.dt, &mut s.g);
                }
                for (pi, ni) in x[d..].iter_mut().zip(noise) {
                    let z: f64 = rng.sample(StandardNormal);
                    *pi += ni * z;
                }
                half.mul_vec_into(x, &mut s.tmp);
                x.copy_from_slice(&s.tmp);
            }
        }
    }

    /// Runs burn-in plus `n_steps` steps, calling `sink` with each recorded
    /// state. Returns `true` if the state stopped being finite, in which case
    /// the run ends early.
    fn drive(&self, grid: &SimGrid, stream: &RngStream, mut sink: impl FnMut(&[f64])) -> bool {
        let mut rng = stream.generator();
        let mut x = self.model.initial_state().to_vec();
        let mut s = self.scratch();
        let burn = (self.model.burn_in() / self.dt).round() as usize;
        for _ in 0..burn {
            self.step(&mut x, &mut s, &mut rng);
            if !x.iter().all(|v| v.is_finite()) {
                return true;
            }
        }
        for _ in 0..grid.n_steps {
            self.step(&mut x, &mut s, &mut rng);
            if !x.iter().all(|v| v.is_finite()) {
                return true;
            }
            sink(&x);
        }
        false
    }

    /// Output path on `grid` driven by `stream`.
    pub fn trajectory(&self, grid: &SimGrid, stream: &RngStream) -> Result<Trajectory> {
        let mut values = Vec::with_capacity(grid.n_steps);
        let overflowed = self.output_into(grid, stream, &mut values)?;
        Ok(Trajectory { grid: *grid, values, scheme: self.scheme, stream: *stream, overflowed })
    }

    /// Writes the output path into `out` (cleared first) and returns whether
    /// it overflowed; after an overflow the remaining entries are NaN.
    pub fn output_into(&self, grid: &SimGrid, stream: &RngStream, out: &mut Vec<f64>) -> Result<bool> {
        self.check_grid(grid)?;
        let output = self.model.output();
        out.clear();
        let overflowed = self.drive(grid, stream, |x| out.push(output.apply(x)));
        out.resize(grid.n_steps, f64::NAN);
        Ok(overflowed)
    }

    pub fn state_path(&self, grid: &SimGrid, stream: &RngStream) -> Result<StatePath> {
        self.check_grid(grid)?;
        let n = self.model.state_dim();
        let mut states = Vec::with_capacity(grid.n_steps * n);
        let overflowed = self.drive(grid, stream, |x| states.extend_from_slice(x));
        states.resize(grid.n_steps * n, f64::NAN);
        Ok(StatePath { state_dim: n, states, overflowed })
    }

    fn check_grid(&self, grid: &SimGrid) -> Result<()> {
        if grid.dt != self.dt {
            return Err(Error::Config(format!("integrator built for Δ = {} but grid has Δ = {}", self.dt, grid.dt)));
        }
        Ok(())
    }
}

/// `x ← P x + L z` with `L` lower triangular, all row-major `n × n`.
fn affine(p: &[f64], l: &[f64], x: &mut [f64], tmp: &mut [f64], z: &[f64]) {
    let n = x.len();
    for i in 0..n {
        let pr = &p[i * n..(i + 1) * n];
        let lr = &l[i * n..i * n + i + 1];
        tmp[i] = pr.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>()
            + lr.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    }
    x.copy_from_slice(&tmp[..n]);
}

#[inline(always)]
fn affine_fixed<const N: usize>(p: &[f64], l: &[f64], x: &mut [f64], z: &[f64]) {
    let (p, l) = (&p[..N * N], &l[..N * N]);
    let xv: [f64; N] = x.try_into().expect("state has N entries");
    let zv: [f64; N] = z.try_into().expect("noise has N entries");
    for i in 0..N {
        let mut acc = 0.0;
        for j in 0..N {
            acc += p[i * N + j] * xv[j];
        }
        for j in 0..=i {
            acc += l[i * N + j] * zv[j];
        }
        x[i] = acc;
    }
}

pub fn simulate_exact(model: &HamiltonianModel, grid: &SimGrid, rng: &RngStream) -> Result<Trajectory> {
    Integrator::new(model, Scheme::Exact, grid.dt)?.trajectory(grid, rng)
}

/// Euler–Maruyama. Overflow is reported through [`Trajectory::overflowed`].
pub fn simulate_euler(model: &HamiltonianModel, grid: &SimGrid, rng: &RngStream) -> Result<Trajectory> {
    Integrator::new(model, Scheme::Euler, grid.dt)?.trajectory(grid, rng)
}

pub fn simulate_strang_ode_outer(model: &HamiltonianModel, grid: &SimGrid, rng: &RngStream) -> Result<Trajectory> {
    Integrator::new(model, Scheme::StrangOdeOuter, grid.dt)?.trajectory(grid, rng)
}

pub fn simulate_strang_sde_outer(model: &HamiltonianModel, grid: &SimGrid, rng: &RngStream) -> Result<Trajectory> {
    Integrator::new(model, Scheme::StrangSdeOuter, grid.dt)?.trajectory(grid, rng)
}

pub fn simulate(model: &HamiltonianModel, grid: &SimGrid, scheme: Scheme, rng: &RngStream) -> Result<Trajectory> {
    match scheme {
        Scheme::Exact => simulate_exact(model, grid, rng),
        Scheme::Euler => simulate_euler(model, grid, rng),
        Scheme::StrangOdeOuter => simulate_strang_ode_outer(model, grid, rng),
        Scheme::StrangSdeOuter => simulate_strang_sde_outer(model, grid, rng),
    }
}

/// Like [`simulate`] but with the scheme given by its tag.
pub fn simulate_tagged(model: &HamiltonianModel, grid: &SimGrid, scheme: &str, rng: &RngStream) -> Result<Trajectory> {
    simulate(model, grid, scheme.parse()?, rng)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::models::{make_nonlinear_oscillator, make_weakly_damped_oscillator, NoDisplacement, Output};
    use crate::params::ParameterVector;

    fn mp2() -> HamiltonianModel {
        make_weakly_damped_oscillator(
            &ParameterVector::from_pairs([("lambda", 20.0), ("gamma", 1.0), ("sigma", 2.0)]).unwrap(),
        )
        .unwrap()
    }

    fn silent_mp2() -> HamiltonianModel {
        HamiltonianModel::new(vec![20.0], vec![1.0], vec![0.0], Arc::new(NoDisplacement), Output::Coordinate(0)).unwrap()
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn grid_validation() {
        let g = SimGrid::new(0.01, 1000.0).unwrap();
        assert_eq!(g.n_steps, 100_000);
        assert!(SimGrid::new(0.01, 0.015).is_err());
        assert!(SimGrid::new(0.0, 1.0).is_err());
        assert!(SimGrid::new(1.0, 1.0).is_err());
    }

    #[test]
    fn scheme_tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!(matches!("rk4".parse::<Scheme>(), Err(Error::Config(_))));
    }

    #[test]
    fn silent_model_stays_at_origin() {
        let grid = SimGrid::new(0.01, 10.0).unwrap();
        let t = simulate_exact(&silent_mp2(), &grid, &RngStream::new(1, 0)).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_rejects_nonlinear_model() {
        let m = make_nonlinear_oscillator(
            &ParameterVector::from_pairs([("lambda", 20.0), ("gamma", 1.0), ("sigma", 2.0)]).unwrap(),
        )
        .unwrap();
        let grid = SimGrid::new(0.01, 1.0).unwrap();
        assert!(matches!(
            simulate(&m, &grid, Scheme::Exact, &RngStream::new(1, 0)),
            Err(Error::UnsupportedScheme { .. })
        ));
        assert!(matches!(simulate_tagged(&mp2(), &grid, "leapfrog", &RngStream::new(1, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn euler_single_step() {
        let dt = 1e-3;
        let m = silent_mp2().with_initial_state(vec![1.0, 0.0]).unwrap().with_burn_in(0.0).unwrap();
        let path = Integrator::new(&m, Scheme::Euler, dt)
            .unwrap()
            .state_path(&SimGrid::from_steps(dt, 2).unwrap(), &RngStream::new(0, 0))
            .unwrap();
        assert_eq!(path.state(0), &[1.0, -400.0 * dt]);
    }

    #[test]
    fn euler_overflows_at_large_step() {
        let grid = SimGrid::new(1e-2, 1e3).unwrap();
        let t = simulate_euler(&mp2(), &grid, &RngStream::new(3, 0)).unwrap();
        assert!(t.overflowed);
        assert_eq!(t.values.len(), grid.n_steps);
        let grid = SimGrid::new(1e-3, 1e2).unwrap();
        let t = simulate_euler(&mp2(), &grid, &RngStream::new(3, 0)).unwrap();
        assert!(!t.overflowed);
        assert!(t.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn strang_ode_outer_matches_exact_for_linear_model() {
        let grid = SimGrid::new(0.01, 20.0).unwrap();
        let s = RngStream::new(11, 4);
        let a = simulate_exact(&mp2(), &grid, &s).unwrap();
        let b = simulate_strang_ode_outer(&mp2(), &grid, &s).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn strang_sde_outer_is_propagator_without_noise() {
        let dt = 0.01;
        let m = silent_mp2().with_initial_state(vec![0.05, 0.3]).unwrap().with_burn_in(0.0).unwrap();
        let grid = SimGrid::from_steps(dt, 500).unwrap();
        let s = RngStream::new(0, 0);
        let split = simulate_strang_sde_outer(&m, &grid, &s).unwrap();
        let exact = simulate_exact(&m, &grid, &s).unwrap();
        for (a, b) in split.values.iter().zip(&exact.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn exact_moments_match_invariant_law() {
        let grid = SimGrid::new(1e-2, 1e3).unwrap();
        let t = simulate_exact(&mp2(), &grid, &RngStream::new(2024, 0)).unwrap();
        let (_, v) = mean_var(&t.values);
        assert!((0.00225..=0.00275).contains(&v), "variance {v}");
    }

    #[test]
    fn deterministic_given_stream() {
        let grid = SimGrid::new(1e-2, 50.0).unwrap();
        for scheme in Scheme::ALL {
            let a = simulate(&mp2(), &grid, scheme, &RngStream::new(5, 9)).unwrap();
            let b = simulate(&mp2(), &grid, scheme, &RngStream::new(5, 9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_has_full_precision() {
        let grid = SimGrid::new(0.5, 1.0).unwrap();
        let t = Trajectory {
            grid,
            values: vec![0.1, -1.0 / 3.0],
            scheme: Scheme::Exact,
            stream: RngStream::new(0, 0),
            overflowed: false,
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,y");
        assert_eq!(lines[1], "5.0000000000000000e-1,1.0000000000000001e-1");
        let y: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(y, -1.0 / 3.0);
    }
}
