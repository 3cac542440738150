//! Hamiltonian-type SDE models.
//!
//! Every model has the form
//!
//! ```text
//! dQ = P dt
//! dP = (-Λ²Q - 2ΓP + G(Q)) dt + Σ dW
//! ```
//!
//! with diagonal `Λ`, `Γ`, `Σ` and a displacement `G` acting on `Q` only. The
//! observed output is a linear functional of the state. The four shipped
//! models are the weakly damped, critically damped and sine-perturbed
//! stochastic oscillators and the stochastic Jansen–Rit neural mass model.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::params::ParameterVector;

/// Nonlinear displacement `G: R^d → R^d` of a Hamiltonian-type SDE.
pub trait Displacement: Send + Sync + fmt::Debug {
    fn eval(&self, q: &[f64], out: &mut [f64]);

    /// True when `G ≡ 0`, which makes the model linear.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoDisplacement;

impl Displacement for NoDisplacement {
    fn eval(&self, _q: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `G(q) = -amplitude · sin(q)`, componentwise.
#[derive(Debug, Clone, Copy)]
pub struct SineDisplacement {
    pub amplitude: f64,
}

impl Displacement for SineDisplacement {
    fn eval(&self, q: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(q) {
            *o = -self.amplitude * x.sin();
        }
    }
}

/// Sigmoid firing-rate nonlinearity of the Jansen–Rit populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub v0: f64,
    pub vmax: f64,
    pub r: f64,
}

impl Sigmoid {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.vmax / (1.0 + (self.r * (self.v0 - x)).exp())
    }

    /// Global Lipschitz constant `r·vmax/4`.
    pub fn lipschitz(&self) -> f64 {
        self.r * self.vmax / 4.0
    }
}

/// Displacement of the Jansen–Rit model; connectivities are derived from a
/// single constant `C` as `(C, 0.8C, 0.25C, 0.25C)`.
#[derive(Debug, Clone, Copy)]
pub struct JansenRitDisplacement {
    pub gain_a: f64,
    pub gain_b: f64,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub c: f64,
    pub sigmoid: Sigmoid,
}

impl JansenRitDisplacement {
    pub fn connectivities(&self) -> [f64; 4] {
        [self.c, 0.8 * self.c, 0.25 * self.c, 0.25 * self.c]
    }
}

impl Displacement for JansenRitDisplacement {
    fn eval(&self, q: &[f64], out: &mut [f64]) {
        let [c1, c2, c3, c4] = self.connectivities();
        let s = &self.sigmoid;
        out[0] = self.gain_a * self.a * s.eval(q[1] - q[2]);
        out[1] = self.gain_a * self.a * (self.mu + c2 * s.eval(c1 * q[0]));
        out[2] = self.gain_b * self.b * c4 * s.eval(c3 * q[0]);
    }
}

/// Linear observation `Y = g(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Output {
    Coordinate(usize),
    /// `X_i - X_j`.
    Difference(usize, usize),
}

impl Output {
    #[inline]
    pub fn apply(&self, x: &[f64]) -> f64 {
        match *self {
            Output::Coordinate(i) => x[i],
            Output::Difference(i, j) => x[i] - x[j],
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            Output::Coordinate(i) => i,
            Output::Difference(i, j) => i.max(j),
        }
    }
}

/// Identifiers of the shipped models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    /// Critically damped oscillator, output `P`.
    Mp1,
    /// Weakly damped oscillator, output `Q`.
    Mp2,
    /// Weakly damped oscillator with `G(Q) = -10³ sin Q`, output `Q`.
    Mp4,
    /// Stochastic Jansen–Rit neural mass model, output `X₂ - X₃`.
    Jrnmm,
}

impl ModelId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Mp1 => "mp1",
            ModelId::Mp2 => "mp2",
            ModelId::Mp4 => "mp4",
            ModelId::Jrnmm => "jrnmm",
        }
    }

    pub fn build(&self, theta: &ParameterVector) -> Result<HamiltonianModel> {
        match self {
            ModelId::Mp1 => make_critically_damped_oscillator(theta),
            ModelId::Mp2 => make_weakly_damped_oscillator(theta),
            ModelId::Mp4 => make_nonlinear_oscillator(theta),
            ModelId::Jrnmm => make_jansen_rit(theta),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mp1" => Ok(ModelId::Mp1),
            "mp2" => Ok(ModelId::Mp2),
            "mp4" => Ok(ModelId::Mp4),
            "jrnmm" => Ok(ModelId::Jrnmm),
            other => Err(Error::Config(format!("unknown model `{other}` (expected mp1, mp2, mp4 or jrnmm)"))),
        }
    }
}

/// Closed-form autocovariance families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Autocovariance {
    /// `(σ²/4λ²) e^{-γτ} [cos(κτ)/γ + sin(κτ)/κ]`, `κ = √(λ²-γ²)`.
    WeaklyDamped { lambda: f64, gamma: f64, sigma: f64 },
    /// `(σ²/4) e^{-γτ} [1/γ - τ]`.
    CriticallyDamped { gamma: f64, sigma: f64 },
}

/// Stationary mean, variance and autocovariance of the output process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryAnalytics {
    pub invariant_mean: f64,
    pub invariant_variance: f64,
    pub acf: Autocovariance,
}

impl StationaryAnalytics {
    fn from_acf(acf: Autocovariance) -> Self {
        let mut out = Self { invariant_mean: 0.0, invariant_variance: 0.0, acf };
        out.invariant_variance = out.autocovariance(0.0);
        out
    }

    pub fn autocovariance(&self, lag: f64) -> f64 {
        let tau = lag.abs();
        match self.acf {
            Autocovariance::WeaklyDamped { lambda, gamma, sigma } => {
                let kappa = (lambda * lambda - gamma * gamma).sqrt();
                sigma * sigma / (4.0 * lambda * lambda)
                    * (-gamma * tau).exp()
                    * ((kappa * tau).cos() / gamma + (kappa * tau).sin() / kappa)
            }
            Autocovariance::CriticallyDamped { gamma, sigma } => {
                sigma * sigma / 4.0 * (-gamma * tau).exp() * (1.0 / gamma - tau)
            }
        }
    }

    /// Gaussian invariant density of the output.
    pub fn density(&self, y: f64) -> f64 {
        let v = self.invariant_variance;
        let z = y - self.invariant_mean;
        (-0.5 * z * z / v).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
    }
}

/// A Hamiltonian-type SDE with its observation map.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    id: Option<ModelId>,
    lambda: Vec<f64>,
    gamma: Vec<f64>,
    sigma: Vec<f64>,
    displacement: Arc<dyn Displacement>,
    output: Output,
    params: ParameterVector,
    analytics: Option<StationaryAnalytics>,
    initial_state: Vec<f64>,
    burn_in: f64,
}

impl HamiltonianModel {
    /// Builds a model from the diagonals of `Λ`, `Γ`, `Σ`.
    ///
    /// `Λ` and `Γ` must be strictly positive. `Σ` may contain zeros so that
    /// deterministic limits can be simulated; the named constructors require
    /// strictly positive noise.
    pub fn new(
        lambda: Vec<f64>,
        gamma: Vec<f64>,
        sigma: Vec<f64>,
        displacement: Arc<dyn Displacement>,
        output: Output,
    ) -> Result<Self> {
        let d = lambda.len();
        if d == 0 || gamma.len() != d || sigma.len() != d {
            return Err(Error::Dimension(format!(
                "Λ, Γ, Σ diagonals must share a nonzero length (got {}, {}, {})",
                lambda.len(),
                gamma.len(),
                sigma.len()
            )));
        }
        for (name, diag) in [("Λ", &lambda), ("Γ", &gamma)] {
            if diag.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::Model(format!("{name} must have strictly positive diagonal, got {diag:?}")));
            }
        }
        if sigma.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Model(format!("Σ must be non-negative, got {sigma:?}")));
        }
        if output.max_index() >= 2 * d {
            return Err(Error::Dimension(format!("output {output:?} outside a {}-dimensional state", 2 * d)));
        }
        let gamma_min = gamma.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            id: None,
            burn_in: 10.0 / gamma_min,
            initial_state: vec![0.0; 2 * d],
            lambda,
            gamma,
            sigma,
            displacement,
            output,
            params: ParameterVector::new(),
            analytics: None,
        })
    }

    pub fn with_initial_state(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.state_dim() || x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("initial state must be {} finite values", self.state_dim())));
        }
        self.initial_state = x0;
        Ok(self)
    }

    /// Overrides the discarded warm-up interval (model time units).
    pub fn with_burn_in(mut self, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("burn-in must be a non-negative time, got {t}")));
        }
        self.burn_in = t;
        Ok(self)
    }

    fn tagged(mut self, id: ModelId, params: ParameterVector, analytics: Option<StationaryAnalytics>) -> Self {
        self.id = Some(id);
        self.params = params;
        self.analytics = analytics;
        self
    }

    pub fn id(&self) -> Option<ModelId> {
        self.id
    }

    /// Half the state dimension.
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn state_dim(&self) -> usize {
        2 * self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn displacement(&self) -> &dyn Displacement {
        self.displacement.as_ref()
    }

    pub fn output(&self) -> Output {
        self.output
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn analytics(&self) -> Option<&StationaryAnalytics> {
        self.analytics.as_ref()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn burn_in(&self) -> f64 {
        self.burn_in
    }

    pub fn is_linear(&self) -> bool {
        self.displacement.is_zero()
    }

    /// Full drift `f(x)`.
    pub fn drift(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let (q, p) = x.split_at(d);
        let (fq, fp) = out.split_at_mut(d);
        fq.copy_from_slice(p);
        self.displacement.eval(q, fp);
        for i in 0..d {
            fp[i] += -self.lambda[i] * self.lambda[i] * q[i] - 2.0 * self.gamma[i] * p[i];
        }
    }

    /// Drift `A = [[0, I], [-Λ², -2Γ]]` and noise `B = [[0], [Σ]]` of the linear part.
    pub fn linear_part_coefficients(&self) -> (Matrix, Matrix) {
        let d = self.dim();
        let mut a = Matrix::zeros(2 * d, 2 * d);
        let mut b = Matrix::zeros(2 * d, d);
        for i in 0..d {
            a.set(i, d + i, 1.0);
            a.set(d + i, i, -self.lambda[i] * self.lambda[i]);
            a.set(d + i, d + i, -2.0 * self.gamma[i]);
            b.set(d + i, i, self.sigma[i]);
        }
        (a, b)
    }
}

fn positive(theta: &ParameterVector, name: &str) -> Result<f64> {
    let v = theta.require(name)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Model(format!("parameter `{}` must be > 0, got {v}", crate::params::display_name(name))))
    }
}

fn oscillator_params(theta: &ParameterVector) -> Result<(f64, f64, f64)> {
    let lambda = positive(theta, "lambda")?;
    let gamma = positive(theta, "gamma")?;
    let sigma = positive(theta, "sigma")?;
    if lambda * lambda - gamma * gamma <= 0.0 {
        return Err(Error::Model(format!(
            "weak damping requires λ² - γ² > 0, got λ = {lambda}, γ = {gamma}"
        )));
    }
    Ok((lambda, gamma, sigma))
}

/// Weakly damped stochastic oscillator observed through `Q`.
pub fn make_weakly_damped_oscillator(theta: &ParameterVector) -> Result<HamiltonianModel> {
    let (lambda, gamma, sigma) = oscillator_params(theta)?;
    let params = ParameterVector::from_pairs([("lambda", lambda), ("gamma", gamma), ("sigma", sigma)])?;
    let analytics = StationaryAnalytics::from_acf(Autocovariance::WeaklyDamped { lambda, gamma, sigma });
    Ok(HamiltonianModel::new(
        vec![lambda],
        vec![gamma],
        vec![sigma],
        Arc::new(NoDisplacement),
        Output::Coordinate(0),
    )?
    .tagged(ModelId::Mp2, params, Some(analytics)))
}

/// Critically damped oscillator (`λ = γ`) observed through `P`.
pub fn make_critically_damped_oscillator(theta: &ParameterVector) -> Result<HamiltonianModel> {
    let gamma = positive(theta, "gamma")?;
    let sigma = positive(theta, "sigma")?;
    let params = ParameterVector::from_pairs([("gamma", gamma), ("sigma", sigma)])?;
    let analytics = StationaryAnalytics::from_acf(Autocovariance::CriticallyDamped { gamma, sigma });
    Ok(HamiltonianModel::new(
        vec![gamma],
        vec![gamma],
        vec![sigma],
        Arc::new(NoDisplacement),
        Output::Coordinate(1),
    )?
    .tagged(ModelId::Mp1, params, Some(analytics)))
}

/// Weakly damped oscillator with `G(Q) = -10³ sin Q`, observed through `Q`.
pub fn make_nonlinear_oscillator(theta: &ParameterVector) -> Result<HamiltonianModel> {
    let (lambda, gamma, sigma) = oscillator_params(theta)?;
    let params = ParameterVector::from_pairs([("lambda", lambda), ("gamma", gamma), ("sigma", sigma)])?;
    Ok(HamiltonianModel::new(
        vec![lambda],
        vec![gamma],
        vec![sigma],
        Arc::new(SineDisplacement { amplitude: 1e3 }),
        Output::Coordinate(0),
    )?
    .tagged(ModelId::Mp4, params, None))
}

/// Literature constants of the Jansen–Rit model that are not inferred by default.
pub const JANSEN_RIT_DEFAULTS: [(&str, f64); 9] = [
    ("gain_A", 3.25),
    ("gain_B", 22.0),
    ("a", 100.0),
    ("b", 50.0),
    ("v0", 6.0),
    ("vmax", 5.0),
    ("r", 0.56),
    ("sigma4", 0.01),
    ("sigma6", 1.0),
];

/// Stochastic Jansen–Rit neural mass model observed through `X₂ - X₃`.
///
/// `sigma`, `mu` and `C` are required; the constants in
/// [`JANSEN_RIT_DEFAULTS`] are used unless `theta` overrides them.
pub fn make_jansen_rit(theta: &ParameterVector) -> Result<HamiltonianModel> {
    let mut full = ParameterVector::new();
    for (k, v) in JANSEN_RIT_DEFAULTS {
        full.insert(k, v)?;
    }
    let full = full.merged(theta);
    let get = |name: &str| positive(&full, name);
    let sigma = get("sigma")?;
    let mu = get("mu")?;
    let c = get("C")?;
    let gain_a = get("gain_A")?;
    let gain_b = get("gain_B")?;
    let a = get("a")?;
    let b = get("b")?;
    let v0 = get("v0")?;
    let vmax = get("vmax")?;
    let r = get("r")?;
    let sigma4 = get("sigma4")?;
    let sigma6 = get("sigma6")?;

    let displacement = JansenRitDisplacement { gain_a, gain_b, a, b, mu, c, sigmoid: Sigmoid { v0, vmax, r } };
    let params = ParameterVector::from_pairs([
        ("sigma", sigma),
        ("mu", mu),
        ("C", c),
        ("gain_A", gain_a),
        ("gain_B", gain_b),
        ("a", a),
        ("b", b),
        ("v0", v0),
        ("vmax", vmax),
        ("r", r),
        ("sigma4", sigma4),
        ("sigma6", sigma6),
    ])?;
    let gamma = vec![a, a, b];
    Ok(HamiltonianModel::new(
        gamma.clone(),
        gamma,
        vec![sigma4, sigma, sigma6],
        Arc::new(displacement),
        Output::Difference(1, 2),
    )?
    .tagged(ModelId::Jrnmm, params, None))
}
