//! Rejection ABC with invariant-measure summaries.
//!
//! Every trial is keyed by its index: trial `i` draws its parameters from
//! the prior stream `i` and simulates with the trial stream `i`, so a run is
//! a pure function of the master seed regardless of how trials are scheduled.

use std::cell::RefCell;
use std::io::Write;

use indexmap::IndexMap;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, ModelId};
use crate::params::{display_name, ParameterVector};
use crate::rng::{domain, RngStream};
use crate::sim::{Integrator, Scheme, SimGrid};
use crate::stats;
use crate::summaries::{
    iae_curves, kde, smoothed_periodogram, summarize, DensityEstimate, SpectralEstimate, SummaryConfig, SummaryPair,
};

/// Independent uniform priors on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, [f64; 2]>", into = "IndexMap<String, [f64; 2]>")]
pub struct UniformPrior {
    bounds: Vec<(String, f64, f64)>,
}

impl TryFrom<IndexMap<String, [f64; 2]>> for UniformPrior {
    type Error = Error;

    fn try_from(m: IndexMap<String, [f64; 2]>) -> Result<Self> {
        UniformPrior::new(m.into_iter().map(|(k, [a, b])| (k, a, b)))
    }
}

impl From<UniformPrior> for IndexMap<String, [f64; 2]> {
    fn from(p: UniformPrior) -> Self {
        p.bounds.into_iter().map(|(k, a, b)| (display_name(&k).to_string(), [a, b])).collect()
    }
}

impl UniformPrior {
    pub fn new<I, S>(bounds: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64, f64)>,
        S: Into<String>,
    {
        let mut out: Vec<(String, f64, f64)> = Vec::new();
        for (name, lo, hi) in bounds {
            let name = crate::params::canonical_name(&name.into());
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "prior for `{}` needs finite bounds with lower < upper, got [{lo}, {hi}]",
                    display_name(&name)
                )));
            }
            if out.iter().any(|(n, _, _)| *n == name) {
                return Err(Error::Config(format!("duplicate prior for `{}`", display_name(&name))));
            }
            out.push((name, lo, hi));
        }
        if out.is_empty() {
            return Err(Error::Config("prior box has no parameters".into()));
        }
        Ok(Self { bounds: out })
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bounds.iter().map(|(n, _, _)| n.as_str())
    }

    pub fn bounds(&self) -> &[(String, f64, f64)] {
        &self.bounds
    }

    pub fn sample(&self, stream: &RngStream) -> ParameterVector {
        let mut rng = stream.generator();
        let mut theta = ParameterVector::new();
        for (name, lo, hi) in &self.bounds {
            let u: f64 = rng.gen();
            // Bounds are finite, so the value is too.
            theta.insert(name.clone(), lo + (hi - lo) * u).expect("finite draw");
        }
        theta
    }

    pub fn contains(&self, theta: &ParameterVector) -> bool {
        self.bounds.iter().all(|(n, lo, hi)| theta.get(n).is_some_and(|v| *lo <= v && v <= *hi))
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.find(name).map(|(lo, hi)| 0.5 * (lo + hi))
    }

    pub fn sd(&self, name: &str) -> Option<f64> {
        self.find(name).map(|(lo, hi)| (hi - lo) / 12f64.sqrt())
    }

    fn find(&self, name: &str) -> Option<(f64, f64)> {
        let name = crate::params::canonical_name(name);
        self.bounds.iter().find(|(n, _, _)| *n == name).map(|(_, a, b)| (*a, *b))
    }
}

/// Builds a model from the free parameters of a trial.
pub trait ModelBuilder: Sync {
    fn build(&self, theta: &ParameterVector) -> Result<HamiltonianModel>;
}

impl<F> ModelBuilder for F
where
    F: Fn(&ParameterVector) -> Result<HamiltonianModel> + Sync,
{
    fn build(&self, theta: &ParameterVector) -> Result<HamiltonianModel> {
        self(theta)
    }
}

/// A named model with fixed parameters; free parameters override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    #[serde(default)]
    pub fixed: ParameterVector,
}

impl ModelBuilder for ModelSpec {
    fn build(&self, theta: &ParameterVector) -> Result<HamiltonianModel> {
        self.id.build(&self.fixed.merged(theta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Simulated { seed: u64, theta: ParameterVector, scheme: Scheme, dt: f64, t_end: f64 },
    Ingested { files: Vec<String>, sample_rate: f64 },
}

/// Precomputed summaries of the observed paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub summaries: Vec<SummaryPair>,
    pub provenance: Provenance,
}

impl ReferenceSet {
    pub fn new(summaries: Vec<SummaryPair>, provenance: Provenance) -> Result<Self> {
        if summaries.is_empty() {
            return Err(Error::Config("reference set needs at least one path".into()));
        }
        Ok(Self { summaries, provenance })
    }

    pub fn m_count(&self) -> usize {
        self.summaries.len()
    }

    /// Stream used for reference path `k`.
    pub fn stream(seed: u64, k: usize) -> RngStream {
        RngStream::new(seed, k as u64).derive(domain::REFERENCE)
    }

    /// Simulates and summarizes `m` paths at `theta`.
    pub fn simulate(
        model: &HamiltonianModel,
        grid: &SimGrid,
        scheme: Scheme,
        m: usize,
        seed: u64,
        cfg: &SummaryConfig,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("number of reference paths must be at least 1".into()));
        }
        let integrator = Integrator::new(model, scheme, grid.dt)?;
        let summaries = (0..m)
            .map(|k| summarize(&integrator.trajectory(grid, &Self::stream(seed, k))?, cfg))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            summaries,
            Provenance::Simulated { seed, theta: model.params().clone(), scheme, dt: grid.dt, t_end: grid.t_end },
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    #[default]
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub weight: f64,
    #[serde(default)]
    pub aggregator: Aggregator,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self { weight: 0.0, aggregator: Aggregator::Median }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight >= 0.0) || !self.weight.is_finite() {
            return Err(Error::Config(format!("distance weight must be finite and ≥ 0, got {}", self.weight)));
        }
        Ok(())
    }
}

pub fn aggregate(values: &[f64], aggregator: Aggregator) -> f64 {
    match aggregator {
        Aggregator::Median => stats::median(values),
        Aggregator::Mean => stats::mean(values),
    }
}

/// Aggregated weighted IAE of `cand` against each reference summary.
pub fn distance(reference: &ReferenceSet, cand: &SummaryPair, cfg: &DistanceConfig) -> Result<f64> {
    distance_parts(reference, &cand.spec, Some(&cand.dens), cfg)
}

/// As [`distance`]; the density may be omitted when the weight is zero.
pub fn distance_parts(
    reference: &ReferenceSet,
    spec: &SpectralEstimate,
    dens: Option<&DensityEstimate>,
    cfg: &DistanceConfig,
) -> Result<f64> {
    let per_ref = reference
        .summaries
        .iter()
        .map(|r| {
            let s = iae_curves(&r.spec, spec)?;
            if cfg.weight == 0.0 {
                return Ok(s);
            }
            let dens = dens.ok_or_else(|| Error::Summary("density estimate required for w > 0".into()))?;
            Ok(s + cfg.weight * iae_curves(&r.dens, dens)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(aggregate(&per_ref, cfg.aggregator))
}

/// Distance of a raw candidate series. The density estimate is only formed
/// when the weight needs it; constant series are rejected either way.
pub fn series_distance(
    reference: &ReferenceSet,
    y: &[f64],
    dt: f64,
    summary: &SummaryConfig,
    cfg: &DistanceConfig,
) -> Result<f64> {
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Summary("zero-variance series".into()));
    }
    let spec = smoothed_periodogram(y, dt, &summary.spectral)?;
    let dens = if cfg.weight == 0.0 { None } else { Some(kde(y, &summary.density)?) };
    distance_parts(reference, &spec, dens.as_ref(), cfg)
}

/// Settings shared by the pilot and the main run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcSettings {
    pub grid: SimGrid,
    pub scheme: Scheme,
    pub n_total: usize,
    pub percentile: f64,
    pub distance: DistanceConfig,
    pub summary: SummaryConfig,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
}

impl AbcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::Config("number of trials must be at least 1".into()));
        }
        if !(self.percentile > 0.0 && self.percentile <= 100.0) {
            return Err(Error::Config(format!("percentile must lie in (0, 100], got {}", self.percentile)));
        }
        self.distance.validate()
    }

    pub fn prior_stream(&self, i: usize) -> RngStream {
        RngStream::new(self.seed, i as u64).derive(domain::PRIOR)
    }

    pub fn trial_stream(&self, i: usize) -> RngStream {
        RngStream::new(self.seed, i as u64).derive(domain::TRIAL)
    }
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Run(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptDraw {
    pub index: usize,
    pub theta: ParameterVector,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcRun {
    pub parameter_names: Vec<String>,
    /// Kept draws ordered by `(distance, index)`.
    pub kept: Vec<KeptDraw>,
    /// Distance of every trial, by trial index; `+∞` for failed trials.
    pub distances: Vec<f64>,
    pub epsilon: f64,
    pub percentile: f64,
    pub n_total: usize,
    pub n_failed: usize,
    pub seed: u64,
    pub settings: AbcSettings,
}

impl AbcRun {
    /// Kept draws of one parameter.
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.kept.iter().map(|d| d.theta.get(name).unwrap_or(f64::NAN)).collect()
    }

    /// One row per kept draw: parameter values then the distance.
    pub fn write_accepted_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.parameter_names.iter().map(|n| display_name(n)).chain(["distance"]).collect();
        writeln!(w, "{}", header.join(","))?;
        for d in &self.kept {
            let mut row: Vec<String> =
                self.parameter_names.iter().map(|n| format!("{:.16e}", d.theta.get(n).unwrap_or(f64::NAN))).collect();
            row.push(format!("{:.16e}", d.distance));
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    }
}

/// Number of draws kept at `percentile` of `n`: the nearest-rank order.
pub fn kept_count(n: usize, percentile: f64) -> usize {
    ((n as f64 * percentile / 100.0 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Trial indices ordered by `(distance, index)`, the realized threshold, and
/// how many of the leading indices are kept. Infinite distances are never kept.
pub fn threshold(distances: &[f64], percentile: f64) -> Result<(Vec<usize>, f64, usize)> {
    if distances.iter().all(|d| !d.is_finite()) {
        return Err(Error::Run("no candidate produced valid summaries".into()));
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    let k = kept_count(distances.len(), percentile);
    let eps = distances[order[k - 1]];
    let kept = order[..k].iter().take_while(|&&i| distances[i].is_finite()).count();
    Ok((order, eps, kept))
}

fn trial_distance<B: ModelBuilder + ?Sized>(
    builder: &B,
    theta: &ParameterVector,
    stream: &RngStream,
    reference: &ReferenceSet,
    settings: &AbcSettings,
) -> f64 {
    thread_local! {
        static PATH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
    }
    let run = || -> Result<f64> {
        let model = builder.build(theta)?;
        let integ = Integrator::new(&model, settings.scheme, settings.grid.dt)?;
        PATH.with(|buf| {
            let buf = &mut *buf.borrow_mut();
            if integ.output_into(&settings.grid, stream, buf)? {
                return Err(Error::Summary("trajectory overflowed".into()));
            }
            series_distance(reference, buf, settings.grid.dt, &settings.summary, &settings.distance)
        })
    };
    match run() {
        Ok(d) if d.is_finite() => d,
        _ => f64::INFINITY,
    }
}

/// Scores `n_total` prior draws against `reference` and keeps the closest
/// `percentile` percent.
pub fn run_abc<B: ModelBuilder + ?Sized>(
    builder: &B,
    prior: &UniformPrior,
    reference: &ReferenceSet,
    settings: &AbcSettings,
) -> Result<AbcRun> {
    settings.validate()?;
    let distances: Vec<f64> = pool(settings.workers)?.install(|| {
        (0..settings.n_total)
            .into_par_iter()
            .map(|i| {
                let theta = prior.sample(&settings.prior_stream(i));
                trial_distance(builder, &theta, &settings.trial_stream(i), reference, settings)
            })
            .collect()
    });
    let (order, epsilon, k) = threshold(&distances, settings.percentile)?;
    let kept = order[..k]
        .iter()
        .map(|&i| KeptDraw { index: i, theta: prior.sample(&settings.prior_stream(i)), distance: distances[i] })
        .collect();
    Ok(AbcRun {
        parameter_names: prior.names().map(str::to_string).collect(),
        kept,
        n_failed: distances.iter().filter(|d| !d.is_finite()).count(),
        distances,
        epsilon,
        percentile: settings.percentile,
        n_total: settings.n_total,
        seed: settings.seed,
        settings: settings.clone(),
    })
}

/// Ratio of spectral to density IAE between two summaries of the same
/// parameter; `None` when it is undefined.
pub fn pilot_ratio(a: &SummaryPair, b: &SummaryPair) -> Option<f64> {
    let s = iae_curves(&a.spec, &b.spec).ok()?;
    let f = iae_curves(&a.dens, &b.dens).ok()?;
    let r = s / f;
    (f > 0.0 && r.is_finite()).then_some(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotReport {
    pub weight: f64,
    pub ratios: Vec<f64>,
    pub attempts: usize,
}

/// Streams for pilot attempt `j`: prior draw and the two paths.
pub fn pilot_streams(seed: u64, j: usize) -> [RngStream; 3] {
    let base = RngStream::new(seed, j as u64).derive(domain::PILOT);
    [base.derive(domain::PRIOR), base.derive(1), base.derive(2)]
}

/// Median over `l` attempts of the spectral/density IAE ratio between two
/// independent paths at the same prior draw. Undefined ratios are redrawn.
pub fn pilot_weight<B: ModelBuilder + ?Sized>(
    builder: &B,
    prior: &UniformPrior,
    l: usize,
    settings: &AbcSettings,
) -> Result<PilotReport> {
    if l == 0 {
        return Err(Error::Config("pilot size must be at least 1".into()));
    }
    let max_attempts = l.saturating_mul(100).max(1000);
    let attempt = |j: usize| -> Option<f64> {
        let [sp, sa, sb] = pilot_streams(settings.seed, j);
        let theta = prior.sample(&sp);
        let model = builder.build(&theta).ok()?;
        let integ = Integrator::new(&model, settings.scheme, settings.grid.dt).ok()?;
        let a = summarize(&integ.trajectory(&settings.grid, &sa).ok()?, &settings.summary).ok()?;
        let b = summarize(&integ.trajectory(&settings.grid, &sb).ok()?, &settings.summary).ok()?;
        pilot_ratio(&a, &b)
    };
    let pool = pool(settings.workers)?;
    let mut ratios = Vec::with_capacity(l);
    let mut next = 0;
    while ratios.len() < l {
        if next >= max_attempts {
            return Err(Error::Run(format!(
                "pilot found only {} valid ratios in {max_attempts} attempts",
                ratios.len()
            )));
        }
        let batch = (l - ratios.len()).max(pool.current_num_threads()).min(max_attempts - next);
        let got: Vec<Option<f64>> = pool.install(|| (next..next + batch).into_par_iter().map(attempt).collect());
        next += batch;
        ratios.extend(got.into_iter().flatten().take(l - ratios.len()));
    }
    Ok(PilotReport { weight: stats::median(&ratios), ratios, attempts: next })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorStats {
    pub parameters: Vec<ParameterSummary>,
    /// Pairwise correlations; entries involving a constant parameter are 0.
    pub correlation: Vec<Vec<f64>>,
    /// Some parameter had zero spread, so some correlations are undefined.
    pub degenerate: bool,
    pub n_kept: usize,
}

impl PosteriorStats {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        let name = crate::params::canonical_name(name);
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn corr(&self, a: &str, b: &str) -> Option<f64> {
        let (a, b) = (crate::params::canonical_name(a), crate::params::canonical_name(b));
        let i = self.parameters.iter().position(|p| p.name == a)?;
        let j = self.parameters.iter().position(|p| p.name == b)?;
        Some(self.correlation[i][j])
    }
}

pub fn posterior_stats(run: &AbcRun) -> Result<PosteriorStats> {
    let cols: Vec<Vec<f64>> = run.parameter_names.iter().map(|n| run.column(n)).collect();
    draw_stats(&run.parameter_names, &cols)
}

/// Posterior summaries of kept draws given column-wise, one column per name.
pub fn draw_stats(names: &[String], cols: &[Vec<f64>]) -> Result<PosteriorStats> {
    if names.len() != cols.len() {
        return Err(Error::Dimension(format!("{} names for {} columns", names.len(), cols.len())));
    }
    let k = cols.first().map_or(0, Vec::len);
    if cols.iter().any(|c| c.len() != k) {
        return Err(Error::Dimension("columns of unequal length".into()));
    }
    if k < 2 {
        return Err(Error::Stats(format!("need at least 2 kept draws, got {k}")));
    }
    let n = k as f64;
    let means: Vec<f64> = cols.iter().map(|c| stats::mean(c)).collect();
    let sds: Vec<f64> = cols.iter().map(|c| stats::sd(c)).collect();
    let parameters = names
        .iter()
        .zip(cols)
        .enumerate()
        .map(|(i, (name, c))| {
            let sorted = stats::sorted_copy(c);
            ParameterSummary {
                name: crate::params::canonical_name(name),
                mean: means[i],
                sd: sds[i],
                q025: stats::quantile_sorted(&sorted, 0.025),
                q50: stats::quantile_sorted(&sorted, 0.5),
                q975: stats::quantile_sorted(&sorted, 0.975),
            }
        })
        .collect();
    let p = cols.len();
    let mut degenerate = false;
    let mut correlation = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            if sds[i] > 0.0 && sds[j] > 0.0 {
                let cov = cols[i].iter().zip(&cols[j]).map(|(a, b)| (a - means[i]) * (b - means[j])).sum::<f64>()
                    / (n - 1.0);
                correlation[i][j] = if i == j { 1.0 } else { (cov / (sds[i] * sds[j])).clamp(-1.0, 1.0) };
            } else {
                degenerate = true;
            }
        }
    }
    Ok(PosteriorStats { parameters, correlation, degenerate, n_kept: k })
}
