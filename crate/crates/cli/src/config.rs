//! Run configuration: a TOML document (or the `config` member of a run
//! manifest) with environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use specabc::abc::Aggregator;
use specabc::ingest::Rescale;
use specabc::{ModelId, ParameterVector, Scheme, SimGrid, SummaryConfig, UniformPrior};

use crate::error::{CliError, CliResult};

/// Prefix of environment overrides; `__` separates nested keys, e.g.
/// `SPECABC_ABC__N_TOTAL=1000`.
pub const ENV_PREFIX: &str = "SPECABC_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub simulation: SimulationSection,
    pub prior: UniformPrior,
    pub reference: ReferenceSource,
    #[serde(default)]
    pub abc: AbcSection,
    #[serde(default)]
    pub summary: SummaryConfig,
    #[serde(default)]
    pub seed: u64,
    /// 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub id: ModelId,
    /// Values for parameters not in the prior; missing ones take model defaults.
    #[serde(default)]
    pub fixed: ParameterVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Unrecorded transient; the model default when absent.
    #[serde(default)]
    pub burn_in: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSource {
    /// `m` paths simulated at `theta`; scheme and grid default to the
    /// simulation section, the seed to the master seed.
    Simulate {
        m: usize,
        theta: ParameterVector,
        #[serde(default)]
        scheme: Option<Scheme>,
        #[serde(default)]
        dt: Option<f64>,
        #[serde(default)]
        t_end: Option<f64>,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Observed series, one value per line (the last CSV column is used).
    Files {
        files: Vec<PathBuf>,
        sample_rate: f64,
        #[serde(default)]
        rescale: Rescale,
        /// Split every file into this many equal segments.
        #[serde(default)]
        cut: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Zero,
    Fixed(f64),
    Pilot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbcSection {
    pub n_total: usize,
    pub percentile: f64,
    pub weight: WeightMode,
    /// Number of ratios in the pilot study.
    pub pilot_size: usize,
    pub aggregator: Aggregator,
}

impl Default for AbcSection {
    fn default() -> Self {
        Self { n_total: 10_000, percentile: 1.0, weight: WeightMode::Zero, pilot_size: 10_000, aggregator: Aggregator::Median }
    }
}

impl RunConfig {
    /// Loads `path`, applies environment overrides from `env`, and resolves
    /// relative data paths against the directory of `path`.
    pub fn load<I>(path: &Path, env: I) -> CliResult<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut doc = if path.extension().is_some_and(|e| e == "json") {
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            // A run manifest carries the full configuration under `config`.
            match v {
                Value::Object(mut m) if m.contains_key("config") => m.remove("config").unwrap_or_default(),
                other => other,
            }
        } else {
            let t: toml::Table =
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))?
        };
        apply_env(&mut doc, env)?;
        let mut cfg: RunConfig =
            serde_json::from_value(doc).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let ReferenceSource::Files { files, .. } = &mut cfg.reference {
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        if !(self.abc.percentile > 0.0 && self.abc.percentile <= 100.0) {
            return Err(CliError::Config(format!("percentile must lie in (0, 100], got {}", self.abc.percentile)));
        }
        if self.abc.n_total == 0 {
            return Err(CliError::Config("abc.n_total must be at least 1".into()));
        }
        if let WeightMode::Fixed(w) = self.abc.weight {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(CliError::Config(format!("weight must be finite and non-negative, got {w}")));
            }
        }
        if self.abc.weight == WeightMode::Pilot && self.abc.pilot_size == 0 {
            return Err(CliError::Config("abc.pilot_size must be at least 1".into()));
        }
        match &self.reference {
            ReferenceSource::Simulate { m, .. } => {
                if *m == 0 {
                    return Err(CliError::Config("reference.m must be at least 1".into()));
                }
                self.reference_grid()?;
            }
            ReferenceSource::Files { files, sample_rate, cut, .. } => {
                if files.is_empty() {
                    return Err(CliError::Config("reference.files is empty".into()));
                }
                if let Some(f) = files.iter().find(|f| !f.is_file()) {
                    return Err(CliError::Config(format!("reference file {} does not exist", f.display())));
                }
                if !(*sample_rate > 0.0 && sample_rate.is_finite()) {
                    return Err(CliError::Config(format!("sample_rate must be positive, got {sample_rate}")));
                }
                if *cut == Some(0) {
                    return Err(CliError::Config("reference.cut must be at least 1".into()));
                }
            }
        }
        // Trials must build from the fixed values and a prior draw, and every
        // prior name must be a parameter of the model.
        let probe = self.model.fixed.merged(&self.prior_means());
        let model = self.model.id.build(&probe).map_err(|e| CliError::Config(e.to_string()))?;
        for name in self.prior.names() {
            if model.params().get(name).is_none() {
                return Err(CliError::Config(format!(
                    "`{}` is not a parameter of model {}",
                    specabc::params::display_name(name),
                    self.model.id
                )));
            }
        }
        Ok(())
    }

    fn prior_means(&self) -> ParameterVector {
        let mut p = ParameterVector::new();
        for (n, lo, hi) in self.prior.bounds() {
            // Bounds are finite.
            p.insert(n.clone(), 0.5 * (lo + hi)).expect("finite midpoint");
        }
        p
    }

    pub fn grid(&self) -> CliResult<SimGrid> {
        SimGrid::new(self.simulation.dt, self.simulation.t_end).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn reference_grid(&self) -> CliResult<SimGrid> {
        let (dt, t_end) = match &self.reference {
            ReferenceSource::Simulate { dt, t_end, .. } => {
                (dt.unwrap_or(self.simulation.dt), t_end.unwrap_or(self.simulation.t_end))
            }
            ReferenceSource::Files { .. } => (self.simulation.dt, self.simulation.t_end),
        };
        SimGrid::new(dt, t_end).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Sets `SPECABC_A__B=v` as `doc.a.b = v`. Keys match existing ones case
/// insensitively; values are parsed as TOML scalars or arrays, falling back
/// to a plain string.
pub fn apply_env<I>(doc: &mut Value, env: I) -> CliResult<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<&str> = key[ENV_PREFIX.len()..].split("__").collect();
        if path.iter().any(|s| s.is_empty()) {
            return Err(CliError::Config(format!("malformed override {key}")));
        }
        let value = parse_value(&raw);
        let mut node = &mut *doc;
        for (depth, seg) in path.iter().enumerate() {
            let map = match node {
                Value::Object(m) => m,
                _ => return Err(CliError::Config(format!("override {key} descends into a non-table value"))),
            };
            let name = map.keys().find(|k| k.eq_ignore_ascii_case(seg)).cloned().unwrap_or_else(|| seg.to_ascii_lowercase());
            if depth + 1 == path.len() {
                map.insert(name, value.clone());
                break;
            }
            node = map.entry(name).or_insert_with(|| Value::Object(Default::default()));
        }
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}
