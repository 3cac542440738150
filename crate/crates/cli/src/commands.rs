use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use specabc::abc::{draw_stats, ParameterSummary};
use specabc::ingest::{read_series, IngestedSeries, Rescale};
use specabc::params::display_name;
use specabc::summaries::{kde, summarize, summarize_series, KdeConfig, SummaryConfig};
use specabc::{
    pilot_weight, posterior_stats, run_abc, AbcSettings, DistanceConfig, HamiltonianModel, Integrator,
    ParameterVector, PilotReport, PosteriorStats, Provenance, ReferenceSet, RngStream, Scheme, SimGrid,
    SummaryPair,
};

use crate::config::{ReferenceSource, RunConfig, WeightMode};
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const ACCEPTED: &str = "accepted.csv";
pub const HISTOGRAM_BINS: usize = 30;

/// Named curve in an `x,value,series` file.
pub struct Series<'a> {
    pub name: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
        writeln!(w)
    })
}

pub fn write_series_csv(path: &Path, series: &[Series<'_>]) -> CliResult<()> {
    write_with(path, |w| {
        writeln!(w, "x,value,series")?;
        for s in series {
            for (x, y) in s.x.iter().zip(s.y) {
                writeln!(w, "{x:.16e},{y:.16e},{}", s.name)?;
            }
        }
        Ok(())
    })
}

/// Trial model: the configured model with `theta` laid over the fixed values.
pub fn build_model(cfg: &RunConfig, theta: &ParameterVector) -> specabc::Result<HamiltonianModel> {
    let model = cfg.model.id.build(&cfg.model.fixed.merged(theta))?;
    match cfg.simulation.burn_in {
        Some(t) => model.with_burn_in(t),
        None => Ok(model),
    }
}

pub fn settings(cfg: &RunConfig, weight: f64) -> CliResult<AbcSettings> {
    Ok(AbcSettings {
        grid: cfg.grid()?,
        scheme: cfg.simulation.scheme,
        n_total: cfg.abc.n_total,
        percentile: cfg.abc.percentile,
        distance: DistanceConfig { weight, aggregator: cfg.abc.aggregator },
        summary: cfg.summary,
        seed: cfg.seed,
        workers: cfg.workers,
    })
}

struct SimulatedReference {
    model: HamiltonianModel,
    grid: SimGrid,
    scheme: Scheme,
    m: usize,
    seed: u64,
}

fn simulated_reference(cfg: &RunConfig) -> CliResult<SimulatedReference> {
    match &cfg.reference {
        ReferenceSource::Simulate { m, theta, scheme, seed, .. } => Ok(SimulatedReference {
            model: build_model(cfg, theta)?,
            grid: cfg.reference_grid()?,
            scheme: scheme.unwrap_or(cfg.simulation.scheme),
            m: *m,
            seed: seed.unwrap_or(cfg.seed),
        }),
        ReferenceSource::Files { .. } => {
            Err(CliError::Config("this command needs `reference.source = \"simulate\"`".into()))
        }
    }
}

/// Loads every file and splits it into `cut` segments.
pub fn ingest_files(
    files: &[PathBuf],
    sample_rate: f64,
    rescale: Rescale,
    cut: Option<usize>,
) -> CliResult<Vec<IngestedSeries>> {
    let mut out = Vec::new();
    for f in files {
        let s = read_series(f, sample_rate, rescale)?;
        match cut {
            Some(m) => out.extend(s.cut(m)?),
            None => out.push(s),
        }
    }
    Ok(out)
}

pub fn summarize_ingested(
    series: &[IngestedSeries],
    files: &[PathBuf],
    sample_rate: f64,
    summary: &SummaryConfig,
) -> CliResult<ReferenceSet> {
    let summaries =
        series.iter().map(|s| summarize_series(&s.samples, s.dt(), summary)).collect::<specabc::Result<Vec<_>>>()?;
    Ok(ReferenceSet::new(
        summaries,
        Provenance::Ingested { files: files.iter().map(|f| f.display().to_string()).collect(), sample_rate },
    )?)
}

pub fn reference_set(cfg: &RunConfig) -> CliResult<ReferenceSet> {
    match &cfg.reference {
        ReferenceSource::Simulate { .. } => {
            let r = simulated_reference(cfg)?;
            Ok(ReferenceSet::simulate(&r.model, &r.grid, r.scheme, r.m, r.seed, &cfg.summary)?)
        }
        ReferenceSource::Files { files, sample_rate, rescale, cut } => {
            let series = ingest_files(files, *sample_rate, *rescale, *cut)?;
            summarize_ingested(&series, files, *sample_rate, &cfg.summary)
        }
    }
}

fn reference_curves(reference: &ReferenceSet) -> Vec<Series<'_>> {
    let mut out = Vec::new();
    for (k, s) in reference.summaries.iter().enumerate() {
        out.push(Series { name: format!("spectrum_{k}"), x: &s.spec.frequencies, y: &s.spec.values });
    }
    for (k, s) in reference.summaries.iter().enumerate() {
        out.push(Series { name: format!("density_{k}"), x: &s.dens.grid, y: &s.dens.values });
    }
    out
}

/// Writes the reference paths as `t,y` files.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let r = simulated_reference(cfg)?;
    let integrator = Integrator::new(&r.model, r.scheme, r.grid.dt)?;
    let dir = out.join("trajectories");
    let mut files = Vec::with_capacity(r.m);
    let mut overflowed = Vec::new();
    for k in 0..r.m {
        let path = integrator.trajectory(&r.grid, &ReferenceSet::stream(r.seed, k))?;
        if path.overflowed {
            overflowed.push(k);
        }
        let file = dir.join(format!("path_{k:03}.csv"));
        write_with(&file, |w| path.write_csv(w))?;
        files.push(file.display().to_string());
    }
    write_json(
        &out.join("simulate_manifest.json"),
        &json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "model": cfg.model.id,
            "theta": r.model.params(),
            "scheme": r.scheme,
            "dt": r.grid.dt,
            "t_end": r.grid.t_end,
            "n_steps": r.grid.n_steps,
            "seed": r.seed,
            "files": files,
            "overflowed": overflowed,
        }),
    )?;
    println!("wrote {} trajectories of {} points to {}", r.m, r.grid.n_steps, dir.display());
    if !overflowed.is_empty() {
        eprintln!("warning: paths {overflowed:?} overflowed and were padded with NaN");
    }
    Ok(())
}

pub struct IngestRequest {
    pub files: Vec<PathBuf>,
    pub sample_rate: f64,
    pub rescale: Rescale,
    pub cut: Option<usize>,
    pub summary: SummaryConfig,
}

pub fn cmd_ingest(req: &IngestRequest, out: &Path) -> CliResult<ReferenceSet> {
    if req.cut == Some(0) {
        return Err(CliError::Config("cut must be at least 1".into()));
    }
    let series = ingest_files(&req.files, req.sample_rate, req.rescale, req.cut)?;
    let reference = summarize_ingested(&series, &req.files, req.sample_rate, &req.summary)?;
    write_json(&out.join("reference.json"), &reference)?;
    write_series_csv(&out.join("reference_curves.csv"), &reference_curves(&reference))?;
    println!(
        "ingested {} series of {} samples, dt = {:.6e}",
        reference.m_count(),
        series[0].samples.len(),
        series[0].dt()
    );
    Ok(reference)
}

pub fn run_pilot(cfg: &RunConfig) -> CliResult<PilotReport> {
    let builder = |theta: &ParameterVector| build_model(cfg, theta);
    Ok(pilot_weight(&builder, &cfg.prior, cfg.abc.pilot_size, &settings(cfg, 0.0)?)?)
}

fn write_pilot(out: &Path, cfg: &RunConfig, report: &PilotReport) -> CliResult<()> {
    write_json(
        &out.join("pilot.json"),
        &json!({
            "weight": report.weight,
            "pilot_size": cfg.abc.pilot_size,
            "attempts": report.attempts,
            "seed": cfg.seed,
            "ratios": report.ratios,
        }),
    )
}

pub fn cmd_pilot(cfg: &RunConfig, out: &Path) -> CliResult<PilotReport> {
    let report = run_pilot(cfg)?;
    write_pilot(out, cfg, &report)?;
    println!("pilot weight w = {:.6e} from {} ratios ({} attempts)", report.weight, report.ratios.len(), report.attempts);
    Ok(report)
}

pub fn print_stats(stats: &PosteriorStats) {
    println!("{:<10} {:>14} {:>14} {:>14} {:>14} {:>14}", "parameter", "mean", "sd", "q2.5", "q50", "q97.5");
    for p in &stats.parameters {
        println!(
            "{:<10} {:>14.6} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
            display_name(&p.name),
            p.mean,
            p.sd,
            p.q025,
            p.q50,
            p.q975
        );
    }
    if stats.parameters.len() > 1 {
        println!("correlation:");
        for (p, row) in stats.parameters.iter().zip(&stats.correlation) {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>8.3}")).collect();
            println!("{:<10} {}", display_name(&p.name), cells.join(" "));
        }
    }
    if stats.degenerate {
        println!("note: some parameter has zero spread; its correlations are reported as 0");
    }
    println!("kept draws: {}", stats.n_kept);
}

fn write_stats_csv(path: &Path, stats: &PosteriorStats) -> CliResult<()> {
    write_with(path, |w| {
        writeln!(w, "parameter,mean,sd,q025,q50,q975")?;
        for ParameterSummary { name, mean, sd, q025, q50, q975 } in &stats.parameters {
            writeln!(w, "{},{mean:.16e},{sd:.16e},{q025:.16e},{q50:.16e},{q975:.16e}", display_name(name))?;
        }
        Ok(())
    })
}

/// Counts of kept draws in equal bins across each prior interval.
pub fn histograms(cfg: &RunConfig, names: &[String], cols: &[Vec<f64>], bins: usize) -> Vec<(String, Vec<(f64, f64, usize)>)> {
    names
        .iter()
        .zip(cols)
        .filter_map(|(name, col)| {
            let (_, lo, hi) = cfg.prior.bounds().iter().find(|(n, _, _)| n == name)?;
            let width = (hi - lo) / bins as f64;
            let mut counts = vec![0usize; bins];
            for v in col {
                let b = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
                counts[b] += 1;
            }
            let rows = counts.into_iter().enumerate().map(|(b, c)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, c));
            Some((display_name(name).to_string(), rows.collect()))
        })
        .collect()
}

fn write_histograms(path: &Path, hist: &[(String, Vec<(f64, f64, usize)>)]) -> CliResult<()> {
    write_with(path, |w| {
        writeln!(w, "parameter,bin_lo,bin_hi,count")?;
        for (name, rows) in hist {
            for (a, b, c) in rows {
                writeln!(w, "{name},{a:.16e},{b:.16e},{c}")?;
            }
        }
        Ok(())
    })
}

fn config_value(cfg: &RunConfig) -> CliResult<Value> {
    serde_json::to_value(cfg).map_err(|e| CliError::Run(e.to_string()))
}

/// Whether `out` already holds the results of running `cfg`.
fn up_to_date(cfg: &RunConfig, out: &Path) -> CliResult<Option<Value>> {
    let Ok(text) = fs::read_to_string(out.join(MANIFEST)) else { return Ok(None) };
    let Ok(manifest) = serde_json::from_str::<Value>(&text) else { return Ok(None) };
    let same = manifest.get("config") == Some(&config_value(cfg)?) && manifest.get("command") == Some(&json!("run"));
    Ok((same && out.join(ACCEPTED).is_file()).then_some(manifest))
}

pub fn cmd_run(cfg: &RunConfig, out: &Path, resume: bool) -> CliResult<()> {
    if resume {
        if let Some(manifest) = up_to_date(cfg, out)? {
            println!("{} matches this configuration; nothing to do", out.join(MANIFEST).display());
            if let Some(stats) = manifest.get("posterior").and_then(|p| serde_json::from_value(p.clone()).ok()) {
                print_stats(&stats);
            }
            return Ok(());
        }
    }
    let start = Instant::now();
    let reference = reference_set(cfg)?;
    let t_reference = start.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (weight, pilot) = match cfg.abc.weight {
        WeightMode::Zero => (0.0, None),
        WeightMode::Fixed(w) => (w, None),
        WeightMode::Pilot => {
            let report = run_pilot(cfg)?;
            write_pilot(out, cfg, &report)?;
            (report.weight, Some(report))
        }
    };
    let t_pilot = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let builder = |theta: &ParameterVector| build_model(cfg, theta);
    let settings = settings(cfg, weight)?;
    let run = run_abc(&builder, &cfg.prior, &reference, &settings)?;
    let t_abc = t0.elapsed().as_secs_f64();

    write_with(&out.join(ACCEPTED), |w| run.write_accepted_csv(w))?;
    let stats = match posterior_stats(&run) {
        Ok(s) => {
            write_stats_csv(&out.join("posterior_stats.csv"), &s)?;
            Some(s)
        }
        Err(e) => {
            eprintln!("warning: {e}");
            None
        }
    };
    let cols: Vec<Vec<f64>> = run.parameter_names.iter().map(|n| run.column(n)).collect();
    write_histograms(&out.join("histograms.csv"), &histograms(cfg, &run.parameter_names, &cols, HISTOGRAM_BINS))?;

    let prior: Value = serde_json::to_value(&cfg.prior).map_err(|e| CliError::Run(e.to_string()))?;
    write_json(
        &out.join(MANIFEST),
        &json!({
            "command": "run",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config_value(cfg)?,
            "model": cfg.model.id,
            "scheme": cfg.simulation.scheme,
            "dt": settings.grid.dt,
            "t_end": settings.grid.t_end,
            "seed": run.seed,
            "n_total": run.n_total,
            "percentile": run.percentile,
            "epsilon": run.epsilon,
            "n_kept": run.kept.len(),
            "n_failed": run.n_failed,
            "m_reference": reference.m_count(),
            "prior": prior,
            "weight": weight,
            "weight_mode": cfg.abc.weight,
            "pilot_attempts": pilot.as_ref().map(|p| p.attempts),
            "aggregator": cfg.abc.aggregator,
            "workers": cfg.workers,
            "timings": {
                "reference_s": t_reference,
                "pilot_s": t_pilot,
                "abc_s": t_abc,
                "total_s": start.elapsed().as_secs_f64(),
            },
            "posterior": stats,
        }),
    )?;

    println!(
        "kept {} of {} draws (epsilon = {:.6e}, {} failed, w = {:.4e}) in {:.1} s",
        run.kept.len(),
        run.n_total,
        run.epsilon,
        run.n_failed,
        weight,
        start.elapsed().as_secs_f64()
    );
    if let Some(s) = &stats {
        print_stats(s);
    }
    Ok(())
}

/// Kept draws read back from an accepted-samples file: parameter names and
/// one column per parameter.
pub fn read_accepted(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?.clone();
    let names: Vec<String> = header.iter().filter(|h| *h != "distance").map(str::to_string).collect();
    if names.is_empty() || header.len() != names.len() + 1 {
        return Err(CliError::Run(format!("{}: expected parameter columns followed by `distance`", path.display())));
    }
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
        for (j, col) in cols.iter_mut().enumerate() {
            let v: f64 = rec[j].trim().parse().map_err(|_| {
                CliError::Run(format!("{}: line {}: `{}` is not a number", path.display(), line + 2, &rec[j]))
            })?;
            col.push(v);
        }
    }
    Ok((names, cols))
}

pub fn cmd_stats(accepted: &Path, out: &Path) -> CliResult<PosteriorStats> {
    let (names, cols) = read_accepted(accepted)?;
    let stats = draw_stats(&names, &cols)?;
    write_stats_csv(&out.join("posterior_stats.csv"), &stats)?;
    print_stats(&stats);
    Ok(stats)
}

/// Kinds of plot data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// Spectra and densities of the reference paths overlaid.
    Overlay,
    /// Posterior densities against the priors, plus scatter pairs.
    Posterior,
    /// Densities from the splitting and Euler schemes against the invariant law.
    Schemes,
    /// A path at the posterior mean against the reference summaries.
    Fit,
}

pub struct PlotRequest {
    pub kind: PlotKind,
    pub accepted: Option<PathBuf>,
    pub dts: Vec<f64>,
}

pub fn cmd_plot_data(cfg: &RunConfig, out: &Path, req: &PlotRequest) -> CliResult<Vec<PathBuf>> {
    let dir = out.join("plot");
    let written = match req.kind {
        PlotKind::Overlay => {
            let reference = reference_set(cfg)?;
            let spectra = reference_curves(&reference).into_iter().filter(|s| s.name.starts_with("spectrum")).collect::<Vec<_>>();
            let densities = reference_curves(&reference).into_iter().filter(|s| s.name.starts_with("density")).collect::<Vec<_>>();
            let (a, b) = (dir.join("overlay_spectra.csv"), dir.join("overlay_densities.csv"));
            write_series_csv(&a, &spectra)?;
            write_series_csv(&b, &densities)?;
            vec![a, b]
        }
        PlotKind::Posterior => {
            let accepted = req.accepted.clone().unwrap_or_else(|| out.join(ACCEPTED));
            if !accepted.is_file() {
                return Err(CliError::Run(format!("missing run artifact {}", accepted.display())));
            }
            let (names, cols) = read_accepted(&accepted)?;
            posterior_curves(cfg, &dir, &names, &cols)?
        }
        PlotKind::Schemes => scheme_densities(cfg, &dir, &req.dts)?,
        PlotKind::Fit => {
            let accepted = req.accepted.clone().unwrap_or_else(|| out.join(ACCEPTED));
            if !accepted.is_file() {
                return Err(CliError::Run(format!("missing run artifact {}", accepted.display())));
            }
            fit_curves(cfg, &dir, &accepted)?
        }
    };
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(written)
}

fn posterior_curves(cfg: &RunConfig, dir: &Path, names: &[String], cols: &[Vec<f64>]) -> CliResult<Vec<PathBuf>> {
    let kdes = names
        .iter()
        .zip(cols)
        .map(|(n, c)| kde(c, &KdeConfig::default()).map_err(|e| CliError::Run(format!("posterior of {n}: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let priors: Vec<(String, [f64; 2], [f64; 2])> = names
        .iter()
        .filter_map(|n| {
            let canonical = specabc::params::canonical_name(n);
            let (_, lo, hi) = cfg.prior.bounds().iter().find(|(b, _, _)| *b == canonical)?;
            Some((n.clone(), [*lo, *hi], [1.0 / (hi - lo); 2]))
        })
        .collect();
    let mut series = Vec::new();
    for (n, d) in names.iter().zip(&kdes) {
        series.push(Series { name: format!("{n}_posterior"), x: &d.grid, y: &d.values });
    }
    for (n, x, y) in &priors {
        series.push(Series { name: format!("{n}_prior"), x, y });
    }
    let curves = dir.join("posterior_curves.csv");
    write_series_csv(&curves, &series)?;

    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pairs.push(Series { name: format!("{}~{}", names[i], names[j]), x: &cols[i], y: &cols[j] });
        }
    }
    let mut out = vec![curves];
    if !pairs.is_empty() {
        let p = dir.join("posterior_pairs.csv");
        write_series_csv(&p, &pairs)?;
        out.push(p);
    }
    Ok(out)
}

fn scheme_densities(cfg: &RunConfig, dir: &Path, dts: &[f64]) -> CliResult<Vec<PathBuf>> {
    let r = simulated_reference(cfg)?;
    let t_end = r.grid.t_end;
    let stream = ReferenceSet::stream(r.seed, 0);
    let mut curves: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &dt in dts {
        if !(dt > 0.0) {
            return Err(CliError::Config(format!("time step must be positive, got {dt}")));
        }
        let grid = SimGrid::from_steps(dt, (t_end / dt).round() as usize)?;
        for scheme in [Scheme::StrangSdeOuter, Scheme::Euler] {
            let path = Integrator::new(&r.model, scheme, dt)?.trajectory(&grid, &stream)?;
            if path.overflowed {
                eprintln!("note: {scheme} overflowed at dt = {dt}; no density written");
                continue;
            }
            let d = summarize(&path, &cfg.summary)?.dens;
            lo = lo.min(d.grid[0]);
            hi = hi.max(d.grid[d.grid.len() - 1]);
            curves.push((format!("{scheme} dt={dt}"), d.grid, d.values));
        }
    }
    if let Some(a) = r.model.analytics() {
        if lo < hi {
            let x: Vec<f64> = (0..1000).map(|i| lo + (hi - lo) * i as f64 / 999.0).collect();
            let y = x.iter().map(|&v| a.density(v)).collect();
            curves.push(("invariant".to_string(), x, y));
        }
    }
    let series: Vec<Series<'_>> = curves.iter().map(|(n, x, y)| Series { name: n.clone(), x, y }).collect();
    let p = dir.join("scheme_densities.csv");
    write_series_csv(&p, &series)?;
    Ok(vec![p])
}

fn fit_curves(cfg: &RunConfig, dir: &Path, accepted: &Path) -> CliResult<Vec<PathBuf>> {
    let (names, cols) = read_accepted(accepted)?;
    let stats = draw_stats(&names, &cols)?;
    let mut theta = ParameterVector::new();
    for p in &stats.parameters {
        theta.insert(p.name.clone(), p.mean)?;
    }
    let model = build_model(cfg, &theta)?;
    let grid = cfg.grid()?;
    let path = Integrator::new(&model, cfg.simulation.scheme, grid.dt)?
        .trajectory(&grid, &RngStream::new(cfg.seed, 0))?;
    let fitted: SummaryPair = summarize(&path, &cfg.summary)?;
    let reference = reference_set(cfg)?;

    let mut spectra = vec![Series { name: "fitted".into(), x: &fitted.spec.frequencies, y: &fitted.spec.values }];
    let mut densities = vec![Series { name: "fitted".into(), x: &fitted.dens.grid, y: &fitted.dens.values }];
    for (k, s) in reference.summaries.iter().enumerate() {
        spectra.push(Series { name: format!("reference_{k}"), x: &s.spec.frequencies, y: &s.spec.values });
        densities.push(Series { name: format!("reference_{k}"), x: &s.dens.grid, y: &s.dens.values });
    }
    let (a, b, c) = (dir.join("fit_spectra.csv"), dir.join("fit_densities.csv"), dir.join("fit_path.csv"));
    write_series_csv(&a, &spectra)?;
    write_series_csv(&b, &densities)?;
    write_with(&c, |w| path.write_csv(w))?;
    println!("posterior mean {theta}");
    Ok(vec![a, b, c])
}
