use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use curvegeom::compare::{run_comparison, ExperimentSpec};
use curvegeom::flows::{act_on_curve, integrate_flow, FlowRecord};
use curvegeom::inner::{inner_distance, InnerMetric};
use curvegeom::outer::{demo_sweep_csv, outer_distance};
use curvegeom::Curve;
use serde::Serialize;

use crate::config::RunConfig;

pub enum Outcome {
    Converged,
    /// Valid result whose optimizer did not meet its tolerance.
    Unconverged(String),
}

#[derive(Clone, Copy)]
pub enum Metric {
    Inner,
    Outer,
}

fn read_curve(path: &Path) -> Result<Curve> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading curve {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing curve {}", path.display()))
}

/// Writes via a temporary file in the target directory and a rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(cfg: &RunConfig, contents: &str) -> Result<()> {
    match &cfg.io.output {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn curve_pair(cfg: &RunConfig, a: Option<PathBuf>, b: Option<PathBuf>) -> Result<(Curve, Curve)> {
    let a = a.or_else(|| cfg.io.curve_a.clone()).ok_or_else(|| anyhow!("no first curve given (argument or `io.curve_a`)"))?;
    let b = b.or_else(|| cfg.io.curve_b.clone()).ok_or_else(|| anyhow!("no second curve given (argument or `io.curve_b`)"))?;
    Ok((read_curve(&a)?, read_curve(&b)?))
}

pub fn distance(cfg: &RunConfig, metric: Metric, a: Option<PathBuf>, b: Option<PathBuf>) -> Result<Outcome> {
    let (c1, c2) = curve_pair(cfg, a, b)?;
    let report = match metric {
        Metric::Inner => inner_distance(&InnerMetric::new(cfg.metric.clone())?, &c1, &c2, &cfg.optimizer)?,
        Metric::Outer => outer_distance(&cfg.metric, &c1, &c2, &cfg.optimizer)?,
    };
    emit(cfg, &to_json(&report)?)?;
    Ok(if report.converged {
        Outcome::Converged
    } else {
        Outcome::Unconverged(format!("optimizer stopped after {} iterations with gradient norm {:e}", report.diagnostics.iterations, report.diagnostics.gradient_norm))
    })
}

pub fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let mut spec: ExperimentSpec = cfg.experiment.clone().ok_or_else(|| anyhow!("compare needs an `experiment` section in the config"))?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let out = cfg.io.output.clone().ok_or_else(|| anyhow!("compare needs an output path (--out or `io.output`)"))?;
    let report = run_comparison(&spec)?;
    write_atomic(&out, &to_json(&report)?)?;
    write_atomic(&out.with_extension("csv"), &report.to_csv())?;
    Ok(match report.flagged() {
        0 => Outcome::Converged,
        n => Outcome::Unconverged(format!("{n} pair(s) flagged")),
    })
}

#[derive(Serialize)]
struct FlowOutput {
    flow: FlowRecord,
    curve: Curve,
}

pub fn flow(cfg: &RunConfig, curve: Option<PathBuf>) -> Result<Outcome> {
    let job = cfg.flow.as_ref().ok_or_else(|| anyhow!("flow needs a `flow` section in the config"))?;
    let path = curve.or_else(|| cfg.io.curve_a.clone()).ok_or_else(|| anyhow!("no curve given (argument or `io.curve_a`)"))?;
    let q = read_curve(&path)?;
    let fr = integrate_flow(&job.fields, q.coords(), job.steps)?;
    let moved = act_on_curve(&fr, &q)?;
    emit(cfg, &to_json(&FlowOutput { flow: fr.record(), curve: moved })?)?;
    Ok(Outcome::Converged)
}

pub fn demo1d(cfg: &RunConfig, sweep: Vec<f64>) -> Result<Outcome> {
    let job = cfg.demo1d.clone().unwrap_or_else(|| crate::config::DemoJob { grid: Default::default(), sweep: Vec::new() });
    let xs = if sweep.is_empty() { job.sweep } else { sweep };
    if xs.is_empty() {
        bail!("empty sweep: give --x or `demo1d.sweep`");
    }
    emit(cfg, &demo_sweep_csv(&job.grid, &xs)?)?;
    Ok(Outcome::Converged)
}
