use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use curvegeom::compare::ExperimentSpec;
use curvegeom::flows::FieldSequence;
use curvegeom::outer::Demo1DConfig;
use curvegeom::report::PathOptions;
use curvegeom::MetricConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Input and output locations; relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoPaths {
    pub curve_a: Option<PathBuf>,
    pub curve_b: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowJob {
    pub fields: FieldSequence,
    #[serde(default = "default_flow_steps")]
    pub steps: usize,
}

fn default_flow_steps() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoJob {
    #[serde(default)]
    pub grid: Demo1DConfig,
    #[serde(default)]
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub optimizer: PathOptions,
    #[serde(default)]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default)]
    pub flow: Option<FlowJob>,
    #[serde(default)]
    pub demo1d: Option<DemoJob>,
    #[serde(default)]
    pub io: IoPaths,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            metric: MetricConfig::default(),
            optimizer: PathOptions::default(),
            experiment: None,
            flow: None,
            demo1d: None,
            io: IoPaths::default(),
            seed: None,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for slot in [&mut cfg.io.curve_a, &mut cfg.io.curve_b, &mut cfg.io.output] {
            if let Some(p) = slot.as_mut() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version);
        }
        self.metric.validate().context("field `metric`")?;
        self.optimizer.validate().context("field `optimizer`")?;
        if let Some(exp) = &self.experiment {
            exp.validate().context("field `experiment`")?;
        }
        if let Some(demo) = &self.demo1d {
            demo.grid.validate().context("field `demo1d.grid`")?;
        }
        if self.workers == Some(0) {
            bail!("field `workers` must be positive");
        }
        Ok(())
    }
}
