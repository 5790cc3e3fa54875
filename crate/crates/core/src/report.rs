use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::curve::Curve;
use crate::error::{Error, Result};

/// Options of the path optimizers behind both distance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathOptions {
    /// Gradient-norm tolerance of the energy minimization.
    pub tol: f64,
    pub max_iters: usize,
    /// Number of time steps `T`.
    pub steps: usize,
    /// Re-optimize once on the refined grid `2T`.
    pub continuation: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            tol: 1e-7,
            max_iters: 1000,
            steps: 16,
            continuation: false,
        }
    }
}

impl PathOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("optimizer tol must be positive, got {}", self.tol)));
        }
        if self.steps < 1 {
            return Err(Error::Config("path needs at least one time step".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Same options with the gradient tolerance halved.
    pub fn tightened(&self) -> PathOptions {
        PathOptions { tol: self.tol * 0.5, ..*self }
    }
}

/// The path realizing a distance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathRecord {
    /// Discrete curve path `c_0, …, c_T` on a uniform time grid.
    Curves { curves: Vec<Curve> },
    /// Orbit path: momenta per step and the induced curve trajectory.
    Momenta { momenta: Vec<Vec<f64>>, curves: Vec<Curve> },
}

impl PathRecord {
    pub fn curves(&self) -> &[Curve] {
        match self {
            PathRecord::Curves { curves } | PathRecord::Momenta { curves, .. } => curves,
        }
    }
}

/// Optimizer bookkeeping attached to a distance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Length of the initial (feasible) path.
    pub initial_length: f64,
    /// Length of the optimized path.
    pub path_length: f64,
    /// RMS gap between the path end and the target.
    pub endpoint_mismatch: f64,
    /// Length added to the value for that gap. Zero when the endpoints are
    /// held fixed, as both optimizers do.
    pub mismatch_correction: f64,
    pub breakdown: bool,
    /// Largest diagonal jitter used by any cometric factorization.
    pub max_jitter: f64,
}

/// Geodesic distance estimate with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceReport {
    /// Certified upper bound on the geodesic distance.
    pub value: f64,
    /// Objective after every accepted optimizer step.
    pub energy_trace: Vec<f64>,
    pub converged: bool,
    pub path: Option<PathRecord>,
    pub config_snapshot: MetricConfig,
    pub options: PathOptions,
    pub diagnostics: Diagnostics,
}
