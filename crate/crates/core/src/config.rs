use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SobolevKernel;

/// Parameters shared by the inner and outer metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Ambient dimension.
    pub d: usize,
    /// Order of the inner Sobolev metric.
    pub n: usize,
    /// Inner coefficients `a_0, …, a_n`.
    pub a: Vec<f64>,
    /// Order of the outer operator `(1 − Δ)^s`.
    pub s: f64,
    /// Kernel length scale `λ`.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { d: 2, n: 2, a: vec![1.0, 0.0, 1.0], s: 3.0, scale: 1.0 }
    }
}

impl MetricConfig {
    pub fn new(d: usize, a: Vec<f64>, s: f64, scale: f64) -> Result<Self> {
        let n = a.len().saturating_sub(1);
        let cfg = MetricConfig { d, n, a, s, scale };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Trace order `s' = s − (d − 1)/2` for curves.
    pub fn s_prime(&self) -> f64 {
        self.s - (self.d as f64 - 1.0) / 2.0
    }

    /// Structural checks common to every use.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("ambient dimension d must be positive".into()));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("inner order n must be at least 2, got {}", self.n)));
        }
        if self.a.len() != self.n + 1 {
            return Err(Error::Config(format!("expected {} coefficients a_0..a_n, got {}", self.n + 1, self.a.len())));
        }
        if let Some(j) = self.a.iter().position(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::Config(format!("coefficient a_{j} must be a finite nonnegative number")));
        }
        if !(self.a[0] > 0.0) {
            return Err(Error::Config("coefficient a_0 must be positive".into()));
        }
        if !(self.a[self.n] > 0.0) {
            return Err(Error::Config(format!("leading coefficient a_{} must be positive", self.n)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Config(format!("kernel scale must be positive, got {}", self.scale)));
        }
        if !self.s.is_finite() {
            return Err(Error::Config("outer order s must be finite".into()));
        }
        Ok(())
    }

    /// Checks needed by the outer metric: `s > d/2 + 1`.
    pub fn validate_outer(&self) -> Result<()> {
        self.validate()?;
        let min = self.d as f64 / 2.0 + 1.0;
        if !(self.s > min) {
            return Err(Error::Config(format!("outer order s = {} must exceed d/2 + 1 = {min}", self.s)));
        }
        Ok(())
    }

    /// Checks needed by the comparison experiments: `s ≥ n + (d − 1)/2`.
    pub fn validate_comparison(&self) -> Result<()> {
        self.validate_outer()?;
        let min = self.n as f64 + (self.d as f64 - 1.0) / 2.0;
        if self.s < min {
            return Err(Error::Config(format!("outer order s = {} must be at least n + (d-1)/2 = {min}", self.s)));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<SobolevKernel> {
        self.validate_outer()?;
        SobolevKernel::new(self.s, self.d, self.scale)
    }
}
