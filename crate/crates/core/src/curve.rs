//! Sampled closed curves and the discrete arc-length calculus on them.
//!
//! A [`Curve`] stores `N` samples `c(θ_i)` of a closed curve at the uniform
//! parameter grid `θ_i = 2πi/N`. Samples are kept point-major in one flat
//! buffer, so coordinate `α` of sample `i` lives at `i * d + α`. The same
//! layout is used for tangent fields and momentum vectors everywhere in the
//! crate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;

/// Minimum number of samples for a closed curve.
pub const MIN_SAMPLES: usize = 8;

/// Uniformly sampled closed polyline in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct Curve {
    d: usize,
    coords: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveJson {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<CurveJson> for Curve {
    type Error = Error;

    fn try_from(raw: CurveJson) -> Result<Self> {
        for p in &raw.points {
            if p.len() != raw.d {
                return Err(Error::DimensionMismatch { left: raw.d, right: p.len() });
            }
        }
        Curve::new(raw.d, raw.points.concat())
    }
}

impl From<Curve> for CurveJson {
    fn from(c: Curve) -> Self {
        CurveJson {
            d: c.d,
            points: c.coords.chunks(c.d).map(|p| p.to_vec()).collect(),
        }
    }
}

impl Curve {
    /// Builds a curve from flat point-major coordinates, validating sample
    /// count, finiteness and the discrete immersion condition.
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("ambient dimension must be positive".into()));
        }
        if coords.len() % d != 0 {
            return Err(Error::ShapeMismatch { expected: d * (coords.len() / d), got: coords.len() });
        }
        let n = coords.len() / d;
        if n < MIN_SAMPLES {
            return Err(Error::TooFewSamples { got: n, min: MIN_SAMPLES });
        }
        if let Some(index) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: index / d });
        }
        let curve = Curve { d, coords };
        for i in 0..n {
            if curve.edge(i).iter().all(|&x| x == 0.0) {
                return Err(Error::Immersion { index: i });
            }
        }
        Ok(curve)
    }

    /// Builds a curve from a list of points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map(Vec::len).unwrap_or(0);
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch { left: d, right: p.len() });
        }
        Curve::new(d, points.concat())
    }

    /// Samples `f` at `θ_i = 2πi/n`.
    pub fn from_fn(n: usize, d: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let coords: Vec<f64> = (0..n).flat_map(|i| f(2.0 * PI * i as f64 / n as f64)).collect();
        Curve::new(d, coords)
    }

    /// Circle of the given radius and center in the plane.
    pub fn circle(n: usize, radius: f64, center: [f64; 2]) -> Result<Self> {
        Curve::from_fn(n, 2, |t| vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
    }

    /// Axis-aligned ellipse `(a cos θ, b sin θ)`.
    pub fn ellipse(n: usize, a: f64, b: f64) -> Result<Self> {
        Curve::from_fn(n, 2, |t| vec![a * t.cos(), b * t.sin()])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Parameter grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    fn edge(&self, i: usize) -> Vec<f64> {
        let j = (i + 1) % self.len();
        (0..self.d).map(|a| self.coords[j * self.d + a] - self.coords[i * self.d + a]).collect()
    }

    /// Length of the closed polyline through the samples.
    pub fn polyline_length(&self) -> f64 {
        (0..self.len()).map(|i| norm(&self.edge(i))).sum()
    }

    /// Arc length by `ds`-quadrature, `Σ |c'(θ_i)| · 2π/N`.
    pub fn length(&self) -> Result<f64> {
        Ok(arc_element(self)?.iter().sum::<f64>() * self.spacing())
    }

    /// Mean of the samples.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.d)
            .map(|a| self.coords.iter().skip(a).step_by(self.d).sum::<f64>() / n)
            .collect()
    }

    /// Adds `field` pointwise, `c + t·u`.
    pub fn displaced(&self, field: &TangentField, t: f64) -> Result<Curve> {
        self.check_field(field)?;
        let coords = self.coords.iter().zip(&field.values).map(|(c, u)| c + t * u).collect();
        Curve::new(self.d, coords)
    }

    /// Translates every sample by `w`.
    pub fn translated(&self, w: &[f64]) -> Result<Curve> {
        if w.len() != self.d {
            return Err(Error::DimensionMismatch { left: self.d, right: w.len() });
        }
        let coords = self.coords.iter().enumerate().map(|(k, c)| c + w[k % self.d]).collect();
        Curve::new(self.d, coords)
    }

    /// Cyclic relabelling: sample `i` of the result is sample `i + shift`.
    pub fn cyclic_shift(&self, shift: usize) -> Curve {
        let n = self.len();
        let coords = (0..n).flat_map(|i| self.point((i + shift) % n).to_vec()).collect();
        Curve { d: self.d, coords }
    }

    pub(crate) fn check_field(&self, field: &TangentField) -> Result<()> {
        if field.d != self.d {
            return Err(Error::DimensionMismatch { left: self.d, right: field.d });
        }
        if field.len() != self.len() {
            return Err(Error::SampleCountMismatch { left: self.len(), right: field.len() });
        }
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &Curve) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        if self.len() != other.len() {
            return Err(Error::SampleCountMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }
}

/// Vector field along a curve, one vector per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    d: usize,
    values: Vec<f64>,
}

impl TangentField {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || values.len() % d != 0 {
            return Err(Error::ShapeMismatch { expected: d, got: values.len() });
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: index / d });
        }
        Ok(TangentField { d, values })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        TangentField { d, values: vec![0.0; n * d] }
    }

    /// Samples `f` at `θ_i = 2πi/n`.
    pub fn from_fn(n: usize, d: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values = (0..n).flat_map(|i| f(2.0 * PI * i as f64 / n as f64)).collect();
        TangentField::new(d, values)
    }

    /// Difference `b - a` of two compatible curves.
    pub fn between(a: &Curve, b: &Curve) -> Result<Self> {
        a.check_compatible(b)?;
        let values = b.coords.iter().zip(&a.coords).map(|(y, x)| y - x).collect();
        Ok(TangentField { d: a.d, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn scaled(&self, t: f64) -> TangentField {
        TangentField { d: self.d, values: self.values.iter().map(|v| v * t).collect() }
    }

    pub fn cyclic_shift(&self, shift: usize) -> TangentField {
        let n = self.len();
        let values = (0..n).flat_map(|i| self.vector((i + shift) % n).to_vec()).collect();
        TangentField { d: self.d, values }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Resamples the curve at `n_new` points equally spaced in polyline arc
/// length, starting at the first sample.
pub fn resample(curve: &Curve, n_new: usize) -> Result<Curve> {
    if n_new < MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: n_new, min: MIN_SAMPLES });
    }
    let n = curve.len();
    let d = curve.dim();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for i in 0..n {
        let last = cumulative[i];
        cumulative.push(last + norm(&curve.edge(i)));
    }
    let total = cumulative[n];
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Degenerate("zero total length"));
    }
    let mut coords = Vec::with_capacity(n_new * d);
    let mut seg = 0;
    for k in 0..n_new {
        let target = total * k as f64 / n_new as f64;
        while seg + 1 < n && cumulative[seg + 1] <= target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 { (target - cumulative[seg]) / span } else { 0.0 };
        let a = curve.point(seg);
        let b = curve.point((seg + 1) % n);
        coords.extend((0..d).map(|x| a[x] + t * (b[x] - a[x])));
    }
    Curve::new(d, coords)
}

/// Speed `|c'(θ_i)|` by second-order central differences.
pub fn arc_element(curve: &Curve) -> Result<Vec<f64>> {
    let n = curve.len();
    let d = curve.dim();
    let h = curve.spacing();
    (0..n)
        .map(|i| {
            let next = curve.point((i + 1) % n);
            let prev = curve.point((i + n - 1) % n);
            let speed = (0..d).map(|a| (next[a] - prev[a]).powi(2)).sum::<f64>().sqrt() / (2.0 * h);
            if speed > 0.0 {
                Ok(speed)
            } else {
                Err(Error::Immersion { index: i })
            }
        })
        .collect()
}

/// Speed on the edges `[θ_i, θ_{i+1}]`, `|c_{i+1} − c_i| / (2π/N)`.
pub fn edge_speed(curve: &Curve) -> Result<Vec<f64>> {
    let h = curve.spacing();
    (0..curve.len())
        .map(|i| {
            let speed = norm(&curve.edge(i)) / h;
            if speed > 0.0 {
                Ok(speed)
            } else {
                Err(Error::Immersion { index: i })
            }
        })
        .collect()
}

/// Arc-length derivative `D_s u = u' / |c'|` by central differences.
pub fn arclength_derivative(curve: &Curve, field: &TangentField) -> Result<TangentField> {
    curve.check_field(field)?;
    let speed = arc_element(curve)?;
    let n = curve.len();
    let d = curve.dim();
    let h = curve.spacing();
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let next = field.vector((i + 1) % n);
        let prev = field.vector((i + n - 1) % n);
        for a in 0..d {
            out[i * d + a] = (next[a] - prev[a]) / (2.0 * h * speed[i]);
        }
    }
    TangentField::new(d, out)
}

/// Flat Sobolev norm on the circle,
/// `‖u‖² = 2π Σ_m (1 + m²)^order |û_m|²` summed over coordinates, with
/// `û_m = (1/N) Σ_j u_j e^{−imθ_j}`. Under this convention
/// `‖e^{imθ}‖² = 2π (1 + m²)^order`.
pub fn sobolev_norm_circle(field: &TangentField, order: f64) -> Result<f64> {
    if !(order >= 0.0) {
        return Err(Error::Domain(format!("Sobolev order must be nonnegative, got {order}")));
    }
    let n = field.len();
    let d = field.dim();
    let mut total = 0.0;
    for a in 0..d {
        let column: Vec<f64> = (0..n).map(|i| field.values[i * d + a]).collect();
        let spectrum = fourier::forward(&column);
        for (j, c) in spectrum.iter().enumerate() {
            let m = fourier::wavenumber(j, n) as f64;
            total += (1.0 + m * m).powf(order) * c.norm_sqr();
        }
    }
    Ok((2.0 * PI * total).sqrt())
}
