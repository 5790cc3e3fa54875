//! Flows of time-dependent vector fields and the smoothing operators `S_k`.
//!
//! A [`FieldSequence`] holds fields at fixed times in `[0, 1]` and
//! interpolates linearly between them (constant outside the first and last
//! node). Points are transported by classical RK4.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{edge_speed, Curve};
use crate::error::{Error, Result};
use crate::fourier::{transform_nd, wavenumber};
use crate::kernel::SobolevKernel;
use crate::outer::{AmbientField, MomentumPath};

/// Minimum RK4 step count accepted by the integrators.
pub const MIN_FLOW_STEPS: usize = 8;

/// Frames kept in a serialized [`FlowRecord`].
pub const MAX_RECORD_FRAMES: usize = 64;

/// One time slice of a flow's generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityField {
    Kernel { field: AmbientField },
    /// The same vector at every point.
    Uniform { value: Vec<f64> },
}

impl VelocityField {
    pub fn dim(&self) -> usize {
        match self {
            VelocityField::Kernel { field } => field.dim(),
            VelocityField::Uniform { value } => value.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            VelocityField::Kernel { field } => field.eval(x),
            VelocityField::Uniform { value } => value.clone(),
        }
    }

    fn scaled(&self, factor: f64) -> VelocityField {
        match self {
            VelocityField::Kernel { field } => VelocityField::Kernel { field: field.scaled(factor) },
            VelocityField::Uniform { value } => VelocityField::Uniform { value: value.iter().map(|v| v * factor).collect() },
        }
    }
}

impl From<AmbientField> for VelocityField {
    fn from(field: AmbientField) -> Self {
        VelocityField::Kernel { field }
    }
}

/// Fields `X_j` at increasing times `t_j ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSequence {
    times: Vec<f64>,
    fields: Vec<VelocityField>,
}

impl FieldSequence {
    pub fn new(times: Vec<f64>, fields: Vec<VelocityField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Config("a field sequence needs at least one field".into()));
        }
        if times.len() != fields.len() {
            return Err(Error::ShapeMismatch { expected: fields.len(), got: times.len() });
        }
        if times.iter().any(|t| !(0.0..=1.0).contains(t)) || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("field times must increase strictly within [0, 1]".into()));
        }
        let d = fields[0].dim();
        if d == 0 {
            return Err(Error::Config("fields must have positive dimension".into()));
        }
        if let Some(f) = fields.iter().find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch { left: d, right: f.dim() });
        }
        for f in &fields {
            if let VelocityField::Uniform { value } = f {
                if let Some(i) = value.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { index: i });
                }
            }
        }
        Ok(FieldSequence { times, fields })
    }

    /// Fields on the uniform grid `t_j = j/(m − 1)`.
    pub fn uniform(fields: Vec<VelocityField>) -> Result<Self> {
        let m = fields.len();
        let times = if m == 1 { vec![0.0] } else { (0..m).map(|j| j as f64 / (m - 1) as f64).collect() };
        FieldSequence::new(times, fields)
    }

    pub fn constant(field: VelocityField) -> Result<Self> {
        FieldSequence::new(vec![0.0], vec![field])
    }

    pub fn zero(kernel: SobolevKernel) -> Self {
        FieldSequence { times: vec![0.0], fields: vec![AmbientField::zero(kernel).into()] }
    }

    /// Generator of an orbit path: on step `t` the kernel field with the
    /// step's momentum, centered at the step midpoint, placed at time
    /// `(t + ½)/T`.
    pub fn from_momentum_path(k: &SobolevKernel, path: &MomentumPath) -> Result<Self> {
        let steps = path.steps();
        let traj = path.trajectory();
        let mut times = Vec::with_capacity(steps);
        let mut fields = Vec::with_capacity(steps);
        for (t, p) in path.momenta().iter().enumerate() {
            let centers = traj[t].iter().zip(&traj[t + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            times.push((t as f64 + 0.5) / steps as f64);
            fields.push(AmbientField::new(*k, centers, p.clone())?.into());
        }
        FieldSequence::new(times, fields)
    }

    pub fn dim(&self) -> usize {
        self.fields[0].dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[VelocityField] {
        &self.fields
    }

    /// `X(t, x)` by linear interpolation in `t`.
    pub fn velocity(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.fields[0].eval(x);
        }
        if t >= self.times[last] {
            return self.fields[last].eval(x);
        }
        let j = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        let a = self.fields[j].eval(x);
        let b = self.fields[j + 1].eval(x);
        a.iter().zip(&b).map(|(a, b)| a + w * (b - a)).collect()
    }

    /// `v(t) = −u(1 − t)`, whose time-one flow inverts that of `u`.
    pub fn reversed(&self) -> FieldSequence {
        FieldSequence {
            times: self.times.iter().rev().map(|t| 1.0 - t).collect(),
            fields: self.fields.iter().rev().map(|f| f.scaled(-1.0)).collect(),
        }
    }
}

/// Trajectories of tracked points under a field sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    d: usize,
    start: f64,
    end: f64,
    trajectory: Vec<Vec<f64>>,
    source: FieldSequence,
}

impl FlowResult {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> usize {
        self.trajectory.len() - 1
    }

    /// Time interval `[t0, t1]` that was integrated.
    pub fn interval(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    /// Point sets after each step, starting with the initial one.
    pub fn trajectory(&self) -> &[Vec<f64>] {
        &self.trajectory
    }

    pub fn initial(&self) -> &[f64] {
        &self.trajectory[0]
    }

    pub fn last(&self) -> &[f64] {
        self.trajectory.last().expect("non-empty trajectory")
    }

    pub fn source(&self) -> &FieldSequence {
        &self.source
    }

    /// Serializable summary with at most [`MAX_RECORD_FRAMES`] frames.
    pub fn record(&self) -> FlowRecord {
        let steps = self.steps();
        let picks: Vec<usize> = if steps < MAX_RECORD_FRAMES {
            (0..=steps).collect()
        } else {
            let m = MAX_RECORD_FRAMES - 1;
            (0..=m).map(|j| (j * steps + m / 2) / m).collect()
        };
        let dt = (self.end - self.start) / steps as f64;
        FlowRecord {
            d: self.d,
            steps,
            times: picks.iter().map(|&i| self.start + i as f64 * dt).collect(),
            frames: picks.iter().map(|&i| self.trajectory[i].clone()).collect(),
            source: self.source.clone(),
        }
    }
}

/// JSON form of a [`FlowResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRecord {
    pub d: usize,
    pub steps: usize,
    pub times: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
    pub source: FieldSequence,
}

/// RK4 path of a single point; on a non-finite value returns the step.
fn rk4_track(fields: &FieldSequence, x0: &[f64], t0: f64, t1: f64, steps: usize) -> std::result::Result<Vec<Vec<f64>>, usize> {
    let h = (t1 - t0) / steps as f64;
    let shift = |x: &[f64], k: &[f64], a: f64| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + a * k).collect() };
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    out.push(x.clone());
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = fields.velocity(t, &x);
        let k2 = fields.velocity(t + 0.5 * h, &shift(&x, &k1, 0.5 * h));
        let k3 = fields.velocity(t + 0.5 * h, &shift(&x, &k2, 0.5 * h));
        let k4 = fields.velocity(t + h, &shift(&x, &k3, h));
        for a in 0..x.len() {
            x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(i);
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Integrates `ẋ = X(t, x)` over `[t0, t1]` for every point (point-major).
pub fn integrate_flow_interval(fields: &FieldSequence, points: &[f64], t0: f64, t1: f64, steps: usize) -> Result<FlowResult> {
    let d = fields.dim();
    if steps < MIN_FLOW_STEPS {
        return Err(Error::Config(format!("flow needs at least {MIN_FLOW_STEPS} steps, got {steps}")));
    }
    if points.is_empty() || points.len() % d != 0 {
        return Err(Error::ShapeMismatch { expected: d * (points.len() / d).max(1), got: points.len() });
    }
    if let Some(i) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i / d });
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::Config("flow interval must be finite".into()));
    }
    let tracks: Vec<std::result::Result<Vec<Vec<f64>>, usize>> = points.par_chunks(d).map(|x| rk4_track(fields, x, t0, t1, steps)).collect();
    if let Some(step) = tracks.iter().filter_map(|r| r.as_ref().err()).min() {
        return Err(Error::BlowUp { step: *step });
    }
    let tracks: Vec<Vec<Vec<f64>>> = tracks.into_iter().map(|r| r.expect("checked above")).collect();
    let trajectory = (0..=steps).map(|i| tracks.iter().flat_map(|tr| tr[i].iter().copied()).collect()).collect();
    Ok(FlowResult { d, start: t0, end: t1, trajectory, source: fields.clone() })
}

/// Time-one flow `Fl_1(X)` applied to the points.
pub fn integrate_flow(fields: &FieldSequence, points: &[f64], steps: usize) -> Result<FlowResult> {
    integrate_flow_interval(fields, points, 0.0, 1.0, steps)
}

/// Largest displacement after flowing forward with `u` and then with
/// `v(t) = −u(1 − t)`.
pub fn inverse_flow_check(fields: &FieldSequence, points: &[f64], steps: usize) -> Result<f64> {
    let forward = integrate_flow(fields, points, steps)?;
    let back = integrate_flow(&fields.reversed(), forward.last(), steps)?;
    let d = fields.dim();
    Ok(points
        .chunks(d)
        .zip(back.last().chunks(d))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}

/// `φ ∘ q` for the flow map `φ`; every sample of `q` must have been tracked.
pub fn act_on_curve(fr: &FlowResult, q: &Curve) -> Result<Curve> {
    let d = fr.dim();
    if q.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: q.dim() });
    }
    let initial = fr.initial();
    let end = fr.last();
    let mut coords = Vec::with_capacity(q.coords().len());
    for i in 0..q.len() {
        let p = q.point(i);
        let slot = if initial.len() == q.coords().len() && &initial[i * d..(i + 1) * d] == p {
            i
        } else {
            initial.chunks(d).position(|x| x == p).ok_or_else(|| Error::Domain(format!("curve sample {i} was not tracked by the flow")))?
        };
        coords.extend_from_slice(&end[slot * d..(slot + 1) * d]);
    }
    let moved = Curve::new(d, coords)?;
    edge_speed(&moved)?;
    Ok(moved)
}

/// Scalar samples on the periodic box `[−L, L)^d`, `resolution` points per
/// axis, stored row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicGridField {
    d: usize,
    half_width: f64,
    resolution: usize,
    values: Vec<f64>,
}

impl PeriodicGridField {
    pub fn new(d: usize, half_width: f64, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("grid dimension must be positive".into()));
        }
        if resolution < 64 || !resolution.is_power_of_two() {
            return Err(Error::Config(format!("grid resolution must be a power of two ≥ 64, got {resolution}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Config(format!("grid half-width must be positive, got {half_width}")));
        }
        let total = resolution.checked_pow(d as u32).ok_or_else(|| Error::Config("grid too large".into()))?;
        if values.len() != total {
            return Err(Error::ShapeMismatch { expected: total, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(PeriodicGridField { d, half_width, resolution, values })
    }

    pub fn from_fn(d: usize, half_width: f64, resolution: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let total = resolution.checked_pow(d as u32).unwrap_or(0);
        let values = (0..total).map(|idx| f(&grid_point(idx, d, half_width, resolution))).collect();
        PeriodicGridField::new(d, half_width, resolution, values)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn shape(&self) -> Vec<usize> {
        vec![self.resolution; self.d]
    }

    /// Largest resolved frequency `π (n/2) / L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * (self.resolution / 2) as f64 / self.half_width
    }

    fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform_nd(&mut buf, &self.shape(), false);
        buf
    }

    /// `|ξ|²` of every FFT bin, `ξ = π m / L`.
    fn frequencies_sq(&self) -> Vec<f64> {
        let n = self.resolution;
        let unit = std::f64::consts::PI / self.half_width;
        (0..self.values.len())
            .map(|mut idx| {
                let mut sum = 0.0;
                for _ in 0..self.d {
                    let xi = unit * wavenumber(idx % n, n) as f64;
                    sum += xi * xi;
                    idx /= n;
                }
                sum
            })
            .collect()
    }

    /// `‖f‖²_{H^s} = (2L)^d Σ_m (1 + |ξ_m|²)^s |f̂_m|²`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let spec = self.spectrum();
        let sum: f64 = spec.iter().zip(self.frequencies_sq()).map(|(c, xi2)| (1.0 + xi2).powf(s) * c.norm_sqr()).sum();
        ((2.0 * self.half_width).powi(self.d as i32) * sum).sqrt()
    }

    pub fn minus(&self, other: &PeriodicGridField) -> Result<PeriodicGridField> {
        if self.d != other.d || self.resolution != other.resolution || self.half_width != other.half_width {
            return Err(Error::Config("grid fields live on different grids".into()));
        }
        Ok(PeriodicGridField { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(), ..self.clone() })
    }
}

fn grid_point(mut idx: usize, d: usize, half_width: f64, n: usize) -> Vec<f64> {
    let h = 2.0 * half_width / n as f64;
    let mut x = vec![0.0; d];
    for a in (0..d).rev() {
        x[a] = -half_width + (idx % n) as f64 * h;
        idx /= n;
    }
    x
}

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 for `r ≤ 1`, 0 for `r ≥ 2`.
pub fn bump(r: f64) -> f64 {
    let (a, b) = (psi(2.0 - r), psi(r - 1.0));
    a / (a + b)
}

/// `S_k f = η(·/k) · χ_k(D) f`, with `χ_k` keeping the modes `|ξ| ≤ k`.
pub fn smooth_sk(f: &PeriodicGridField, k: usize) -> Result<PeriodicGridField> {
    if k == 0 {
        return Err(Error::Config("smoothing index k must be at least 1".into()));
    }
    let cutoff = k as f64;
    if cutoff >= f.nyquist() {
        return Err(Error::Config(format!("cutoff {k} is beyond the grid Nyquist frequency {:.3}", f.nyquist())));
    }
    let mut spec = f.spectrum();
    for (c, xi2) in spec.iter_mut().zip(f.frequencies_sq()) {
        if xi2 > cutoff * cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    transform_nd(&mut spec, &f.shape(), true);
    let values = spec
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let x = grid_point(idx, f.d, f.half_width, f.resolution);
            c.re * bump(x.iter().map(|v| v * v).sum::<f64>().sqrt() / cutoff)
        })
        .collect();
    PeriodicGridField::new(f.d, f.half_width, f.resolution, values)
}

/// Grid proxy of `2^s ∫ ⟨ξ⟩^s |η̂(ξ)| dξ`, a bound on `‖S_k‖_{H^s → H^s}`
/// that holds uniformly in `k ≥ 1`.
pub fn smoothing_bound_proxy(d: usize, half_width: f64, resolution: usize, s: f64) -> Result<f64> {
    let eta = PeriodicGridField::from_fn(d, half_width, resolution, |x| bump(x.iter().map(|v| v * v).sum::<f64>().sqrt()))?;
    let spec = eta.spectrum();
    let sum: f64 = spec.iter().zip(eta.frequencies_sq()).map(|(c, xi2)| (1.0 + xi2).powf(0.5 * s) * c.norm()).sum();
    Ok(2f64.powf(s) * sum)
}
