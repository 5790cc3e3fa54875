//! Outer metric on curves induced by the right-invariant Sobolev metric on
//! ambient diffeomorphisms.
//!
//! The minimal-norm ambient field with trace `u` along `q` is the kernel
//! representer `X = Σ_i k(|· − q_i|) p_i` with `p = B_q^{−1} u`, so
//! `G^O_q(u, v) = uᵀ B_q^{−1} v`. Orbit paths are parametrized by momenta
//! `p_t` carried by the curve samples and transported by `q̇ = B_q p`.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::curve::{norm, Curve, TangentField};
use crate::error::{Error, Result};
use crate::kernel::{gram, CometricGram, KernelTable, RadialProfile, SobolevKernel};
use crate::linalg::{blocked, circle_sobolev_gram_power, eigen_bounds, symmetrize};
use crate::inner::initial_path;
use crate::path::{energy_and_length, linear_nodes, relax, segment_midpoint, SegmentMetric};
use crate::report::{Diagnostics, DistanceReport, PathOptions, PathRecord};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_kernel_dim(k: &SobolevKernel, d: usize) -> Result<()> {
    if k.dim() != d {
        return Err(Error::DimensionMismatch { left: k.dim(), right: d });
    }
    Ok(())
}

/// `G^O_q(u, v) = ⟨A_q u, v⟩` with `A_q = B_q^{−1}`.
pub fn outer_eval(k: &SobolevKernel, q: &Curve, u: &TangentField, v: &TangentField) -> Result<f64> {
    q.check_field(u)?;
    q.check_field(v)?;
    check_kernel_dim(k, q.dim())?;
    gram(k, q)?.metric_pairing(u.values(), v.values())
}

/// Vector field `X(x) = Σ_i k(|x − c_i|) w_i` on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientField {
    kernel: SobolevKernel,
    centers: Vec<f64>,
    weights: Vec<f64>,
}

impl AmbientField {
    pub fn new(kernel: SobolevKernel, centers: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = kernel.dim();
        if centers.len() % d != 0 {
            return Err(Error::ShapeMismatch { expected: d * (centers.len() / d), got: centers.len() });
        }
        if centers.len() != weights.len() {
            return Err(Error::ShapeMismatch { expected: centers.len(), got: weights.len() });
        }
        if let Some(i) = centers.iter().chain(&weights).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: (i % centers.len().max(1)) / d });
        }
        Ok(AmbientField { kernel, centers, weights })
    }

    /// The zero field.
    pub fn zero(kernel: SobolevKernel) -> Self {
        AmbientField { kernel, centers: Vec::new(), weights: Vec::new() }
    }

    pub fn kernel(&self) -> &SobolevKernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Number of centers.
    pub fn len(&self) -> usize {
        self.centers.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Field value at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (c, w) in self.centers.chunks_exact(d).zip(self.weights.chunks_exact(d)) {
            let r = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let kv = self.kernel.eval(r);
            out.iter_mut().zip(w).for_each(|(o, wi)| *o += kv * wi);
        }
        out
    }

    /// Field values at a point-major list of points, `Tr_q X`.
    pub fn trace(&self, points: &[f64]) -> Vec<f64> {
        points.chunks_exact(self.dim()).flat_map(|x| self.eval(x)).collect()
    }

    /// `⟨A X, Y⟩ = Σ_ij k(|c_i − c'_j|) ⟨w_i, w'_j⟩`.
    pub fn pairing(&self, other: &AmbientField) -> Result<f64> {
        if self.kernel != other.kernel {
            return Err(Error::Config("fields carry different kernels".into()));
        }
        let d = self.dim();
        Ok(other
            .centers
            .chunks_exact(d)
            .zip(other.weights.chunks_exact(d))
            .map(|(c, w)| dot(&self.eval(c), w))
            .sum())
    }

    /// `‖X‖²_A`.
    pub fn norm_sq(&self) -> f64 {
        self.pairing(self).expect("same kernel")
    }

    /// Sum of two fields, as one field on the union of the centers.
    pub fn plus(&self, other: &AmbientField) -> Result<AmbientField> {
        if self.kernel != other.kernel {
            return Err(Error::Config("fields carry different kernels".into()));
        }
        let mut centers = self.centers.clone();
        centers.extend_from_slice(&other.centers);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Ok(AmbientField { kernel: self.kernel, centers, weights })
    }

    pub fn scaled(&self, factor: f64) -> AmbientField {
        AmbientField { kernel: self.kernel, centers: self.centers.clone(), weights: self.weights.iter().map(|w| w * factor).collect() }
    }
}

/// Horizontal lift: the minimal-norm field with `X ∘ q = u`.
pub fn lift_field(k: &SobolevKernel, q: &Curve, u: &TangentField) -> Result<AmbientField> {
    q.check_field(u)?;
    check_kernel_dim(k, q.dim())?;
    let p = gram(k, q)?.solve(u.values())?.momentum;
    AmbientField::new(*k, q.coords().to_vec(), p)
}

/// Kernel field centered at `centers` plus a correction on `q` that cancels
/// its trace, so the result lies in `ker Tr_q` up to the solve residual.
pub fn trace_free_field(k: &SobolevKernel, q: &Curve, centers: Vec<f64>, weights: Vec<f64>) -> Result<AmbientField> {
    check_kernel_dim(k, q.dim())?;
    let z = AmbientField::new(*k, centers, weights)?;
    let correction = gram(k, q)?.solve(&z.trace(q.coords()))?.momentum;
    z.plus(&AmbientField::new(*k, q.coords().to_vec(), correction.iter().map(|c| -c).collect())?)
}

/// Defects of the projection `P_q X = lift(q, X ∘ q)`, all relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// `‖P(PX) − PX‖_A / ‖X‖_A`.
    pub idempotence: f64,
    /// `‖Tr PX − Tr X‖ / ‖Tr X‖`.
    pub trace_defect: f64,
    /// `|⟨A PX, X − PX⟩| / ‖X‖²_A`.
    pub orthogonality_defect: f64,
    pub field_norm_sq: f64,
}

impl ProjectionReport {
    pub fn max_defect(&self) -> f64 {
        self.idempotence.max(self.trace_defect).max(self.orthogonality_defect)
    }
}

pub fn projection_identities_check(k: &SobolevKernel, q: &Curve, x: &AmbientField) -> Result<ProjectionReport> {
    check_kernel_dim(k, q.dim())?;
    let b = gram(k, q)?;
    let trace = x.trace(q.coords());
    let p1 = b.solve(&trace)?.momentum;
    let projected = AmbientField::new(*k, q.coords().to_vec(), p1.clone())?;
    let trace_again = projected.trace(q.coords());
    let p2 = b.solve(&trace_again)?.momentum;
    let diff: Vec<f64> = p2.iter().zip(&p1).map(|(a, c)| a - c).collect();
    let idem_sq = dot(&diff, &b.apply(&diff)?).max(0.0);

    let norm_x = x.norm_sq();
    let scale = norm_x.max(f64::MIN_POSITIVE);
    let trace_norm = norm(&trace);
    let trace_gap = norm(&trace_again.iter().zip(&trace).map(|(a, c)| a - c).collect::<Vec<_>>());
    let cross = projected.pairing(x)?;
    let own = projected.norm_sq();
    Ok(ProjectionReport {
        idempotence: (idem_sq / scale).sqrt(),
        trace_defect: if trace_norm > 0.0 { trace_gap / trace_norm } else { trace_gap },
        orthogonality_defect: (cross - own).abs() / scale,
        field_norm_sq: norm_x,
    })
}

/// Extreme generalized eigenvalues of `A_q` against the flat `H^order(dθ)`
/// Gram: `lower ‖u‖²_{H^order} ≤ G^O_q(u, u) ≤ upper ‖u‖²_{H^order}`.
///
/// Computed from the well-conditioned pencil `H^{1/2} B_q H^{1/2}`, whose
/// eigenvalues are the reciprocals.
pub fn outer_equivalence_probe(k: &SobolevKernel, q: &Curve, order: f64) -> Result<(f64, f64)> {
    check_kernel_dim(k, q.dim())?;
    let b = gram(k, q)?;
    let half = blocked(&circle_sobolev_gram_power(q.len(), order, 0.5), q.dim());
    let pencil = symmetrize(&half * b.matrix() * &half);
    let (lo, hi) = eigen_bounds(pencil)?;
    if !(lo > 0.0) {
        return Err(Error::Eigen("cometric pencil is not positive definite"));
    }
    Ok((1.0 / hi, 1.0 / lo))
}

/// Pairwise kernel values and slopes `k'(r)/r` of one point set.
struct PairTable {
    n: usize,
    d: usize,
    value: Vec<f64>,
    slope: Vec<f64>,
    min_dist: f64,
}

impl PairTable {
    fn new<K: RadialProfile>(kern: &K, points: &[f64], d: usize) -> PairTable {
        let n = points.len() / d;
        let mut value = vec![0.0; n * n];
        let mut slope = vec![0.0; n * n];
        let mut min_dist = f64::INFINITY;
        let (v0, s0) = kern.value_slope(0.0);
        for i in 0..n {
            value[i * n + i] = v0;
            slope[i * n + i] = s0;
            let pi = &points[i * d..(i + 1) * d];
            for j in 0..i {
                let pj = &points[j * d..(j + 1) * d];
                let r = pi.iter().zip(pj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                min_dist = min_dist.min(r);
                let (v, s) = kern.value_slope(r);
                value[i * n + j] = v;
                value[j * n + i] = v;
                slope[i * n + j] = s;
                slope[j * n + i] = s;
            }
        }
        PairTable { n, d, value, slope, min_dist }
    }

    fn apply(&self, p: &[f64]) -> Vec<f64> {
        let (n, d) = (self.n, self.d);
        let mut out = vec![0.0; n * d];
        for i in 0..n {
            let row = &self.value[i * n..(i + 1) * n];
            let oi = &mut out[i * d..(i + 1) * d];
            for (j, kij) in row.iter().enumerate() {
                for a in 0..d {
                    oi[a] += kij * p[j * d + a];
                }
            }
        }
        out
    }

    /// Gradient of `λᵀ B(q) p` with respect to `q`.
    fn pullback(&self, points: &[f64], p: &[f64], lam: &[f64]) -> Vec<f64> {
        let (n, d) = (self.n, self.d);
        let mut out = vec![0.0; n * d];
        for m in 0..n {
            let qm = &points[m * d..(m + 1) * d];
            let lm = &lam[m * d..(m + 1) * d];
            let pm = &p[m * d..(m + 1) * d];
            for j in 0..n {
                if j == m {
                    continue;
                }
                let s = self.slope[m * n + j];
                if s == 0.0 {
                    continue;
                }
                let w = s * (dot(lm, &p[j * d..(j + 1) * d]) + dot(&lam[j * d..(j + 1) * d], pm));
                for a in 0..d {
                    out[m * d + a] += w * (qm[a] - points[j * d + a]);
                }
            }
        }
        out
    }

    fn scalar_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.value)
    }
}

/// One explicit-midpoint step `h = q + Δt/2 B(q)p`, `q' = q + Δt B(h)p`.
struct OrbitStep {
    start: Vec<f64>,
    velocity: Vec<f64>,
}

struct Orbit {
    steps: Vec<OrbitStep>,
    end: Vec<f64>,
}

impl Orbit {
    fn rates<'a>(&'a self, momenta: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let size = self.end.len();
        self.steps.iter().enumerate().map(move |(t, st)| dot(&momenta[t * size..(t + 1) * size], &st.velocity))
    }
}

/// Integrates the orbit; on blow-up returns the offending step.
fn integrate_orbit<K: RadialProfile>(kern: &K, base: &[f64], momenta: &[f64], steps: usize, d: usize, floor: f64) -> std::result::Result<Orbit, usize> {
    let size = base.len();
    let dt = 1.0 / steps as f64;
    let mut q = base.to_vec();
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let p = &momenta[t * size..(t + 1) * size];
        let at_start = PairTable::new(kern, &q, d);
        if at_start.min_dist < floor {
            return Err(t);
        }
        let v0 = at_start.apply(p);
        let half: Vec<f64> = q.iter().zip(&v0).map(|(a, v)| a + 0.5 * dt * v).collect();
        let at_half = PairTable::new(kern, &half, d);
        if at_half.min_dist < floor {
            return Err(t);
        }
        let velocity = at_half.apply(p);
        let next: Vec<f64> = q.iter().zip(&velocity).map(|(a, v)| a + dt * v).collect();
        if next.iter().any(|x| !x.is_finite()) {
            return Err(t);
        }
        out.push(OrbitStep { start: std::mem::replace(&mut q, next), velocity });
    }
    Ok(Orbit { steps: out, end: q })
}

fn blow_up_floor(k: &SobolevKernel) -> f64 {
    1e-8 * k.scale()
}

/// Orbit path generated by momenta on the samples of a base point set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPath {
    d: usize,
    momenta: Vec<Vec<f64>>,
    trajectory: Vec<Vec<f64>>,
}

impl MomentumPath {
    pub fn new(k: &SobolevKernel, base: &Curve, momenta: Vec<Vec<f64>>) -> Result<Self> {
        MomentumPath::from_points(k, base.coords().to_vec(), base.dim(), momenta)
    }

    /// Orbit of arbitrary landmarks (no curve structure required).
    pub fn from_points(k: &SobolevKernel, base: Vec<f64>, d: usize, momenta: Vec<Vec<f64>>) -> Result<Self> {
        check_kernel_dim(k, d)?;
        if base.is_empty() || base.len() % d != 0 {
            return Err(Error::ShapeMismatch { expected: d, got: base.len() });
        }
        if momenta.is_empty() {
            return Err(Error::Config("a momentum path needs at least one step".into()));
        }
        if let Some(p) = momenta.iter().find(|p| p.len() != base.len()) {
            return Err(Error::ShapeMismatch { expected: base.len(), got: p.len() });
        }
        let flat = momenta.concat();
        let orbit = integrate_orbit(k, &base, &flat, momenta.len(), d, blow_up_floor(k)).map_err(|step| Error::BlowUp { step })?;
        let mut trajectory: Vec<Vec<f64>> = orbit.steps.into_iter().map(|s| s.start).collect();
        trajectory.push(orbit.end);
        Ok(MomentumPath { d, momenta, trajectory })
    }

    pub fn steps(&self) -> usize {
        self.momenta.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn momenta(&self) -> &[Vec<f64>] {
        &self.momenta
    }

    pub fn base(&self) -> &[f64] {
        &self.trajectory[0]
    }

    pub fn end(&self) -> &[f64] {
        self.trajectory.last().expect("non-empty trajectory")
    }

    /// Point sets `q_0, …, q_T`.
    pub fn trajectory(&self) -> &[Vec<f64>] {
        &self.trajectory
    }

    /// The trajectory as curves; fails if a sample set is not a valid curve.
    pub fn curves(&self) -> Result<Vec<Curve>> {
        self.trajectory.iter().map(|q| Curve::new(self.d, q.clone())).collect()
    }

    /// The reversed path from the end back to the base: momenta re-solved so
    /// each reversed step lands on the forward trajectory.
    pub fn reversed(&self, k: &SobolevKernel) -> Result<MomentumPath> {
        let steps = self.steps();
        let dt = 1.0 / steps as f64;
        let d = self.d;
        let mut momenta = Vec::with_capacity(steps);
        for j in 0..steps {
            let from = &self.trajectory[steps - j];
            let to = &self.trajectory[steps - 1 - j];
            let chord: Vec<f64> = to.iter().zip(from).map(|(a, b)| (a - b) / dt).collect();
            let mut p: Vec<f64> = self.momenta[steps - 1 - j].iter().map(|x| -x).collect();
            for _ in 0..100 {
                let v0 = PairTable::new(k, from, d).apply(&p);
                let half: Vec<f64> = from.iter().zip(&v0).map(|(a, v)| a + 0.5 * dt * v).collect();
                let next = CometricGram::from_points(k, &half, d)?.solve(&chord)?.momentum;
                let change = norm(&next.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
                p = next;
                if change <= 1e-14 * norm(&p).max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            momenta.push(p);
        }
        MomentumPath::from_points(k, self.end().to_vec(), d, momenta)
    }
}

/// Energy, length and trajectory of an orbit path.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitEnergy {
    /// `Σ_t p_tᵀ B(h_t) p_t Δt`.
    pub energy: f64,
    /// `Σ_t sqrt(p_tᵀ B(h_t) p_t) Δt`.
    pub length: f64,
    pub trajectory: Vec<Vec<f64>>,
}

pub fn outer_path_energy(k: &SobolevKernel, mp: &MomentumPath) -> Result<OrbitEnergy> {
    check_kernel_dim(k, mp.d)?;
    let flat = mp.momenta.concat();
    let steps = mp.steps();
    let orbit = integrate_orbit(k, mp.base(), &flat, steps, mp.d, blow_up_floor(k)).map_err(|step| Error::BlowUp { step })?;
    let dt = 1.0 / steps as f64;
    let (mut energy, mut length) = (0.0, 0.0);
    for rate in orbit.rates(&flat) {
        energy += rate * dt;
        length += rate.max(0.0).sqrt() * dt;
    }
    let mut trajectory: Vec<Vec<f64>> = orbit.steps.into_iter().map(|s| s.start).collect();
    trajectory.push(orbit.end);
    Ok(OrbitEnergy { energy, length, trajectory })
}

/// Landmark metric `δᵀ B(m)^{−1} δ` along path segments.
struct OrbitSegments<'a, K: RadialProfile> {
    kern: &'a K,
    d: usize,
    floor: f64,
    jitter: f64,
}

impl<K: RadialProfile> OrbitSegments<'_, K> {
    /// `B(m)^{−1} δ`, or `None` when landmarks collide or `B(m)` is singular.
    fn momentum(&self, table: &PairTable, delta: &[f64]) -> Option<Vec<f64>> {
        if table.min_dist < self.floor {
            return None;
        }
        let scalar = table.scalar_matrix();
        let factor = Cholesky::new(scalar.clone()).or_else(|| {
            let n = scalar.nrows();
            Cholesky::new(scalar + DMatrix::identity(n, n) * self.jitter)
        })?;
        let n = table.n;
        let x = factor.solve(&DMatrix::from_row_slice(n, self.d, delta));
        let p: Vec<f64> = (0..n * self.d).map(|i| x[(i / self.d, i % self.d)]).collect();
        p.iter().all(|x| x.is_finite()).then_some(p)
    }
}

impl<K: RadialProfile> SegmentMetric for OrbitSegments<'_, K> {
    fn segment(&self, mid: &[f64], delta: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let table = PairTable::new(self.kern, mid, self.d);
        let p = self.momentum(&table, delta)?;
        let g = dot(delta, &p);
        let gd = p.iter().map(|x| 2.0 * x).collect();
        let gm = table.pullback(mid, &p, &p).into_iter().map(|x| -x).collect();
        Some((g, gd, gm))
    }
}

/// Upper bound on the outer geodesic distance.
///
/// Relaxes the discrete landmark path energy `T Σ_t δ_tᵀ B(m_t)^{−1} δ_t`
/// with both endpoints held fixed. The optimizer runs on a tabulated kernel;
/// the reported length is re-evaluated with the exact kernel and is never
/// above the length of the initial path.
pub fn outer_distance(cfg: &MetricConfig, q1: &Curve, q2: &Curve, opts: &PathOptions) -> Result<DistanceReport> {
    cfg.validate_outer()?;
    opts.validate()?;
    q1.check_compatible(q2)?;
    let k = cfg.kernel()?;
    check_kernel_dim(&k, q1.dim())?;
    let d = q1.dim();
    let floor = blow_up_floor(&k);
    let jitter = 1e-12 * k.eval(0.0);
    let table = KernelTable::new(&k);
    let fast = OrbitSegments { kern: &table, d, floor, jitter };
    let exact = OrbitSegments { kern: &k, d, floor, jitter };
    let g1 = gram(&k, q1)?;
    let g2 = gram(&k, q2)?;

    let mut init = linear_nodes(q1.coords(), q2.coords(), opts.steps);
    if energy_and_length(&exact, &init).is_none() {
        init = initial_path(q1, q2, opts.steps)?.curves().iter().map(|c| c.coords().to_vec()).collect();
    }
    let (_, initial_length) = energy_and_length(&exact, &init).ok_or(Error::BlowUp { step: 0 })?;

    let t1 = PairTable::new(&k, q1.coords(), d);
    let t2 = PairTable::new(&k, q2.coords(), d);
    let spatial = |g: &[f64]| t1.apply(g).iter().zip(t2.apply(g)).map(|(a, b)| 0.5 * (a + b)).collect();
    let relaxed = relax(&fast, init.clone(), &spatial, opts).ok_or(Error::BlowUp { step: 0 })?;
    let (nodes, path_length) = match energy_and_length(&exact, &relaxed.nodes) {
        Some((_, l)) if l <= initial_length => (relaxed.nodes, l),
        Some((_, l)) => (init, l),
        None => (init, initial_length),
    };
    let value = path_length.min(initial_length);

    let steps = nodes.len() - 1;
    let momenta = nodes
        .windows(2)
        .map(|w| {
            let (mid, delta) = segment_midpoint(&w[0], &w[1]);
            let p = exact.momentum(&PairTable::new(&k, &mid, d), &delta).ok_or(Error::BlowUp { step: 0 })?;
            Ok(p.into_iter().map(|x| x * steps as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let curves = nodes.iter().map(|x| Curve::new(d, x.clone())).collect::<Result<Vec<_>>>().unwrap_or_default();
    Ok(DistanceReport {
        value,
        energy_trace: relaxed.trace,
        converged: relaxed.converged,
        path: Some(PathRecord::Momenta { momenta, curves }),
        config_snapshot: cfg.clone(),
        options: *opts,
        diagnostics: Diagnostics {
            iterations: relaxed.iterations,
            gradient_norm: relaxed.grad_norm,
            initial_length,
            path_length,
            endpoint_mismatch: 0.0,
            mismatch_correction: 0.0,
            breakdown: relaxed.breakdown,
            max_jitter: g1.jitter().max(g2.jitter()),
        },
    })
}

/// Lower bound `‖q2 − q1‖ / sqrt(N k(0))` on the outer distance.
///
/// Every path has Euclidean length at least `‖q2 − q1‖`, and
/// `λ_max(B_q) ≤ N k(0)` by Gershgorin since `0 < k ≤ k(0)`.
pub fn outer_distance_lower_bound(k: &SobolevKernel, q1: &Curve, q2: &Curve) -> Result<f64> {
    q1.check_compatible(q2)?;
    let gap = norm(&q1.coords().iter().zip(q2.coords()).map(|(a, b)| b - a).collect::<Vec<_>>());
    Ok(gap / (q1.len() as f64 * k.eval(0.0)).sqrt())
}

/// Grid and evaluation point of the one-dimensional discontinuity example
/// `G(X, X) = ∫ X² dy + ∫_I (X')² dy`, `I = [−a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Demo1DConfig {
    /// Half-width `L` of the domain `[−L, L]`.
    pub half_width: f64,
    /// Grid spacing `h`.
    pub spacing: f64,
    /// Half-width `a` of the stiff interval `I`.
    pub interval: f64,
    /// Evaluation point `x`.
    pub x: f64,
}

impl Default for Demo1DConfig {
    fn default() -> Self {
        Demo1DConfig { half_width: 4.0, spacing: 1e-3, interval: 1.0, x: 0.0 }
    }
}

impl Demo1DConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 3.0) {
            return Err(Error::Config(format!("half_width must be at least 3, got {}", self.half_width)));
        }
        if !(self.spacing > 0.0 && self.spacing <= 1e-2) {
            return Err(Error::Config(format!("spacing must lie in (0, 1e-2], got {}", self.spacing)));
        }
        if !(self.interval > 0.0 && self.interval < self.half_width) {
            return Err(Error::Config(format!("interval must lie in (0, half_width), got {}", self.interval)));
        }
        if !(self.x.abs() <= self.half_width) {
            return Err(Error::Config(format!("x = {} lies outside the grid", self.x)));
        }
        Ok(())
    }
}

/// Discrete `G^O_x(1, 1)` with the grid node actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demo1DValue {
    pub x: f64,
    /// Grid node the constraint was snapped to.
    pub node: f64,
    pub value: f64,
}

/// Minimizes `h Σ X_i² + Σ_{edges in I} (X_{i+1} − X_i)²/h` subject to
/// `X(x) = 1`. An edge belongs to `I` when its midpoint does.
pub fn demo_discontinuity_1d(cfg: &Demo1DConfig) -> Result<Demo1DValue> {
    cfg.validate()?;
    let h = cfg.spacing;
    let m = (2.0 * cfg.half_width / h).round() as usize;
    let node_at = |i: usize| -cfg.half_width + i as f64 * h;
    let j = ((cfg.x + cfg.half_width) / h).round().min(m as f64) as usize;
    let stiff: Vec<f64> = (0..m).map(|i| if (0.5 * (node_at(i) + node_at(i + 1))).abs() <= cfg.interval { 1.0 / h } else { 0.0 }).collect();

    // tridiagonal system with row j replaced by X_j = 1
    let size = m + 1;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut rhs = vec![0.0; size];
    for i in 0..size {
        if i == j {
            diag[i] = 1.0;
            rhs[i] = 1.0;
            continue;
        }
        let left = if i > 0 { stiff[i - 1] } else { 0.0 };
        let right = if i < m { stiff[i] } else { 0.0 };
        diag[i] = h + left + right;
        lower[i] = -left;
        upper[i] = -right;
    }
    for i in 1..size {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut xs = vec![0.0; size];
    xs[m] = rhs[m] / diag[m];
    for i in (0..m).rev() {
        xs[i] = (rhs[i] - upper[i] * xs[i + 1]) / diag[i];
    }
    let mass: f64 = xs.iter().map(|v| h * v * v).sum();
    let stiffness: f64 = (0..m).map(|i| stiff[i] * (xs[i + 1] - xs[i]).powi(2)).sum();
    Ok(Demo1DValue { x: cfg.x, node: node_at(j), value: mass + stiffness })
}

/// `x,node,value` rows of [`demo_discontinuity_1d`] over a sweep.
pub fn demo_sweep_csv(cfg: &Demo1DConfig, xs: &[f64]) -> Result<String> {
    if xs.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    let mut csv = String::from("x,node,value\n");
    for &x in xs {
        let v = demo_discontinuity_1d(&Demo1DConfig { x, ..*cfg })?;
        csv.push_str(&format!("{},{},{}\n", v.x, v.node, v.value));
    }
    Ok(csv)
}
