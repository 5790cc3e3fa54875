//! Constant-coefficient Sobolev ("inner") metrics on curves,
//!
//! ```text
//! G_c(u, v) = Σ_k a_k ∫ ⟨D_s^k u, D_s^k v⟩ ds,   D_s = |c'|^{−1} ∂_θ,  ds = |c'| dθ,
//! ```
//!
//! their path energies, and geodesic distance by path-energy minimization.
//!
//! Arc-length derivatives are taken on a staggered grid: odd orders live on
//! the edges `[θ_i, θ_{i+1}]` (forward difference over the edge speed), even
//! orders on the samples (backward difference over the central-difference
//! speed of [`arc_element`]). Each quadrature uses the speed of its own grid.
//! Unlike a repeated central difference, the staggered stencil has no
//! checkerboard null mode, so the metric stays equivalent to the flat
//! `H^n(dθ)` norm uniformly in `N`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::config::MetricConfig;
use crate::curve::{arc_element, edge_speed, norm, Curve, TangentField};
use crate::error::{Error, Result};
use crate::linalg::{blocked, bounds_against_circle_gram, symmetrize};
use crate::path::{relax, segment_midpoint, SegmentMetric};
use crate::report::{Diagnostics, DistanceReport, PathOptions, PathRecord};

/// Sobolev metric with constant coefficients `a_0, …, a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerMetric {
    config: MetricConfig,
}

impl InnerMetric {
    pub fn new(config: MetricConfig) -> Result<Self> {
        config.validate()?;
        Ok(InnerMetric { config })
    }

    pub fn config(&self) -> &MetricConfig {
        &self.config
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.config.a
    }

    pub fn order(&self) -> usize {
        self.config.n
    }
}

/// Vertex and edge speeds of a sampled curve, with the unit directions
/// needed to differentiate them.
struct Speeds {
    n: usize,
    d: usize,
    h: f64,
    vertex: Vec<f64>,
    edge: Vec<f64>,
}

impl Speeds {
    fn of(coords: &[f64], d: usize) -> Option<Speeds> {
        let n = coords.len() / d;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut vertex = Vec::with_capacity(n);
        let mut edge = Vec::with_capacity(n);
        for i in 0..n {
            let next = (i + 1) % n;
            let prev = (i + n - 1) % n;
            let mut central = 0.0;
            let mut forward = 0.0;
            for a in 0..d {
                central += (coords[next * d + a] - coords[prev * d + a]).powi(2);
                forward += (coords[next * d + a] - coords[i * d + a]).powi(2);
            }
            let sv = central.sqrt() / (2.0 * h);
            let se = forward.sqrt() / h;
            if !(sv > 0.0 && se > 0.0) || !sv.is_finite() || !se.is_finite() {
                return None;
            }
            vertex.push(sv);
            edge.push(se);
        }
        Some(Speeds { n, d, h, vertex, edge })
    }

    fn of_curve(c: &Curve) -> Result<Speeds> {
        // surface the same errors as the public speed functions
        arc_element(c)?;
        edge_speed(c)?;
        Speeds::of(c.coords(), c.dim()).ok_or(Error::Immersion { index: 0 })
    }

    fn weight(&self, level: usize) -> &[f64] {
        if level % 2 == 0 {
            &self.vertex
        } else {
            &self.edge
        }
    }

    /// `D_s^k u` for `k = 0..=order`.
    fn ladder(&self, u: &[f64], order: usize) -> Vec<Vec<f64>> {
        let (n, d, h) = (self.n, self.d, self.h);
        let mut levels = Vec::with_capacity(order + 1);
        levels.push(u.to_vec());
        for k in 1..=order {
            let prev = &levels[k - 1];
            let mut next = vec![0.0; n * d];
            for i in 0..n {
                let (hi, lo, speed) = if k % 2 == 1 {
                    ((i + 1) % n, i, self.edge[i])
                } else {
                    (i, (i + n - 1) % n, self.vertex[i])
                };
                for a in 0..d {
                    next[i * d + a] = (prev[hi * d + a] - prev[lo * d + a]) / (h * speed);
                }
            }
            levels.push(next);
        }
        levels
    }

    fn bilinear(&self, coeffs: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let order = coeffs.len() - 1;
        let lu = self.ladder(u, order);
        let lv = self.ladder(v, order);
        let d = self.d;
        let mut total = 0.0;
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let w = self.weight(k);
            let mut level = 0.0;
            for i in 0..self.n {
                let dot: f64 = (0..d).map(|x| lu[k][i * d + x] * lv[k][i * d + x]).sum();
                level += w[i] * dot;
            }
            total += a * level;
        }
        total * self.h
    }

    /// `G(u, u)` with its gradients with respect to `u` and to the curve
    /// coordinates.
    fn quadratic_with_gradients(&self, coords: &[f64], coeffs: &[f64], u: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let (n, d, h) = (self.n, self.d, self.h);
        let order = coeffs.len() - 1;
        let levels = self.ladder(u, order);
        let mut value = 0.0;
        let mut d_vertex = vec![0.0; n];
        let mut d_edge = vec![0.0; n];
        let mut adjoint: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        for (k, &a) in coeffs.iter().enumerate() {
            let w = self.weight(k);
            let lv = &levels[k];
            let mut adj = vec![0.0; n * d];
            for i in 0..n {
                let sq: f64 = (0..d).map(|x| lv[i * d + x] * lv[i * d + x]).sum();
                value += a * h * w[i] * sq;
                let dw = a * h * sq;
                if k % 2 == 0 {
                    d_vertex[i] += dw;
                } else {
                    d_edge[i] += dw;
                }
                for x in 0..d {
                    adj[i * d + x] = 2.0 * a * h * w[i] * lv[i * d + x];
                }
            }
            adjoint.push(adj);
        }
        for k in (1..=order).rev() {
            let current = std::mem::take(&mut adjoint[k]);
            let lv = &levels[k];
            let below = &mut adjoint[k - 1];
            for i in 0..n {
                let (hi, lo, speed) = if k % 2 == 1 {
                    ((i + 1) % n, i, self.edge[i])
                } else {
                    (i, (i + n - 1) % n, self.vertex[i])
                };
                let mut pull = 0.0;
                for x in 0..d {
                    let z = current[i * d + x] / (h * speed);
                    below[hi * d + x] += z;
                    below[lo * d + x] -= z;
                    pull += current[i * d + x] * lv[i * d + x];
                }
                if k % 2 == 1 {
                    d_edge[i] -= pull / speed;
                } else {
                    d_vertex[i] -= pull / speed;
                }
            }
        }
        let grad_u = std::mem::take(&mut adjoint[0]);
        let mut grad_c = vec![0.0; n * d];
        for i in 0..n {
            let next = (i + 1) % n;
            let prev = (i + n - 1) % n;
            let central_len = self.vertex[i] * 2.0 * h;
            let edge_len = self.edge[i] * h;
            for x in 0..d {
                let t = (coords[next * d + x] - coords[prev * d + x]) / central_len;
                grad_c[next * d + x] += d_vertex[i] * t / (2.0 * h);
                grad_c[prev * d + x] -= d_vertex[i] * t / (2.0 * h);
                let e = (coords[next * d + x] - coords[i * d + x]) / edge_len;
                grad_c[next * d + x] += d_edge[i] * e / h;
                grad_c[i * d + x] -= d_edge[i] * e / h;
            }
        }
        (value, grad_u, grad_c)
    }
}

/// `G^I_c(u, v)`.
pub fn inner_eval(m: &InnerMetric, c: &Curve, u: &TangentField, v: &TangentField) -> Result<f64> {
    c.check_field(u)?;
    c.check_field(v)?;
    let speeds = Speeds::of_curve(c)?;
    Ok(speeds.bilinear(m.coefficients(), u.values(), v.values()))
}

/// Matrix `M` with `uᵀ M v = G^I_c(u, v)`, size `Nd × Nd`.
pub fn inner_gram(m: &InnerMetric, c: &Curve) -> Result<DMatrix<f64>> {
    let speeds = Speeds::of_curve(c)?;
    let n = c.len();
    let d = c.dim();
    // level operators on scalar fields, then blocked over coordinates
    let basis_ladders: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            scalar_ladder(&speeds, &e, m.order())
        })
        .collect();
    let mut scalar = DMatrix::zeros(n, n);
    for (k, &a) in m.coefficients().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let w = speeds.weight(k);
        let op = DMatrix::from_fn(n, n, |i, j| basis_ladders[j][k][i]);
        let weighted = DMatrix::from_fn(n, n, |i, j| op[(i, j)] * w[i]);
        scalar += op.transpose() * weighted * (a * speeds.h);
    }
    Ok(symmetrize(blocked(&scalar, d)))
}

fn scalar_ladder(speeds: &Speeds, u: &[f64], order: usize) -> Vec<Vec<f64>> {
    let one_d = Speeds { n: speeds.n, d: 1, h: speeds.h, vertex: speeds.vertex.clone(), edge: speeds.edge.clone() };
    one_d.ladder(u, order)
}

/// Discrete path `c_0, …, c_T` on the uniform grid `t_j = j/T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    curves: Vec<Curve>,
}

impl CurvePath {
    pub fn new(curves: Vec<Curve>) -> Result<Self> {
        if curves.len() < 2 {
            return Err(Error::Config("a path needs at least two curves".into()));
        }
        for c in &curves[1..] {
            curves[0].check_compatible(c)?;
        }
        Ok(CurvePath { curves })
    }

    /// Straight line `c_t = (1 − t) c_1 + t c_2`.
    pub fn linear(c1: &Curve, c2: &Curve, steps: usize) -> Result<Self> {
        c1.check_compatible(c2)?;
        let curves = (0..=steps)
            .map(|j| {
                let t = j as f64 / steps as f64;
                let coords = c1.coords().iter().zip(c2.coords()).map(|(a, b)| a + t * (b - a)).collect();
                Curve::new(c1.dim(), coords)
            })
            .collect::<Result<Vec<_>>>()?;
        CurvePath::new(curves)
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn steps(&self) -> usize {
        self.curves.len() - 1
    }

    /// Inserts the midpoint between consecutive curves (`T → 2T`).
    pub fn refined(&self) -> Result<Self> {
        let mut curves = Vec::with_capacity(2 * self.curves.len() - 1);
        for pair in self.curves.windows(2) {
            curves.push(pair[0].clone());
            let mid = pair[0].coords().iter().zip(pair[1].coords()).map(|(a, b)| 0.5 * (a + b)).collect();
            curves.push(Curve::new(pair[0].dim(), mid)?);
        }
        curves.push(self.curves.last().cloned().expect("non-empty path"));
        CurvePath::new(curves)
    }
}

/// Energy and length of a discrete path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEnergy {
    /// `Σ_t G_{m_t}(Δc/Δt, Δc/Δt) Δt` with `m_t` the segment midpoint.
    pub energy: f64,
    /// `Σ_t sqrt(G_{m_t}(Δc/Δt, Δc/Δt)) Δt`.
    pub length: f64,
}

/// The inner metric along path segments.
struct InnerSegments<'a> {
    coeffs: &'a [f64],
    d: usize,
}

impl SegmentMetric for InnerSegments<'_> {
    fn segment(&self, mid: &[f64], delta: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        Some(Speeds::of(mid, self.d)?.quadratic_with_gradients(mid, self.coeffs, delta))
    }
}

/// Discrete Riemannian energy of a path with midpoint evaluation of the metric.
pub fn inner_path_energy(m: &InnerMetric, path: &CurvePath) -> Result<PathEnergy> {
    let steps = path.steps() as f64;
    let d = path.curves[0].dim();
    let mut energy = 0.0;
    let mut length = 0.0;
    for (t, pair) in path.curves.windows(2).enumerate() {
        let (mid, delta) = segment_midpoint(pair[0].coords(), pair[1].coords());
        let speeds = Speeds::of(&mid, d).ok_or(Error::Immersion { index: t })?;
        let g = speeds.bilinear(m.coefficients(), &delta, &delta);
        energy += g * steps;
        length += g.max(0.0).sqrt();
    }
    Ok(PathEnergy { energy, length })
}

/// Initial path: straight line, or through a circle waypoint when the
/// straight line leaves the immersed curves.
pub(crate) fn initial_path(c1: &Curve, c2: &Curve, steps: usize) -> Result<CurvePath> {
    let d = c1.dim();
    let feasible = |p: &CurvePath| {
        p.curves.windows(2).all(|w| Speeds::of(&segment_midpoint(w[0].coords(), w[1].coords()).0, d).is_some())
            && p.curves.iter().all(|c| Speeds::of(c.coords(), d).is_some())
    };
    if let Ok(path) = CurvePath::linear(c1, c2, steps) {
        if feasible(&path) {
            return Ok(path);
        }
    }
    let waypoint = circle_waypoint(c1, c2)?;
    let first = (steps / 2).max(1);
    let mut curves = CurvePath::linear(c1, &waypoint, first)?.curves;
    curves.pop();
    curves.extend(CurvePath::linear(&waypoint, c2, (steps - first).max(1))?.curves);
    let path = CurvePath::new(curves)?;
    if !feasible(&path) {
        return Err(Error::Degenerate("no immersed initial path found"));
    }
    Ok(path)
}

fn circle_waypoint(c1: &Curve, c2: &Curve) -> Result<Curve> {
    let d = c1.dim();
    if d < 2 {
        return Err(Error::Degenerate("no circle waypoint in one dimension"));
    }
    let center: Vec<f64> = c1.centroid().iter().zip(c2.centroid()).map(|(a, b)| 0.5 * (a + b)).collect();
    let radius = |c: &Curve| {
        let cc = c.centroid();
        (0..c.len()).map(|i| norm(&c.point(i).iter().zip(&cc).map(|(x, y)| x - y).collect::<Vec<_>>())).sum::<f64>() / c.len() as f64
    };
    let r = 0.5 * (radius(c1) + radius(c2));
    if !(r > 0.0) {
        return Err(Error::Degenerate("waypoint radius vanishes"));
    }
    Curve::from_fn(c1.len(), d, |t| {
        let mut p = center.clone();
        p[0] += r * t.cos();
        p[1] += r * t.sin();
        p
    })
}

/// Upper bound on the inner geodesic distance by path-energy minimization.
pub fn inner_distance(m: &InnerMetric, c1: &Curve, c2: &Curve, opts: &PathOptions) -> Result<DistanceReport> {
    opts.validate()?;
    c1.check_compatible(c2)?;
    if c1.dim() != m.config().d {
        return Err(Error::DimensionMismatch { left: m.config().d, right: c1.dim() });
    }
    Speeds::of_curve(c1)?;
    Speeds::of_curve(c2)?;
    let init = initial_path(c1, c2, opts.steps)?;
    inner_distance_from(m, init, opts)
}

/// Continues the energy minimization from a given path (warm start).
pub fn inner_distance_from(m: &InnerMetric, init: CurvePath, opts: &PathOptions) -> Result<DistanceReport> {
    opts.validate()?;
    let c1 = &init.curves[0];
    let c2 = init.curves.last().expect("non-empty path");
    let d = c1.dim();
    let initial = inner_path_energy(m, &init)?;
    let avg = (inner_gram(m, c1)? + inner_gram(m, c2)?) * 0.5;
    let factor = Cholesky::new(avg).ok_or(Error::Eigen("inner Gram not positive definite"))?;
    let spatial = |g: &[f64]| factor.solve(&DVector::from_column_slice(g)).as_slice().to_vec();
    let segments = InnerSegments { coeffs: m.coefficients(), d };
    let nodes: Vec<Vec<f64>> = init.curves.iter().map(|c| c.coords().to_vec()).collect();
    let relaxed = relax(&segments, nodes, &spatial, opts).ok_or(Error::Immersion { index: 0 })?;
    let optimized = relaxed
        .nodes
        .iter()
        .map(|x| Curve::new(d, x.clone()))
        .collect::<Result<Vec<_>>>()
        .and_then(CurvePath::new)
        .and_then(|p| inner_path_energy(m, &p).map(|e| (p, e)));
    let (value, path, path_length) = match optimized {
        Ok((p, e)) if e.length <= initial.length => (e.length, p, e.length),
        Ok((_, e)) => (initial.length, init, e.length),
        Err(_) => (initial.length, init, initial.length),
    };
    Ok(DistanceReport {
        value,
        energy_trace: relaxed.trace,
        converged: relaxed.converged,
        path: Some(PathRecord::Curves { curves: path.curves }),
        config_snapshot: m.config().clone(),
        options: *opts,
        diagnostics: Diagnostics {
            iterations: relaxed.iterations,
            gradient_norm: relaxed.grad_norm,
            initial_length: initial.length,
            path_length,
            endpoint_mismatch: 0.0,
            mismatch_correction: 0.0,
            breakdown: relaxed.breakdown,
            max_jitter: 0.0,
        },
    })
}

/// Extreme generalized eigenvalues of the inner Gram against the flat
/// `H^n(dθ)` Gram: `lower ‖u‖²_{H^n} ≤ G^I_c(u, u) ≤ upper ‖u‖²_{H^n}`.
pub fn norm_equivalence_probe(m: &InnerMetric, c: &Curve) -> Result<(f64, f64)> {
    let gram = inner_gram(m, c)?;
    let (lo, hi) = bounds_against_circle_gram(&gram, c.len(), c.dim(), m.order() as f64)?;
    if !(lo > 0.0) {
        return Err(Error::Eigen("inner Gram is not positive definite"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn metric(a: Vec<f64>) -> InnerMetric {
        InnerMetric::new(MetricConfig::new(2, a, 3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        // the central speed of a sampled circle is r·sin(h)/h, an O(h²) error
        let n = 512;
        let unit = Curve::circle(n, 1.0, [0.0, 0.0]).unwrap();
        let constant = TangentField::from_fn(n, 2, |_| vec![1.0, 0.0]).unwrap();
        let g = inner_eval(&m, &unit, &constant, &constant).unwrap();
        assert!((g - 2.0 * PI).abs() < 1e-3);

        let tangent = TangentField::from_fn(n, 2, |t| vec![-t.sin(), t.cos()]).unwrap();
        let g = inner_eval(&m, &unit, &tangent, &tangent).unwrap();
        assert!((g - 4.0 * PI).abs() < 1e-2);

        let big = Curve::circle(n, 2.0, [0.0, 0.0]).unwrap();
        let g = inner_eval(&m, &big, &constant, &constant).unwrap();
        assert!((g - 4.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn gram_matches_eval() {
        let m = metric(vec![1.0, 0.5, 2.0]);
        let c = Curve::from_fn(24, 2, |t| vec![(1.0 + 0.2 * (3.0 * t).cos()) * t.cos(), 0.7 * t.sin()]).unwrap();
        let gram = inner_gram(&m, &c).unwrap();
        for seed in 0..10 {
            let u = TangentField::from_fn(24, 2, |t| vec![(t * (seed + 1) as f64).sin(), (2.0 * t + seed as f64).cos()]).unwrap();
            let v = TangentField::from_fn(24, 2, |t| vec![(t + seed as f64).cos() * 0.3, 1.0 + t.sin()]).unwrap();
            let direct = inner_eval(&m, &c, &u, &v).unwrap();
            let assembled = (DVector::from_column_slice(u.values()).transpose() * &gram * DVector::from_column_slice(v.values()))[(0, 0)];
            assert!((direct - assembled).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_leading_coefficient_rejected() {
        assert!(MetricConfig::new(2, vec![1.0, 0.0, 0.0], 3.0, 1.0).is_err());
    }

    #[test]
    fn gram_spectrum_bounded_below() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c = Curve::circle(64, 1.0, [0.0, 0.0]).unwrap();
        let gram = inner_gram(&m, &c).unwrap();
        let (lo, _) = crate::linalg::eigen_bounds(gram).unwrap();
        let ds = arc_element(&c).unwrap();
        let floor = ds.iter().cloned().fold(f64::INFINITY, f64::min) * c.spacing();
        assert!(lo >= floor - 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = metric(vec![1.0, 0.3, 0.7]);
        let n = 12;
        let coords: Vec<f64> = (0..n)
            .flat_map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![(1.0 + 0.3 * (2.0 * t).sin()) * t.cos(), (1.0 + 0.1 * t.cos()) * t.sin()]
            })
            .collect();
        let u: Vec<f64> = (0..2 * n).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.1).collect();
        let sp = Speeds::of(&coords, 2).unwrap();
        let (g, gu, gc) = sp.quadratic_with_gradients(&coords, m.coefficients(), &u);
        assert!((g - sp.bilinear(m.coefficients(), &u, &u)).abs() < 1e-12 * g);
        let eps = 1e-6;
        for k in 0..2 * n {
            let mut up = u.clone();
            up[k] += eps;
            let mut um = u.clone();
            um[k] -= eps;
            let fd = (sp.bilinear(m.coefficients(), &up, &up) - sp.bilinear(m.coefficients(), &um, &um)) / (2.0 * eps);
            assert!((fd - gu[k]).abs() < 1e-6 * g.max(1.0), "u[{k}]: {fd} vs {}", gu[k]);
            let mut cp = coords.clone();
            cp[k] += eps;
            let mut cm = coords.clone();
            cm[k] -= eps;
            let gp = Speeds::of(&cp, 2).unwrap().bilinear(m.coefficients(), &u, &u);
            let gm = Speeds::of(&cm, 2).unwrap().bilinear(m.coefficients(), &u, &u);
            let fd = (gp - gm) / (2.0 * eps);
            assert!((fd - gc[k]).abs() < 1e-5 * g.max(1.0), "c[{k}]: {fd} vs {}", gc[k]);
        }
    }

    #[test]
    fn path_energy_examples() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c = Curve::ellipse(64, 1.5, 1.0).unwrap();
        let still = CurvePath::new(vec![c.clone(); 5]).unwrap();
        let e = inner_path_energy(&m, &still).unwrap();
        assert_eq!(e.energy, 0.0);

        let w = [0.3, -0.4];
        let moved = c.translated(&w).unwrap();
        let path = CurvePath::linear(&c, &moved, 8).unwrap();
        let e = inner_path_energy(&m, &path).unwrap();
        let oracle = 0.25 * c.length().unwrap();
        assert!((e.energy - oracle).abs() < 1e-3);
    }

    #[test]
    fn concentric_radial_path_energy() {
        // reduced oracle: E = ∫_1^2 2π (r + r^{-3}) dr for r(t) = 1 + t
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c1 = Curve::circle(128, 1.0, [0.0, 0.0]).unwrap();
        let c2 = Curve::circle(128, 2.0, [0.0, 0.0]).unwrap();
        let path = CurvePath::linear(&c1, &c2, 16).unwrap();
        let e = inner_path_energy(&m, &path).unwrap();
        let oracle = simpson(|r| 2.0 * PI * (r + r.powi(-3)), 1.0, 2.0, 2000);
        assert!(((e.energy - oracle) / oracle).abs() < 1e-2, "{} vs {oracle}", e.energy);
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn preconditioner_inverts_fixed_metric_hessian() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c = Curve::circle(16, 1.0, [0.0, 0.0]).unwrap();
        let steps = 5;
        let gram = inner_gram(&m, &c).unwrap();
        let factor = Cholesky::new(gram.clone()).unwrap();
        let spatial = |g: &[f64]| factor.solve(&DVector::from_column_slice(g)).as_slice().to_vec();
        let size = 32;
        let x: Vec<f64> = (0..(steps - 1) * size).map(|k| ((k * 13 % 17) as f64 - 8.0) * 0.01).collect();
        // Hessian 2T (L ⊗ M)
        let mut hx = vec![0.0; x.len()];
        for i in 0..steps - 1 {
            for (j, w) in [(i as isize - 1, -1.0), (i as isize, 2.0), (i as isize + 1, -1.0)] {
                if j < 0 || j as usize >= steps - 1 {
                    continue;
                }
                let block = DVector::from_column_slice(&x[j as usize * size..(j as usize + 1) * size]);
                let mv = &gram * block;
                for k in 0..size {
                    hx[i * size + k] += 2.0 * steps as f64 * w * mv[k];
                }
            }
        }
        let back = crate::path::time_kronecker(steps, &hx, &spatial);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn equivalence_probe_examples() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c = Curve::circle(32, 1.0, [0.0, 0.0]).unwrap();
        let (lo, hi) = norm_equivalence_probe(&m, &c).unwrap();
        assert!(lo > 0.0 && hi / lo < 50.0, "{lo} {hi}");

        let m4 = metric(vec![4.0, 0.0, 4.0]);
        let (lo4, hi4) = norm_equivalence_probe(&m4, &c).unwrap();
        assert!((lo4 / lo - 4.0).abs() < 1e-10 && (hi4 / hi - 4.0).abs() < 1e-10);
        assert!(((hi4 / lo4) - (hi / lo)).abs() < 1e-10 * (hi / lo));

        let ellipse = Curve::ellipse(32, 1.4, 0.8).unwrap();
        let (a, b) = norm_equivalence_probe(&m, &ellipse).unwrap();
        let (a2, b2) = norm_equivalence_probe(&m, &ellipse.cyclic_shift(5)).unwrap();
        assert!((a - a2).abs() < 1e-9 * a && (b - b2).abs() < 1e-9 * b);
    }

    #[test]
    fn distance_translation_and_symmetry() {
        let m = metric(vec![1.0, 0.0, 1.0]);
        let c1 = Curve::ellipse(32, 1.2, 0.9).unwrap();
        let w = [0.2, 0.1];
        let c2 = c1.translated(&w).unwrap();
        let opts = PathOptions { steps: 6, ..Default::default() };
        let r = inner_distance(&m, &c1, &c2, &opts).unwrap();
        let bound = (w[0] * w[0] + w[1] * w[1]).sqrt() * c1.length().unwrap().sqrt();
        assert!(r.value <= bound + 1e-3, "{} > {bound}", r.value);
        assert!(r.energy_trace.windows(2).all(|e| e[1] <= e[0] + 1e-12));

        let big = Curve::circle(32, 1.2, [0.0, 0.0]).unwrap();
        let unit = Curve::circle(32, 1.0, [0.0, 0.0]).unwrap();
        let there = inner_distance(&m, &unit, &big, &opts).unwrap();
        let back = inner_distance(&m, &big, &unit, &opts).unwrap();
        assert!(there.converged && back.converged);
        assert!((there.value - back.value).abs() < 1e-6 * there.value, "{} {}", there.value, back.value);
        assert!(there.value <= there.diagnostics.initial_length + 1e-12);
    }
}
