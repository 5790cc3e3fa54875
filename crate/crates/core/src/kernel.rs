//! Reproducing kernel of `A = (1 − Δ)^s` on `R^d` and the curve cometric.
//!
//! The kernel is the inverse Fourier transform of `(1 + |ξ|²)^{−s}` under the
//! unitary convention `F f(ξ) = (2π)^{−d/2} ∫ e^{−i⟨x,ξ⟩} f(x) dx`, i.e. the
//! Green's function of `A`:
//!
//! ```text
//! k(r) = 2^{1−s} / ((2π)^{d/2} Γ(s)) · ρ^ν K_ν(ρ),   ρ = r/λ,  ν = s − d/2,
//! k(0) = Γ(ν) / ((4π)^{d/2} Γ(s)).
//! ```
//!
//! The cometric of a sampled curve `q` is the Gram matrix
//! `B_q[iα, jβ] = k(|q_i − q_j|) δ_{αβ}`; it is stored as the scalar `N × N`
//! kernel matrix and applied coordinate-wise.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_k_pair, gamma};
use crate::curve::Curve;
use crate::error::{Error, Result};

/// Below this scaled radius the kernel profile is replaced by its limit; the
/// relative deviation is `O(ρ²)`.
const SMALL_RHO: f64 = 1e-8;

/// Relative jitter added on the diagonal when the first factorization fails.
pub const JITTER: f64 = 1e-12;

/// Residual thresholds of [`CometricGram::solve`].
pub const RESIDUAL_WARN: f64 = 1e-10;
pub const RESIDUAL_FAIL: f64 = 1e-6;

/// Radial Green's function of `(1 − Δ)^s` in `R^d` with length scale `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "KernelParams", try_from = "KernelParams")]
pub struct SobolevKernel {
    s: f64,
    d: usize,
    scale: f64,
    nu: f64,
    norm: f64,
    at_zero: f64,
    slope_at_zero: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelParams {
    s: f64,
    d: usize,
    scale: f64,
}

impl From<SobolevKernel> for KernelParams {
    fn from(k: SobolevKernel) -> Self {
        KernelParams { s: k.s, d: k.d, scale: k.scale }
    }
}

impl TryFrom<KernelParams> for SobolevKernel {
    type Error = Error;
    fn try_from(p: KernelParams) -> Result<Self> {
        SobolevKernel::new(p.s, p.d, p.scale)
    }
}

impl SobolevKernel {
    /// Requires `s > d/2` so that the kernel is bounded and continuous.
    pub fn new(s: f64, d: usize, scale: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("ambient dimension must be positive".into()));
        }
        let nu = s - d as f64 / 2.0;
        if !(nu > 0.0) || !s.is_finite() {
            return Err(Error::Config(format!("kernel order s = {s} must exceed d/2 = {}", d as f64 / 2.0)));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Config(format!("kernel scale must be positive, got {scale}")));
        }
        let half_d = d as f64 / 2.0;
        let norm = 2f64.powf(1.0 - s) / ((2.0 * PI).powf(half_d) * gamma(s));
        let at_zero = gamma(nu) / ((4.0 * PI).powf(half_d) * gamma(s));
        // lim ρ^{ν−1} K_{ν−1}(ρ) = 2^{ν−2} Γ(ν−1) for ν > 1
        let slope_at_zero = if nu > 1.0 {
            -norm / (scale * scale) * 2f64.powf(nu - 2.0) * gamma(nu - 1.0)
        } else {
            f64::NEG_INFINITY
        };
        Ok(SobolevKernel { s, d, scale, nu, norm, at_zero, slope_at_zero })
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Bessel order `ν = s − d/2`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `k(0)`, from the closed-form limit.
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    /// Whether `k` is differentiable enough for the orbit dynamics (`ν > 1`).
    pub fn is_smooth(&self) -> bool {
        self.nu > 1.0
    }

    /// Kernel value at distance `r ≥ 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let rho = r.abs() / self.scale;
        if rho < SMALL_RHO {
            return self.at_zero;
        }
        match bessel_k_pair(self.nu, rho) {
            Ok((k, _)) => self.norm * rho.powf(self.nu) * k,
            Err(_) => 0.0,
        }
    }

    /// `(k(r), k'(r)/r)`. The second entry is finite at `r = 0` only for
    /// `ν > 1`.
    pub fn eval_with_slope(&self, r: f64) -> (f64, f64) {
        let rho = r.abs() / self.scale;
        if rho < SMALL_RHO {
            return (self.at_zero, self.slope_at_zero);
        }
        // d/dρ [ρ^ν K_ν(ρ)] = −ρ^ν K_{ν−1}(ρ)
        let lower = self.nu - 1.0;
        let (k_lo, k) = if lower >= 0.0 {
            bessel_k_pair(lower, rho).unwrap_or((0.0, 0.0))
        } else {
            let (k, _) = bessel_k_pair(self.nu, rho).unwrap_or((0.0, 0.0));
            let (k_abs, _) = bessel_k_pair(-lower, rho).unwrap_or((0.0, 0.0));
            (k_abs, k)
        };
        let pow = rho.powf(self.nu);
        let value = self.norm * pow * k;
        let slope = -self.norm / (self.scale * self.scale) * (pow / rho) * k_lo;
        (value, slope)
    }
}

/// Free function form of [`SobolevKernel::eval`].
pub fn kernel_eval(k: &SobolevKernel, r: f64) -> f64 {
    k.eval(r)
}

/// Radial profile with value and `k'(r)/r`, exact or tabulated.
pub(crate) trait RadialProfile {
    fn value_slope(&self, r: f64) -> (f64, f64);
}

impl RadialProfile for SobolevKernel {
    fn value_slope(&self, r: f64) -> (f64, f64) {
        self.eval_with_slope(r)
    }
}

/// Piecewise cubic Hermite table of `k` on a uniform radial grid, for the
/// inner loops of the orbit optimizer. Values and slopes come from the same
/// interpolant, so gradients stay consistent with the objective; the
/// relative interpolation error is below `1e-12`.
#[derive(Debug, Clone)]
pub(crate) struct KernelTable {
    step: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    slope_at_zero: f64,
}

impl KernelTable {
    const NODES_PER_SCALE: f64 = 512.0;

    pub(crate) fn new(k: &SobolevKernel) -> Self {
        let step = k.scale() / Self::NODES_PER_SCALE;
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        for j in 0.. {
            let r = j as f64 * step;
            let (v, slope) = k.eval_with_slope(r);
            values.push(v);
            derivs.push(slope * r);
            if j > 0 && v < 1e-20 * k.at_zero() {
                break;
            }
        }
        KernelTable { step, values, derivs, slope_at_zero: k.eval_with_slope(0.0).1 }
    }
}

impl RadialProfile for KernelTable {
    fn value_slope(&self, r: f64) -> (f64, f64) {
        if r == 0.0 {
            return (self.values[0], self.slope_at_zero);
        }
        let x = r / self.step;
        let j = x as usize;
        if j + 1 >= self.values.len() {
            return (0.0, 0.0);
        }
        let t = x - j as f64;
        let (t2, t3) = (t * t, t * t * t);
        let (v0, v1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.derivs[j] * self.step, self.derivs[j + 1] * self.step);
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * d0 + (3.0 * t2 - 2.0 * t3) * v1 + (t3 - t2) * d1;
        let deriv = ((6.0 * t2 - 6.0 * t) * (v0 - v1) + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1) / self.step;
        (value, deriv / r)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Scalar kernel matrix `K[i, j] = k(|a_i − b_j|)` between two point sets.
pub fn cross_kernel(k: &SobolevKernel, a: &[f64], b: &[f64], d: usize) -> DMatrix<f64> {
    let na = a.len() / d;
    let nb = b.len() / d;
    DMatrix::from_fn(na, nb, |i, j| k.eval(distance(&a[i * d..(i + 1) * d], &b[j * d..(j + 1) * d])))
}

/// Symmetric scalar kernel matrix of one point set.
pub fn kernel_matrix(k: &SobolevKernel, points: &[f64], d: usize) -> DMatrix<f64> {
    let n = points.len() / d;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = k.at_zero();
        for j in 0..i {
            let v = k.eval(distance(&points[i * d..(i + 1) * d], &points[j * d..(j + 1) * d]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Applies the scalar matrix `m` to a point-major vector field: `(m ⊗ I_d) p`.
pub(crate) fn apply_blocked(m: &DMatrix<f64>, p: &[f64], d: usize) -> Vec<f64> {
    let n = m.ncols();
    let mut out = vec![0.0; m.nrows() * d];
    for j in 0..n {
        let pj = &p[j * d..(j + 1) * d];
        for i in 0..m.nrows() {
            let kij = m[(i, j)];
            for a in 0..d {
                out[i * d + a] += kij * pj[a];
            }
        }
    }
    out
}

/// Outcome of a metric solve `B p = u`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSolve {
    pub momentum: Vec<f64>,
    pub relative_residual: f64,
    /// Residual above [`RESIDUAL_WARN`]; the factorization is ill conditioned.
    pub ill_conditioned: bool,
}

/// Cometric `B_q = Tr_q A^{−1} Tr_q*` of a point set with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct CometricGram {
    d: usize,
    points: Vec<f64>,
    kernel: SobolevKernel,
    matrix: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    jitter: f64,
    curve_hash: u64,
}

impl CometricGram {
    /// Assembles and factors the Gram matrix of arbitrary points (landmarks).
    pub fn from_points(k: &SobolevKernel, points: &[f64], d: usize) -> Result<Self> {
        if d != k.dim() {
            return Err(Error::DimensionMismatch { left: k.dim(), right: d });
        }
        if points.is_empty() || points.len() % d != 0 {
            return Err(Error::ShapeMismatch { expected: d, got: points.len() });
        }
        let n = points.len() / d;
        let mut closest = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in 0..i {
                let r = distance(&points[i * d..(i + 1) * d], &points[j * d..(j + 1) * d]);
                if r < closest.0 {
                    closest = (r, j, i);
                }
            }
        }
        if closest.0 == 0.0 {
            return Err(Error::NotPositiveDefinite { i: closest.1, j: closest.2 });
        }
        let matrix = kernel_matrix(k, points, d);
        let (factor, jitter) = match Cholesky::new(matrix.clone()) {
            Some(f) => (f, 0.0),
            None => {
                let jitter = JITTER * k.at_zero();
                let shifted = &matrix + DMatrix::identity(n, n) * jitter;
                match Cholesky::new(shifted) {
                    Some(f) => (f, jitter),
                    None => return Err(Error::NotPositiveDefinite { i: closest.1, j: closest.2 }),
                }
            }
        };
        let mut hasher = DefaultHasher::new();
        d.hash(&mut hasher);
        points.iter().for_each(|x| x.to_bits().hash(&mut hasher));
        Ok(CometricGram { d, points: points.to_vec(), kernel: *k, matrix, factor, jitter, curve_hash: hasher.finish() })
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kernel(&self) -> &SobolevKernel {
        &self.kernel
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Diagonal shift applied during factorization (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Identifier of the generating point set.
    pub fn curve_hash(&self) -> u64 {
        self.curve_hash
    }

    /// Scalar `N × N` kernel matrix.
    pub fn scalar_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Full `Nd × Nd` matrix `K ⊗ I_d`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let d = self.d;
        DMatrix::from_fn(n * d, n * d, |r, c| if r % d == c % d { self.matrix[(r / d, c / d)] } else { 0.0 })
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        let expected = self.len() * self.d;
        if v.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: v.len() });
        }
        Ok(())
    }

    /// Velocity `B p` for a momentum `p`.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p)?;
        Ok(apply_blocked(&self.matrix, p, self.d))
    }

    fn solve_factored(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let d = self.d;
        let mut out = vec![0.0; n * d];
        for a in 0..d {
            let rhs = DVector::from_fn(n, |i, _| u[i * d + a]);
            let x = self.factor.solve(&rhs);
            for i in 0..n {
                out[i * d + a] = x[i];
            }
        }
        out
    }

    /// Momentum `p = B^{−1} u`, with one step of iterative refinement.
    pub fn solve(&self, u: &[f64]) -> Result<MetricSolve> {
        self.check_len(u)?;
        let scale = crate::curve::norm(u);
        if scale == 0.0 {
            return Ok(MetricSolve { momentum: vec![0.0; u.len()], relative_residual: 0.0, ill_conditioned: false });
        }
        let mut p = self.solve_factored(u);
        let residual: Vec<f64> = u.iter().zip(self.apply(&p)?).map(|(a, b)| a - b).collect();
        let correction = self.solve_factored(&residual);
        p.iter_mut().zip(correction).for_each(|(x, c)| *x += c);
        let residual = u.iter().zip(self.apply(&p)?).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / scale;
        if !(residual <= RESIDUAL_FAIL) {
            return Err(Error::SolveFailed { residual });
        }
        Ok(MetricSolve { momentum: p, relative_residual: residual, ill_conditioned: residual > RESIDUAL_WARN })
    }

    /// Metric pairing `uᵀ B^{−1} v`.
    pub fn metric_pairing(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let p = self.solve(v)?;
        Ok(u.iter().zip(&p.momentum).map(|(a, b)| a * b).sum())
    }
}

/// Gram matrix of a curve's samples.
pub fn gram(k: &SobolevKernel, curve: &Curve) -> Result<CometricGram> {
    CometricGram::from_points(k, curve.coords(), curve.dim())
}

/// Velocity `B p`.
pub fn cometric_apply(b: &CometricGram, p: &[f64]) -> Result<Vec<f64>> {
    b.apply(p)
}

/// Momentum `A_q u = B_q^{−1} u`.
pub fn metric_solve(b: &CometricGram, u: &[f64]) -> Result<MetricSolve> {
    b.solve(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_k;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normalization_and_continuity() {
        let k = SobolevKernel::new(3.0, 2, 1.0).unwrap();
        assert!(rel(k.at_zero(), 1.0 / (8.0 * PI)) < 1e-14);
        assert_eq!(k.eval(0.0) / k.at_zero(), 1.0);
        assert!(rel(k.eval(1e-6), k.at_zero()) < 1e-10);
        // frozen: 2D inverse-Fourier quadrature of (1+|ξ|²)^{-3} at radius 1
        assert!(rel(k.eval(1.0), 0.032_325_142_805_722_3) < 1e-6);
        assert!(rel(k.eval(1.0), bessel_k(2.0, 1.0).unwrap() / (16.0 * PI)) < 1e-14);
    }

    #[test]
    fn slope_matches_finite_difference() {
        for (s, d) in [(3.0, 2), (2.75, 2), (3.0, 3), (4.0, 2)] {
            let k = SobolevKernel::new(s, d, 0.7).unwrap();
            for r in [1e-4, 0.05, 0.6, 2.0, 4.5] {
                let (v, slope) = k.eval_with_slope(r);
                assert!(rel(v, k.eval(r)) < 1e-14);
                let h = 1e-6 * r.max(1e-3);
                let fd = (k.eval(r + h) - k.eval(r - h)) / (2.0 * h);
                assert!((slope * r - fd).abs() < 1e-6 * k.at_zero() / 0.7, "s {s} d {d} r {r}");
            }
            let (_, s0) = k.eval_with_slope(0.0);
            let (_, s1) = k.eval_with_slope(1e-5);
            assert!(rel(s1, s0) < 1e-3);
        }
    }

    #[test]
    fn rejects_rough_orders() {
        assert!(SobolevKernel::new(1.0, 2, 1.0).is_err());
        assert!(SobolevKernel::new(3.0, 2, 0.0).is_err());
        assert!(!SobolevKernel::new(1.8, 2, 1.0).unwrap().is_smooth());
    }

    #[test]
    fn single_point_gram() {
        let k = SobolevKernel::new(3.0, 2, 1.0).unwrap();
        let b = CometricGram::from_points(&k, &[0.3, -0.2], 2).unwrap();
        let m = b.matrix();
        assert_eq!(m, DMatrix::identity(2, 2) * k.at_zero());
        let v = b.apply(&[1.0, 2.0]).unwrap();
        assert_eq!(v, vec![k.at_zero(), 2.0 * k.at_zero()]);
        let p = b.solve(&[1.0, 0.0]).unwrap();
        assert!(rel(p.momentum[0], 8.0 * PI) < 1e-12);
    }

    #[test]
    fn far_points_decouple() {
        let k = SobolevKernel::new(3.0, 2, 0.5).unwrap();
        let b = CometricGram::from_points(&k, &[0.0, 0.0, 50.0, 0.0], 2).unwrap();
        assert!(b.scalar_matrix()[(0, 1)].abs() < 1e-12 * k.at_zero());
    }

    #[test]
    fn coincident_points_report_pair() {
        let k = SobolevKernel::new(3.0, 2, 1.0).unwrap();
        let pts = [0.0, 0.0, 1.0, 0.0, 2.0, 1.0, 1.0, 0.0];
        assert_eq!(CometricGram::from_points(&k, &pts, 2).unwrap_err(), Error::NotPositiveDefinite { i: 1, j: 3 });
    }

    #[test]
    fn solve_and_apply_shapes() {
        let k = SobolevKernel::new(3.0, 2, 1.0).unwrap();
        let c = Curve::circle(16, 1.0, [0.0, 0.0]).unwrap();
        let b = gram(&k, &c).unwrap();
        assert!(b.apply(&[1.0; 3]).is_err());
        assert!(b.solve(&[1.0; 31]).is_err());
        let zero = b.solve(&[0.0; 32]).unwrap();
        assert!(zero.momentum.iter().all(|&x| x == 0.0));
        assert_eq!(b.apply(&[0.0; 32]).unwrap(), vec![0.0; 32]);
    }

    #[test]
    fn table_matches_exact_profile() {
        for (s, d) in [(3.0, 2), (2.5, 1), (3.5, 3)] {
            let k = SobolevKernel::new(s, d, 0.7).unwrap();
            let table = KernelTable::new(&k);
            for i in 0..400 {
                let r = 0.013 + i as f64 * 0.061;
                let (v, sl) = k.eval_with_slope(r);
                let (tv, tsl) = table.value_slope(r);
                assert!((v - tv).abs() < 1e-12 * k.at_zero(), "{s} {r}: {v} {tv}");
                assert!((sl - tsl).abs() < 1e-8 * sl.abs().max(1e-3 * k.at_zero()), "{s} {r}: {sl} {tsl}");
            }
        }
    }
}
