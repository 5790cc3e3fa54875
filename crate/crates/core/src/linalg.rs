//! Dense helpers: flat Sobolev Grams on the circle and symmetric
//! generalized eigenvalue bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fourier::wavenumber;

/// Power `H^p` of the scalar `N × N` Gram of the flat `H^order(S^1, dθ)` norm,
/// `uᵀ H u = 2π Σ_m (1 + m²)^order |û_m|²`.
///
/// `H` is circulant with eigenvalues `σ_m = (2π/N)(1 + m²)^order`, so
/// `H^p[j, k] = (1/N) Σ_m σ_m^p cos(m (θ_j − θ_k))`.
pub fn circle_sobolev_gram_power(n: usize, order: f64, power: f64) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let symbol: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let m = wavenumber(j, n) as f64;
            (m, (h * (1.0 + m * m).powf(order)).powf(power))
        })
        .collect();
    let column: Vec<f64> = (0..n)
        .map(|lag| symbol.iter().map(|(m, s)| s * (m * h * lag as f64).cos()).sum::<f64>() / n as f64)
        .collect();
    DMatrix::from_fn(n, n, |j, k| column[(j + n - k) % n])
}

/// Kronecker product `m ⊗ I_d` in the point-major layout.
pub fn blocked(m: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows() * d, m.ncols() * d, |r, c| if r % d == c % d { m[(r / d, c / d)] } else { 0.0 })
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn eigen_bounds(m: DMatrix<f64>) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(Error::Eigen("symmetric eigensolver did not converge"))?;
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Eigen("non-finite eigenvalue"));
    }
    Ok((lo, hi))
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn sorted_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(Error::Eigen("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Generalized eigenvalue bounds of the pencil `(m, H)` with `H` the blocked
/// flat `H^order` Gram: extremes of `H^{−1/2} m H^{−1/2}`.
pub fn bounds_against_circle_gram(m: &DMatrix<f64>, n: usize, d: usize, order: f64) -> Result<(f64, f64)> {
    let half_inv = blocked(&circle_sobolev_gram_power(n, order, -0.5), d);
    let pencil = &half_inv * m * &half_inv;
    eigen_bounds(symmetrize(pencil))
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
