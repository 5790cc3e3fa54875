//! Discrete Fourier helpers with one pinned convention: the forward
//! transform carries the `1/N` factor, `f̂_m = (1/N) Σ_j f_j e^{−2πi jm/N}`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed wavenumber of FFT bin `j` on `n` points, in `[−n/2, n/2)`.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Normalized forward transform of a real sequence.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let n = buf.len();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Forward/inverse transform of a multi-dimensional array stored row-major
/// with `shape[0]` the slowest axis. `inverse` undoes the normalized forward
/// transform.
pub fn transform_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let block = len * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[outer + inner + k * stride];
                }
                fft.process(&mut line);
                for (k, value) in line.iter().enumerate() {
                    data[outer + inner + k * stride] = *value;
                }
            }
        }
        stride *= len;
    }
    if !inverse {
        let scale = 1.0 / total as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}
