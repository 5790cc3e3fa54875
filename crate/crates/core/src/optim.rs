//! Preconditioned limited-memory BFGS with Armijo backtracking.
//!
//! The objective returns `None` for infeasible points (for example a
//! collapsed curve); the line search treats those like a failed Armijo test
//! and backtracks.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    /// Converged once the preconditioned gradient norm `sqrt(gᵀ P g)` drops
    /// below this. With `P` close to the inverse Hessian this is the Newton
    /// decrement, so the tolerance carries the units of the objective's root.
    pub tol: f64,
    pub max_iters: usize,
    pub memory: usize,
    /// Halvings allowed per line search before declaring breakdown.
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { tol: 1e-8, max_iters: 500, memory: 12, max_backtracks: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Preconditioned gradient norm at `x`.
    pub grad_norm: f64,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The line search failed even along the preconditioned gradient.
    pub breakdown: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `objective` from `x0`. `precond` applies an approximation of the
/// inverse Hessian (symmetric positive definite) to a gradient.
///
/// Returns `None` when the objective is infeasible at `x0`.
pub fn minimize<F, P>(mut objective: F, precond: P, x0: Vec<f64>, opts: &LbfgsOptions) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let (mut value, mut grad) = objective(&x0)?;
    let mut x = x0;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut trace = vec![value];
    let mut iterations = 0;
    let mut breakdown = false;

    let decrement = |g: &[f64]| dot(g, &precond(g)).max(0.0).sqrt();
    let mut grad_norm = decrement(&grad);
    while iterations < opts.max_iters {
        if grad_norm < opts.tol {
            break;
        }
        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if history.is_empty() {
                    break;
                }
                history.clear();
            }
            let mut direction = two_loop(&grad, &history, &precond);
            let mut slope = dot(&grad, &direction);
            if !(slope < 0.0) {
                history.clear();
                direction = precond(&grad);
                direction.iter_mut().for_each(|v| *v = -*v);
                slope = dot(&grad, &direction);
                if !(slope < 0.0) {
                    break;
                }
            }
            let mut step = 1.0;
            for _ in 0..opts.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, b)| a + step * b).collect();
                if let Some((v, g)) = objective(&trial) {
                    if v.is_finite() && v <= value + 1e-4 * step * slope {
                        accepted = Some((trial, v, g));
                        break;
                    }
                }
                step *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((x_new, v_new, g_new)) = accepted else {
            breakdown = true;
            break;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        value = v_new;
        grad = g_new;
        grad_norm = decrement(&grad);
        trace.push(value);
        iterations += 1;
    }
    Some(Minimum { x, value, grad_norm, trace, iterations, converged: grad_norm < opts.tol, breakdown })
}

fn two_loop<P: Fn(&[f64]) -> Vec<f64>>(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, precond: &P) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let alpha = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(a, b)| *a -= alpha * b);
        alphas.push(alpha);
    }
    let mut r = precond(&q);
    if let Some((s, y, _)) = history.back() {
        let py = precond(y);
        let gamma = dot(s, y) / dot(y, &py);
        if gamma.is_finite() && gamma > 0.0 {
            r.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), alpha) in history.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(a, b)| *a += (alpha - beta) * b);
    }
    r.iter_mut().for_each(|v| *v = -*v);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Some((f, g))
    }

    #[test]
    fn solves_rosenbrock() {
        let opts = LbfgsOptions { tol: 1e-10, max_iters: 1000, ..Default::default() };
        let m = minimize(rosenbrock, |g: &[f64]| g.to_vec(), vec![-1.2, 1.0], &opts).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let diag = [1.0, 1e4, 1e-3];
        let f = |x: &[f64]| {
            let v = x.iter().zip(&diag).map(|(a, d)| 0.5 * d * a * a).sum();
            Some((v, x.iter().zip(&diag).map(|(a, d)| d * a).collect()))
        };
        let p = |g: &[f64]| g.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let m = minimize(f, p, vec![1.0, 1.0, 1.0], &LbfgsOptions::default()).unwrap();
        assert!(m.converged);
        assert_eq!(m.iterations, 1);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        // minimum of (x-2)^2 lies outside the feasible set x < 1.5
        let f = |x: &[f64]| if x[0] < 1.5 { Some(((x[0] - 2.0).powi(2), vec![2.0 * (x[0] - 2.0)])) } else { None };
        let opts = LbfgsOptions { tol: 1e-12, max_iters: 200, ..Default::default() };
        let m = minimize(f, |g: &[f64]| g.to_vec(), vec![0.0], &opts).unwrap();
        assert!(!m.converged);
        assert!(m.x[0] < 1.5 && m.x[0] > 1.4);
        assert!(minimize(f, |g: &[f64]| g.to_vec(), vec![3.0], &opts).is_none());
    }
}
