//! Discrete path relaxation shared by both distance estimates.
//!
//! A path is a node sequence `x_0, …, x_T` with fixed endpoints and energy
//! `E = T Σ_t G_{m_t}(δ_t, δ_t)`, `m_t` the segment midpoint and `δ_t` the
//! increment. The interior nodes are relaxed by preconditioned L-BFGS with
//! the inverse Hessian of a frozen metric, `(1/2T) L_T^{−1} ⊗ S`, where
//! `L_T` is the second-difference matrix in time and `S` approximates the
//! inverse metric tensor.

use crate::optim::{minimize, LbfgsOptions};
use crate::report::PathOptions;

/// Metric along one segment: `G_m(δ, δ)` with its gradients in `δ` and `m`,
/// or `None` where the midpoint is infeasible.
pub(crate) trait SegmentMetric {
    fn segment(&self, mid: &[f64], delta: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)>;
}

pub(crate) fn segment_midpoint(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mid = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    let delta = a.iter().zip(b).map(|(x, y)| y - x).collect();
    (mid, delta)
}

/// Energy and gradient over the interior nodes `x`.
pub(crate) fn path_objective<S: SegmentMetric>(metric: &S, start: &[f64], end: &[f64], x: &[f64], steps: usize) -> Option<(f64, Vec<f64>)> {
    let size = start.len();
    let node = |j: usize| -> &[f64] {
        if j == 0 {
            start
        } else if j == steps {
            end
        } else {
            &x[(j - 1) * size..j * size]
        }
    };
    let scale = steps as f64;
    let mut energy = 0.0;
    let mut grad = vec![0.0; x.len()];
    for t in 0..steps {
        let (mid, delta) = segment_midpoint(node(t), node(t + 1));
        let (g, gd, gm) = metric.segment(&mid, &delta)?;
        energy += g * scale;
        if t >= 1 {
            let slot = &mut grad[(t - 1) * size..t * size];
            for k in 0..size {
                slot[k] += scale * (-gd[k] + 0.5 * gm[k]);
            }
        }
        if t + 1 < steps {
            let slot = &mut grad[t * size..(t + 1) * size];
            for k in 0..size {
                slot[k] += scale * (gd[k] + 0.5 * gm[k]);
            }
        }
    }
    energy.is_finite().then_some((energy, grad))
}

/// `(energy, length)` of a node sequence.
pub(crate) fn energy_and_length<S: SegmentMetric>(metric: &S, nodes: &[Vec<f64>]) -> Option<(f64, f64)> {
    let steps = nodes.len() - 1;
    let mut energy = 0.0;
    let mut length = 0.0;
    for w in nodes.windows(2) {
        let (mid, delta) = segment_midpoint(&w[0], &w[1]);
        let (g, _, _) = metric.segment(&mid, &delta)?;
        energy += g * steps as f64;
        length += g.max(0.0).sqrt();
    }
    Some((energy, length))
}

/// Applies `(1/2T) L_T^{−1} ⊗ S` to a gradient over `T − 1` interior nodes,
/// using `(L_T^{−1})_{ij} = min(i,j) (T − max(i,j)) / T`.
pub(crate) fn time_kronecker(steps: usize, g: &[f64], spatial: &dyn Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let interior = steps - 1;
    let size = g.len() / interior;
    let solved: Vec<Vec<f64>> = g.chunks(size).map(spatial).collect();
    let big_t = steps as f64;
    let mut out = vec![0.0; g.len()];
    for i in 0..interior {
        let slot = &mut out[i * size..(i + 1) * size];
        for (j, y) in solved.iter().enumerate() {
            let (lo, hi) = if i <= j { (i + 1, j + 1) } else { (j + 1, i + 1) };
            let w = (lo as f64) * (big_t - hi as f64) / big_t / (2.0 * big_t);
            for k in 0..size {
                slot[k] += w * y[k];
            }
        }
    }
    out
}

/// Inserts segment midpoints (`T → 2T`).
pub(crate) fn refine(nodes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * nodes.len() - 1);
    for w in nodes.windows(2) {
        out.push(w[0].clone());
        out.push(segment_midpoint(&w[0], &w[1]).0);
    }
    out.push(nodes.last().expect("non-empty path").clone());
    out
}

/// Straight line with `steps` segments.
pub(crate) fn linear_nodes(a: &[f64], b: &[f64], steps: usize) -> Vec<Vec<f64>> {
    (0..=steps)
        .map(|j| {
            let t = j as f64 / steps as f64;
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        })
        .collect()
}

pub(crate) struct Relaxation {
    pub nodes: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub breakdown: bool,
}

fn relax_once<S: SegmentMetric>(metric: &S, nodes: Vec<Vec<f64>>, spatial: &dyn Fn(&[f64]) -> Vec<f64>, opts: &PathOptions) -> Option<Relaxation> {
    let steps = nodes.len() - 1;
    if steps == 1 {
        let (e, _) = energy_and_length(metric, &nodes)?;
        return Some(Relaxation { nodes, trace: vec![e], iterations: 0, grad_norm: 0.0, converged: true, breakdown: false });
    }
    let (start, end) = (nodes[0].clone(), nodes[steps].clone());
    let x0: Vec<f64> = nodes[1..steps].concat();
    let lbfgs = LbfgsOptions { tol: opts.tol, max_iters: opts.max_iters, ..Default::default() };
    let m = minimize(|x| path_objective(metric, &start, &end, x, steps), |g| time_kronecker(steps, g, spatial), x0, &lbfgs)?;
    let size = start.len();
    let mut out = vec![start];
    out.extend(m.x.chunks(size).map(<[f64]>::to_vec));
    out.push(end);
    Some(Relaxation { nodes: out, trace: m.trace, iterations: m.iterations, grad_norm: m.grad_norm, converged: m.converged, breakdown: m.breakdown })
}

/// Relaxes the interior nodes, then once more on the refined grid when
/// continuation is enabled. `None` if the initial path is infeasible.
pub(crate) fn relax<S: SegmentMetric>(metric: &S, nodes: Vec<Vec<f64>>, spatial: &dyn Fn(&[f64]) -> Vec<f64>, opts: &PathOptions) -> Option<Relaxation> {
    let first = relax_once(metric, nodes, spatial, opts)?;
    if !opts.continuation {
        return Some(first);
    }
    let second = relax_once(metric, refine(&first.nodes), spatial, opts)?;
    let mut trace = first.trace;
    trace.extend(second.trace.iter().skip(1));
    Some(Relaxation { trace, iterations: first.iterations + second.iterations, ..second })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flat metric `δᵀ D δ` with a fixed diagonal `D`.
    struct Diagonal(Vec<f64>);

    impl SegmentMetric for Diagonal {
        fn segment(&self, _mid: &[f64], delta: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
            let g = delta.iter().zip(&self.0).map(|(x, d)| d * x * x).sum();
            let gd = delta.iter().zip(&self.0).map(|(x, d)| 2.0 * d * x).collect();
            Some((g, gd, vec![0.0; delta.len()]))
        }
    }

    #[test]
    fn flat_metric_relaxes_in_one_step_to_the_straight_line() {
        let diag = vec![1.0, 1e4, 1e-3];
        let metric = Diagonal(diag.clone());
        let a = vec![0.0, 1.0, -2.0];
        let b = vec![1.0, 0.0, 3.0];
        let mut nodes = linear_nodes(&a, &b, 6);
        for (j, n) in nodes.iter_mut().enumerate().take(6).skip(1) {
            n[1] += 0.1 * j as f64;
            n[2] -= 0.05;
        }
        let inv = diag.iter().map(|d| 1.0 / d).collect::<Vec<_>>();
        let spatial = move |g: &[f64]| g.iter().zip(&inv).map(|(x, d)| x * d).collect();
        let opts = PathOptions { tol: 1e-12, ..Default::default() };
        let r = relax(&metric, nodes, &spatial, &opts).unwrap();
        assert!(r.converged && r.iterations == 1);
        for (got, want) in r.nodes.iter().zip(linear_nodes(&a, &b, 6)) {
            assert!(got.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-12));
        }
        let (e, l) = energy_and_length(&metric, &r.nodes).unwrap();
        let direct: f64 = a.iter().zip(&b).zip(&diag).map(|((x, y), d)| d * (y - x) * (y - x)).sum();
        assert!((e - direct).abs() < 1e-9 * direct && (l - direct.sqrt()).abs() < 1e-9 * direct.sqrt());
    }

    #[test]
    fn refine_doubles_the_steps() {
        let nodes = linear_nodes(&[0.0], &[1.0], 3);
        let fine = refine(&nodes);
        assert_eq!(fine.len(), 7);
        assert!((fine[3][0] - 0.5).abs() < 1e-15);
    }
}
