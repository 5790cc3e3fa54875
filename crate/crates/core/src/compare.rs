//! Seeded experiments comparing the inner and outer distances with each
//! other and with flat Sobolev norms of the displacement.
//!
//! Perturbations are smooth functions of the parameter `θ`, so the same seed
//! describes the same continuum curves at every sample count; this is what
//! makes refinement in `N` meaningful.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::curve::{sobolev_norm_circle, Curve, TangentField};
use crate::error::{Error, Result};
use crate::fourier;
use crate::inner::{inner_distance, InnerMetric};
use crate::outer::{outer_distance, outer_distance_lower_bound};
use crate::report::PathOptions;

/// Highest Fourier mode of a random perturbation.
const MAX_MODE: usize = 5;

/// Candidates drawn per accepted sample before giving up (10% acceptance).
const ATTEMPTS_PER_SAMPLE: usize = 10;

/// Relative change of a ratio under tolerance halving that flags a pair.
pub const REFINEMENT_FLAG: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationFamily {
    /// Random low-mode Fourier displacement of every coordinate.
    FourierRandom,
    /// Rigid translation by a random vector.
    Translation,
    /// Random low-mode displacement along the normal (planar part).
    Bending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub base: Curve,
    /// Outer ball radius `R` around the base.
    pub radius: f64,
    pub sample_count: usize,
    pub family: PerturbationFamily,
    /// Scale of the random displacements.
    pub amplitude: f64,
    pub metric: MetricConfig,
    pub seed: u64,
    #[serde(default)]
    pub options: PathOptions,
}

impl ExperimentSpec {
    /// Default experiment on the unit circle with `n` samples.
    pub fn unit_circle(n: usize) -> Result<Self> {
        Ok(ExperimentSpec {
            base: Curve::circle(n, 1.0, [0.0, 0.0])?,
            radius: 0.5,
            sample_count: 21,
            family: PerturbationFamily::FourierRandom,
            amplitude: 1e-2,
            metric: MetricConfig::default(),
            seed: 7,
            options: PathOptions::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.metric.validate_comparison()?;
        self.options.validate()?;
        if self.base.dim() != self.metric.d {
            return Err(Error::DimensionMismatch { left: self.metric.d, right: self.base.dim() });
        }
        if self.sample_count < 5 {
            return Err(Error::Experiment(format!("sample count must be at least 5, got {}", self.sample_count)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Experiment(format!("ball radius must be positive, got {}", self.radius)));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Experiment(format!("amplitude must be nonnegative, got {}", self.amplitude)));
        }
        if self.family == PerturbationFamily::Bending && self.base.dim() < 2 {
            return Err(Error::Experiment("bending needs at least two dimensions".into()));
        }
        Ok(())
    }

    /// Same experiment with the base trigonometrically resampled to `n`.
    pub fn with_samples(&self, n: usize) -> Result<Self> {
        Ok(ExperimentSpec { base: trig_resample(&self.base, n)?, ..self.clone() })
    }
}

/// Band-limited resampling: evaluates the trigonometric interpolant of the
/// samples at `n` uniform parameters. Exact for circles and ellipses.
pub fn trig_resample(curve: &Curve, n: usize) -> Result<Curve> {
    let (m, d) = (curve.len(), curve.dim());
    let spectra: Vec<_> = (0..d).map(|a| fourier::forward(&(0..m).map(|i| curve.point(i)[a]).collect::<Vec<_>>())).collect();
    let nyquist = m / 2;
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        for spec in &spectra {
            let mut v = 0.0;
            for (j, c) in spec.iter().enumerate() {
                let k = fourier::wavenumber(j, m);
                // split the unpaired Nyquist bin evenly between ±m/2
                let w = if m % 2 == 0 && k.unsigned_abs() as usize == nyquist { 0.5 } else { 1.0 };
                let ang = k as f64 * theta;
                v += w * (c.re * ang.cos() - c.im * ang.sin());
                if w == 0.5 {
                    v += w * (c.re * ang.cos() + c.im * ang.sin());
                }
            }
            coords.push(v);
        }
    }
    Curve::new(d, coords)
}

/// Coefficients of one random perturbation, independent of `N`.
#[derive(Debug, Clone, PartialEq)]
struct Draw {
    /// `[mode][coordinate] -> (cos, sin)` for Fourier and bending draws; a
    /// single vector for translations.
    modes: Vec<Vec<(f64, f64)>>,
    shift: Vec<f64>,
}

fn draw(rng: &mut ChaCha8Rng, family: PerturbationFamily, d: usize) -> Draw {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    match family {
        PerturbationFamily::Translation => Draw { modes: Vec::new(), shift: (0..d).map(|_| normal()).collect() },
        PerturbationFamily::FourierRandom => Draw {
            modes: (1..=MAX_MODE).map(|m| (0..d).map(|_| (normal() / (m * m) as f64, normal() / (m * m) as f64)).collect()).collect(),
            shift: Vec::new(),
        },
        PerturbationFamily::Bending => Draw {
            modes: (2..=MAX_MODE).map(|m| vec![(normal() / (m * m) as f64, normal() / (m * m) as f64)]).collect(),
            shift: Vec::new(),
        },
    }
}

/// Unit normal of a planar curve by central differences, in the first two
/// coordinates.
fn planar_normals(base: &Curve) -> Vec<[f64; 2]> {
    let n = base.len();
    (0..n)
        .map(|i| {
            let a = base.point((i + n - 1) % n);
            let b = base.point((i + 1) % n);
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            [ty / len, -tx / len]
        })
        .collect()
}

fn displacement(base: &Curve, family: PerturbationFamily, draw: &Draw, amplitude: f64) -> TangentField {
    let (n, d) = (base.len(), base.dim());
    let theta = |i: usize| 2.0 * PI * i as f64 / n as f64;
    let mut values = vec![0.0; n * d];
    match family {
        PerturbationFamily::Translation => {
            for i in 0..n {
                for a in 0..d {
                    values[i * d + a] = amplitude * draw.shift[a];
                }
            }
        }
        PerturbationFamily::FourierRandom => {
            for i in 0..n {
                for (m, coeffs) in draw.modes.iter().enumerate() {
                    let ang = (m + 1) as f64 * theta(i);
                    for (a, (c, s)) in coeffs.iter().enumerate() {
                        values[i * d + a] += amplitude * (c * ang.cos() + s * ang.sin());
                    }
                }
            }
        }
        PerturbationFamily::Bending => {
            let normals = planar_normals(base);
            for i in 0..n {
                let g: f64 = draw.modes.iter().enumerate().map(|(m, c)| {
                    let ang = (m + 2) as f64 * theta(i);
                    c[0].0 * ang.cos() + c[0].1 * ang.sin()
                }).sum();
                values[i * d] = amplitude * g * normals[i][0];
                values[i * d + 1] = amplitude * g * normals[i][1];
            }
        }
    }
    TangentField::new(d, values).expect("finite displacement")
}

/// Curves accepted into the outer ball, with their distances to the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSample {
    pub curves: Vec<Curve>,
    /// Outer distance upper bound from the base to each curve.
    pub distances: Vec<f64>,
    pub attempted: usize,
    pub acceptance_rate: f64,
}

/// Draws perturbed curves and keeps those within outer distance `R` of the
/// base. Candidates are drawn in fixed-size batches from one seeded stream
/// and accepted in draw order, so the result does not depend on the number
/// of worker threads.
pub fn sample_ball(spec: &ExperimentSpec) -> Result<BallSample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let kernel = spec.metric.kernel()?;
    let base = &spec.base;
    let want = spec.sample_count;
    let mut curves = Vec::with_capacity(want);
    let mut distances = Vec::with_capacity(want);
    let mut attempted = 0;
    while curves.len() < want && attempted < ATTEMPTS_PER_SAMPLE * want {
        let batch: Vec<Draw> = (0..want).map(|_| draw(&mut rng, spec.family, base.dim())).collect();
        let results: Vec<Option<(Curve, f64)>> = batch
            .par_iter()
            .map(|dr| {
                let c = base.displaced(&displacement(base, spec.family, dr, spec.amplitude), 1.0).ok()?;
                if outer_distance_lower_bound(&kernel, base, &c).ok()? > spec.radius {
                    return None;
                }
                let dist = outer_distance(&spec.metric, base, &c, &spec.options).ok()?.value;
                (dist <= spec.radius).then_some((c, dist))
            })
            .collect();
        for r in results {
            attempted += 1;
            if let Some((c, dist)) = r {
                curves.push(c);
                distances.push(dist);
                if curves.len() == want {
                    break;
                }
            }
        }
    }
    let acceptance_rate = curves.len() as f64 / attempted as f64;
    if curves.len() < want {
        return Err(Error::Experiment(format!(
            "acceptance rate {:.1}% is below 10% ({} of {attempted} candidates in the ball); use a smaller perturbation amplitude",
            100.0 * acceptance_rate,
            curves.len()
        )));
    }
    Ok(BallSample { curves, distances, attempted, acceptance_rate })
}

/// One compared pair of sampled curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRow {
    pub id1: usize,
    pub id2: usize,
    pub dist_inner: f64,
    pub dist_outer: f64,
    /// `‖c2 − c1‖` in `H^{s'}(dθ)`.
    pub flat_sprime: f64,
    /// `‖c2 − c1‖` in `H^n(dθ)`.
    pub flat_n: f64,
    /// `dist^I / dist^O`.
    pub ratio_io: Option<f64>,
    /// `‖c2 − c1‖_{H^{s'}} / dist^O`.
    pub ratio_flat_outer: Option<f64>,
    /// `dist^O / ‖c2 − c1‖_{H^{s'}}`.
    pub ratio_outer_flat: Option<f64>,
    /// `dist^I / dist^O` rerun with the gradient tolerance halved.
    pub refined_ratio_io: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Why the pair is left out of the maxima, if it is.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonDiagnostics {
    pub attempted: usize,
    pub acceptance_rate: f64,
    pub identical: usize,
    pub unconverged: usize,
    /// Pairs whose ratio moved more than 20% under tolerance halving.
    pub unstable: usize,
    pub total_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonReport {
    pub pairs: Vec<PairRow>,
    pub max_ratio_io: f64,
    pub max_ratio_flat_outer: f64,
    pub max_ratio_outer_flat: f64,
    /// Extremal `dist^O / ‖Δ‖_{H^{s'}}` over the retained pairs.
    pub bilipschitz_bounds: (f64, f64),
    pub diagnostics: ComparisonDiagnostics,
}

impl ComparisonReport {
    /// Pairs dropped for non-convergence or refinement instability.
    pub fn flagged(&self) -> usize {
        self.diagnostics.unconverged + self.diagnostics.unstable
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("id1,id2,dist_inner,dist_outer,flat_sprime,flat_n,ratio_io,ratio_flat_outer,ratio_outer_flat,refined_ratio_io,converged,iterations,excluded\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.id1,
                p.id2,
                p.dist_inner,
                p.dist_outer,
                p.flat_sprime,
                p.flat_n,
                opt(p.ratio_io),
                opt(p.ratio_flat_outer),
                opt(p.ratio_outer_flat),
                opt(p.refined_ratio_io),
                p.converged,
                p.iterations,
                p.excluded.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn compare_pair(spec: &ExperimentSpec, metric: &InnerMetric, id1: usize, id2: usize, c1: &Curve, c2: &Curve) -> Result<PairRow> {
    let diff = TangentField::between(c1, c2)?;
    let flat_sprime = sobolev_norm_circle(&diff, spec.metric.s_prime())?;
    let flat_n = sobolev_norm_circle(&diff, spec.metric.n as f64)?;
    let di = inner_distance(metric, c1, c2, &spec.options)?;
    let dout = outer_distance(&spec.metric, c1, c2, &spec.options)?;
    let converged = di.converged && dout.converged;
    let iterations = di.diagnostics.iterations + dout.diagnostics.iterations;
    let mut row = PairRow {
        id1,
        id2,
        dist_inner: di.value,
        dist_outer: dout.value,
        flat_sprime,
        flat_n,
        ratio_io: None,
        ratio_flat_outer: None,
        ratio_outer_flat: None,
        refined_ratio_io: None,
        converged,
        iterations,
        excluded: None,
    };
    if !(dout.value > 0.0 && flat_sprime > 0.0) {
        row.excluded = Some("identical".into());
        return Ok(row);
    }
    row.ratio_io = Some(di.value / dout.value);
    row.ratio_flat_outer = Some(flat_sprime / dout.value);
    row.ratio_outer_flat = Some(dout.value / flat_sprime);
    if !converged {
        row.excluded = Some("unconverged".into());
        return Ok(row);
    }
    let tight = spec.options.tightened();
    let ri = inner_distance(metric, c1, c2, &tight)?;
    let ro = outer_distance(&spec.metric, c1, c2, &tight)?;
    row.iterations += ri.diagnostics.iterations + ro.diagnostics.iterations;
    let refined = ri.value / ro.value;
    row.refined_ratio_io = Some(refined);
    let base = row.ratio_io.expect("set above");
    if !refined.is_finite() || (refined - base).abs() > REFINEMENT_FLAG * base {
        row.excluded = Some("unstable under refinement".into());
    }
    Ok(row)
}

/// Compares consecutive ball samples `(c_i, c_{i+1})`.
pub fn run_comparison(spec: &ExperimentSpec) -> Result<ComparisonReport> {
    let ball = sample_ball(spec)?;
    let metric = InnerMetric::new(spec.metric.clone())?;
    let pairs: Vec<PairRow> = (0..ball.curves.len() - 1)
        .into_par_iter()
        .map(|i| compare_pair(spec, &metric, i + 1, i + 2, &ball.curves[i], &ball.curves[i + 1]))
        .collect::<Result<_>>()?;
    let count = |reason: &str| pairs.iter().filter(|p| p.excluded.as_deref() == Some(reason)).count();
    let diagnostics = ComparisonDiagnostics {
        attempted: ball.attempted,
        acceptance_rate: ball.acceptance_rate,
        identical: count("identical"),
        unconverged: count("unconverged"),
        unstable: count("unstable under refinement"),
        total_iterations: pairs.iter().map(|p| p.iterations).sum(),
    };
    let kept: Vec<&PairRow> = pairs.iter().filter(|p| p.excluded.is_none()).collect();
    if kept.is_empty() {
        return Err(Error::Experiment("no distinct pairs to compare".into()));
    }
    let max = |f: fn(&PairRow) -> Option<f64>| kept.iter().filter_map(|p| f(p)).fold(f64::NEG_INFINITY, f64::max);
    let min = |f: fn(&PairRow) -> Option<f64>| kept.iter().filter_map(|p| f(p)).fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport {
        max_ratio_io: max(|p| p.ratio_io),
        max_ratio_flat_outer: max(|p| p.ratio_flat_outer),
        max_ratio_outer_flat: max(|p| p.ratio_outer_flat),
        bilipschitz_bounds: (min(|p| p.ratio_outer_flat), max(|p| p.ratio_outer_flat)),
        pairs,
        diagnostics,
    })
}

/// Extremal `dist^O / ‖c2 − c1‖_{H^{s'}}` over the sampled pairs.
pub fn bilipschitz_probe(spec: &ExperimentSpec) -> Result<(f64, f64)> {
    Ok(run_comparison(spec)?.bilipschitz_bounds)
}
