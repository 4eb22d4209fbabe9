use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Functional, Resolution, TableKey, WeightShape};
use crate::error::{Error, Result};
use crate::monitoring::WeightSpec;
use crate::numerics::RngStream;

/// Grid indices `k` with `eps <= k/n <= 1 - eps`.
pub(crate) fn sd_weighted_window(n: usize, eps: f64) -> Result<(usize, usize)> {
    let nf = n as f64;
    let lo = ((eps * nf) - 1e-9).ceil().max(1.0) as usize;
    let hi = (((1.0 - eps) * nf) + 1e-9).floor().min(nf - 1.0) as usize;
    if lo > hi {
        return Err(Error::EmptyWindow {
            window: format!("[{eps}, {}] holds no grid point k/{n}", 1.0 - eps),
        });
    }
    Ok((lo, hi))
}

/// `max |x(t)| / sqrt(t (1 - t))` over grid points in `[eps, 1 - eps]`, taking
/// both one-sided limits `x_k` and `x_{k-1}` of the step path at `t = k/n`.
pub(crate) fn sd_weighted_max(values: &[f64], eps: f64) -> Result<f64> {
    let n = values.len() - 1;
    let (lo, hi) = sd_weighted_window(n, eps)?;
    let mut best = 0.0f64;
    for k in lo..=hi {
        let t = k as f64 / n as f64;
        let m = values[k].abs().max(values[k - 1].abs());
        best = best.max(m / (t * (1.0 - t)).sqrt());
    }
    Ok(best)
}

/// `n^{-1} sum_{k=1}^{n-1} ||x_k||^2` for row-major `(n + 1) x p` values.
pub(crate) fn cvm_sum(values: &[f64], p: usize) -> f64 {
    let n = values.len() / p - 1;
    values[p..n * p].iter().map(|v| v * v).sum::<f64>() / n as f64
}

/// Exact draw of `max(sup X, -inf X)` for a Brownian bridge `X` from `a` to `b`
/// over a segment with total variance `var`. The upper and lower extremes are
/// drawn independently; both matter together only for segments spanning the
/// whole band, which is negligible at any useful grid.
fn segment_sup_abs(a: f64, b: f64, var: f64, rng: &mut RngStream) -> f64 {
    let d2 = (b - a) * (b - a);
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = 1.0 - rng.random::<f64>();
    let upper = 0.5 * (a + b + (d2 - 2.0 * var * u1.ln()).sqrt());
    let lower = 0.5 * (a + b - (d2 - 2.0 * var * u2.ln()).sqrt());
    upper.max(-lower)
}

/// Exact draw of the supremum of a Brownian bridge from `a` to `b`.
fn segment_sup(a: f64, b: f64, var: f64, rng: &mut RngStream) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    0.5 * (a + b + ((b - a) * (b - a) - 2.0 * var * u.ln()).sqrt())
}

pub(crate) struct Evaluator {
    functional: Functional,
    p: usize,
    grid: usize,
    resolution: Resolution,
    /// `K(i/G)`, `i = 1..=G`; `None` for plain bridges.
    weights: Option<Vec<f64>>,
}

impl Evaluator {
    pub(crate) fn new(key: &TableKey) -> Self {
        let weights = match key.functional {
            Functional::MaxAbsWeighted(shape) => {
                let spec = match shape {
                    WeightShape::Constant => WeightSpec::constant(key.grid, 1),
                    WeightShape::Trend => WeightSpec::trend(key.grid, 1),
                    WeightShape::Jump(a) => WeightSpec::jump(key.grid, 1, a),
                };
                Some(spec.expect("key validated").component(0))
            }
            _ => None,
        };
        Evaluator {
            functional: key.functional,
            p: key.p,
            grid: key.grid,
            resolution: key.resolution,
            weights,
        }
    }

    pub(crate) fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.p * (self.grid + 1)]
    }

    /// One replication: fills `scratch` with `p` component-major paths and
    /// evaluates the functional.
    pub(crate) fn replicate(&self, rng: &mut RngStream, scratch: &mut [f64]) -> f64 {
        let g = self.grid;
        let step = (1.0 / g as f64).sqrt();
        for path in scratch.chunks_exact_mut(g + 1) {
            path[0] = 0.0;
            for k in 1..=g {
                let z: f64 = StandardNormal.sample(rng);
                path[k] = path[k - 1] + step * z;
            }
            let end = path[g];
            match &self.weights {
                None => {
                    for (k, v) in path.iter_mut().enumerate() {
                        *v -= end * k as f64 / g as f64;
                    }
                }
                Some(w) => {
                    // weight the bridge increments dW - W(1)/G
                    let drift = end / g as f64;
                    let mut prev_walk = 0.0;
                    for k in 1..=g {
                        let walk = path[k];
                        path[k] = path[k - 1] + w[k - 1] * (walk - prev_walk - drift);
                        prev_walk = walk;
                    }
                }
            }
        }
        self.evaluate(scratch, rng)
    }

    fn sup_abs(&self, path: &[f64], rng: &mut RngStream) -> f64 {
        match self.resolution {
            Resolution::Grid => path.iter().fold(0.0, |m, v| m.max(v.abs())),
            Resolution::Continuous => {
                let dt = 1.0 / self.grid as f64;
                (1..=self.grid).fold(0.0, |m, k| {
                    let var = match &self.weights {
                        Some(w) => dt * w[k - 1] * w[k - 1],
                        None => dt,
                    };
                    m.max(segment_sup_abs(path[k - 1], path[k], var, rng))
                })
            }
        }
    }

    fn evaluate(&self, paths: &[f64], rng: &mut RngStream) -> f64 {
        let g = self.grid;
        let dt = 1.0 / g as f64;
        let components = || paths.chunks_exact(g + 1);
        match self.functional {
            Functional::MaxAbsBridge | Functional::MaxAbsWeighted(_) => self.sup_abs(paths, rng),
            Functional::SumMaxAbs => components().map(|c| self.sup_abs(c, rng)).sum(),
            Functional::MaxSqNorm => {
                let norm = |k: usize| components().map(|c| c[k] * c[k]).sum::<f64>().sqrt();
                match self.resolution {
                    Resolution::Grid => (0..=g).map(|k| norm(k).powi(2)).fold(0.0, f64::max),
                    Resolution::Continuous => {
                        // the radius moves like a unit-variance diffusion locally
                        let mut prev = 0.0;
                        let mut best = 0.0f64;
                        for k in 1..=g {
                            let r = norm(k);
                            best = best.max(segment_sup(prev, r, dt, rng));
                            prev = r;
                        }
                        best * best
                    }
                }
            }
            Functional::MaxAbsSdWeighted { eps } => match self.resolution {
                Resolution::Grid => sd_weighted_max(paths, eps).expect("key validated"),
                Resolution::Continuous => {
                    let mut best = 0.0f64;
                    for k in 1..=g {
                        let (t0, t1) = ((k - 1) as f64 * dt, k as f64 * dt);
                        if t1 < eps - 1e-12 || t0 > 1.0 - eps + 1e-12 {
                            continue;
                        }
                        let mid = 0.5 * (t0 + t1);
                        let sup = segment_sup_abs(paths[k - 1], paths[k], dt, rng);
                        best = best.max(sup / (mid * (1.0 - mid)).sqrt());
                    }
                    best
                }
            },
            Functional::Cvm => match self.resolution {
                Resolution::Grid => {
                    components()
                        .map(|c| c[1..g].iter().map(|v| v * v).sum::<f64>())
                        .sum::<f64>()
                        * dt
                }
                Resolution::Continuous => components()
                    .map(|c| {
                        c.windows(2)
                            .map(|s| (s[0] * s[0] + s[0] * s[1] + s[1] * s[1]) / 3.0 + dt / 6.0)
                            .sum::<f64>()
                            * dt
                    })
                    .sum(),
            },
        }
    }
}
