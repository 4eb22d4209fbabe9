use std::fmt;

use super::{MonitoringPath, PathKind};
use crate::error::{Error, Result};

/// Descriptor of a weight family.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightTag {
    Constant,
    /// `K(s) = s - 1/2`.
    Trend,
    /// `K(s) = 1{s > a}`, centred over the grid.
    Jump(f64),
    Custom,
}

impl fmt::Display for WeightTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightTag::Constant => f.write_str("constant"),
            WeightTag::Trend => f.write_str("trend"),
            WeightTag::Jump(a) => write!(f, "jump({a})"),
            WeightTag::Custom => f.write_str("custom"),
        }
    }
}

/// Per-component weights `K_j(i/n)`, `i = 1..=n`.
///
/// Custom weights are assumed predictable and regular enough for the
/// weighted process to have its Gaussian limit; that is not checked.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    n: usize,
    p: usize,
    tag: WeightTag,
    values: Vec<f64>,
}

impl WeightSpec {
    /// Same function of `s = i/n` for every component.
    pub fn from_fn(n: usize, p: usize, tag: WeightTag, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * p);
        for i in 1..=n {
            let w = f(i as f64 / n as f64);
            values.extend(std::iter::repeat_n(w, p));
        }
        Self::new(n, p, tag, values)
    }

    pub fn constant(n: usize, p: usize) -> Result<Self> {
        Self::from_fn(n, p, WeightTag::Constant, |_| 1.0)
    }

    pub fn trend(n: usize, p: usize) -> Result<Self> {
        Self::from_fn(n, p, WeightTag::Trend, |s| s - 0.5)
    }

    pub fn jump(n: usize, p: usize, a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "jump location {a} outside (0, 1)"
            )));
        }
        let above = (1..=n).filter(|&i| i as f64 / n as f64 > a).count() as f64;
        let mean = above / n as f64;
        Self::from_fn(n, p, WeightTag::Jump(a), |s| {
            if s > a {
                1.0 - mean
            } else {
                -mean
            }
        })
    }

    /// Row-major `n x p` table: `values[(i - 1) * p + j] = K_j(i/n)`.
    pub fn custom(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(n, p, WeightTag::Custom, values)
    }

    fn new(n: usize, p: usize, tag: WeightTag, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 || values.len() != n * p {
            return Err(Error::GridMismatch(format!(
                "weight table of length {} does not match n = {n}, p = {p}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        for j in 0..p {
            if values.iter().skip(j).step_by(p).all(|&v| v == 0.0) {
                return Err(Error::DegenerateWeight(format!(
                    "weight for component {} is identically zero",
                    j + 1
                )));
            }
        }
        Ok(WeightSpec { n, p, tag, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn tag(&self) -> &WeightTag {
        &self.tag
    }

    /// `K_j(i/n)` for `i = 1..=n`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.p + j]
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        (1..=self.n).map(|i| self.weight(i, j)).collect()
    }

    /// Whether component `j` takes a single value on the grid.
    pub fn is_constant(&self, j: usize) -> bool {
        let first = self.weight(1, j);
        (1..=self.n).all(|i| self.weight(i, j) == first)
    }
}

/// `V_j(k/n) = sum_{i <= k} K_j(i/n) * (increment i of component j)`.
pub fn weighted_process(path: &MonitoringPath, w: &WeightSpec) -> Result<MonitoringPath> {
    if path.n() != w.n() || path.p() != w.p() {
        return Err(Error::GridMismatch(format!(
            "weights on n = {}, p = {} applied to a path with n = {}, p = {}",
            w.n(),
            w.p(),
            path.n(),
            path.p()
        )));
    }
    let p = path.p();
    let mut values = vec![0.0; (path.n() + 1) * p];
    for i in 1..=path.n() {
        for j in 0..p {
            values[i * p + j] = values[(i - 1) * p + j] + w.weight(i, j) * path.increment(i, j);
        }
    }
    let out = MonitoringPath::from_values(PathKind::Weighted, p, values, path.scaling().clone())?;
    Ok(out.with_weight(w.tag().clone()))
}

/// Limiting covariance of `V_j(t1)` and `V_j(t2)` per component:
/// `int_0^{t1 ^ t2} K^2 - int_0^{t1} K int_0^{t2} K`, as grid sums `n^{-1} sum_{i <= nt}`.
pub fn weighted_covariance(w: &WeightSpec, t1: f64, t2: f64) -> Result<Vec<f64>> {
    for t in [t1, t2] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, 1]")));
        }
    }
    let nf = w.n() as f64;
    let k1 = grid_index(t1, w.n());
    let k2 = grid_index(t2, w.n());
    let lo = k1.min(k2);
    Ok((0..w.p())
        .map(|j| {
            let sum = |k: usize, sq: bool| -> f64 {
                (1..=k)
                    .map(|i| {
                        let v = w.weight(i, j);
                        if sq {
                            v * v
                        } else {
                            v
                        }
                    })
                    .sum::<f64>()
                    / nf
            };
            sum(lo, true) - sum(k1, false) * sum(k2, false)
        })
        .collect())
}

/// `floor(t n)`, tolerant of rounding in `t = k/n`.
pub(crate) fn grid_index(t: f64, n: usize) -> usize {
    ((t * n as f64 + 1e-9).floor() as usize).min(n)
}
