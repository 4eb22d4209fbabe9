//! Local alternatives `theta_i = theta_0 + delta o h(i/n) / sqrt(n)`.
//!
//! Under such an alternative the canonical path drifts by
//! `J^{1/2} int_0^t delta o (h - hbar) ds`, and the chi-squared tests pick up
//! noncentrality parameters that depend on the weight function. All
//! integrals here are grid sums `n^{-1} sum_{i/n in A}` over the points
//! `i/n, i = 1..=n`, the same grid the data are generated on.

mod empirical;

pub use empirical::{
    empirical_power, power_report_csv, Calibration, PowerRow, PowerSetup, PowerTest, WeightChoice,
};

use std::fmt;

use crate::error::{Error, Result};
use crate::monitoring::WeightSpec;
use crate::numerics::{SymMatrix, DEFAULT_EIGEN_FLOOR};
use crate::stats::{sherman_morrison_form, window_levels, window_moments, WindowPartition};

/// Departure function of one parameter component.
#[derive(Debug, Clone, PartialEq)]
pub enum Departure {
    /// `h(s) = b 1{s > a}`.
    Jump { a: f64, b: f64 },
    /// `h(s) = c s`.
    Trend { c: f64 },
    /// `h(i/n)` for `i = 1..=n`.
    Custom(Vec<f64>),
}

impl Departure {
    fn at(&self, i: usize, n: usize) -> f64 {
        let s = i as f64 / n as f64;
        match self {
            Departure::Jump { a, b } => {
                if s > *a {
                    *b
                } else {
                    0.0
                }
            }
            Departure::Trend { c } => c * s,
            Departure::Custom(v) => v[i - 1],
        }
    }
}

impl fmt::Display for Departure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Departure::Jump { a, b } => write!(f, "jump(a={a} b={b})"),
            Departure::Trend { c } => write!(f, "trend(c={c})"),
            Departure::Custom(_) => f.write_str("custom"),
        }
    }
}

/// `delta`, `h` and `hbar` on the grid `i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureSpec {
    n: usize,
    delta: Vec<f64>,
    shapes: Vec<Departure>,
    /// Row-major `n x p`: `h_j(i/n)`.
    h: Vec<f64>,
    hbar: Vec<f64>,
}

impl DepartureSpec {
    pub fn new(n: usize, delta: Vec<f64>, shapes: Vec<Departure>) -> Result<Self> {
        let p = delta.len();
        if n == 0 || p == 0 || shapes.len() != p {
            return Err(Error::InvalidArgument(format!(
                "{} departure shapes for {p} parameters on n = {n}",
                shapes.len()
            )));
        }
        for shape in &shapes {
            match shape {
                Departure::Jump { a, .. } if !(*a > 0.0 && *a < 1.0) => {
                    return Err(Error::InvalidArgument(format!(
                        "jump location {a} outside (0, 1)"
                    )));
                }
                Departure::Custom(v) if v.len() != n => {
                    return Err(Error::GridMismatch(format!(
                        "custom departure of length {} on n = {n}",
                        v.len()
                    )));
                }
                _ => {}
            }
        }
        let mut h = Vec::with_capacity(n * p);
        for i in 1..=n {
            h.extend(shapes.iter().map(|s| s.at(i, n)));
        }
        if h.iter().chain(&delta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "departure values must be finite".into(),
            ));
        }
        let hbar = (0..p)
            .map(|j| h.iter().skip(j).step_by(p).sum::<f64>() / n as f64)
            .collect();
        Ok(DepartureSpec {
            n,
            delta,
            shapes,
            h,
            hbar,
        })
    }

    /// Single-parameter shorthand.
    pub fn scalar(n: usize, delta: f64, shape: Departure) -> Result<Self> {
        Self::new(n, vec![delta], vec![shape])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn shapes(&self) -> &[Departure] {
        &self.shapes
    }

    /// `h_j(i/n)`, `i` 1-based.
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[(i - 1) * self.p() + j]
    }

    pub fn hbar(&self) -> &[f64] {
        &self.hbar
    }

    /// Same spec with `delta` replaced.
    pub fn with_delta(&self, delta: Vec<f64>) -> Result<Self> {
        Self::new(self.n, delta, self.shapes.clone())
    }

    /// `theta_0 + delta o h(i/n) / sqrt(n)`.
    pub fn theta_at(&self, theta0: &[f64], i: usize) -> Vec<f64> {
        let scale = (self.n as f64).sqrt();
        theta0
            .iter()
            .enumerate()
            .map(|(j, t)| t + self.delta[j] * self.h(i, j) / scale)
            .collect()
    }

    /// `delta o (h(i/n) - hbar)` for row `i`.
    fn centred(&self, i: usize) -> Vec<f64> {
        (0..self.p())
            .map(|j| self.delta[j] * (self.h(i, j) - self.hbar[j]))
            .collect()
    }

    pub fn describe(&self) -> String {
        self.shapes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn check_info(spec: &DepartureSpec, info: &SymMatrix) -> Result<()> {
    if info.dim() != spec.p() {
        return Err(Error::InvalidArgument(format!(
            "information of dimension {} for a departure in {} parameters",
            info.dim(),
            spec.p()
        )));
    }
    Ok(())
}

/// `H(i/n) = J^{1/2} delta o (h(i/n) - hbar)`, row-major `n x p`.
pub fn drift_density(spec: &DepartureSpec, info: &SymMatrix) -> Result<Vec<f64>> {
    check_info(spec, info)?;
    let root = info.sqrt(DEFAULT_EIGEN_FLOOR)?;
    let mut out = Vec::with_capacity(spec.n * spec.p());
    for i in 1..=spec.n {
        out.extend(root.mul_vec(&spec.centred(i)));
    }
    Ok(out)
}

/// Expected path shape `J^{1/2} int_0^t delta o (h - hbar) ds` at `t = k/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCurve {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DriftCurve {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.p + j]
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        (0..=self.n).map(|k| self.value(k, j)).collect()
    }

    /// Grid index of the largest `|drift_j|`, first one on ties.
    pub fn peak(&self, j: usize) -> usize {
        (0..=self.n).fold(0, |best, k| {
            if self.value(k, j).abs() > self.value(best, j).abs() {
                k
            } else {
                best
            }
        })
    }
}

pub fn drift_curve(spec: &DepartureSpec, info: &SymMatrix) -> Result<DriftCurve> {
    let p = spec.p();
    let dens = drift_density(spec, info)?;
    let mut values = vec![0.0; (spec.n + 1) * p];
    for i in 1..=spec.n {
        for j in 0..p {
            values[i * p + j] = values[(i - 1) * p + j] + dens[(i - 1) * p + j] / spec.n as f64;
        }
    }
    Ok(DriftCurve {
        n: spec.n,
        p,
        values,
    })
}

/// `K_j = H_j`: the weight maximising the noncentrality of every `Q_j`.
pub fn optimal_weight(spec: &DepartureSpec, info: &SymMatrix) -> Result<WeightSpec> {
    let dens = drift_density(spec, info)?;
    WeightSpec::custom(spec.n, spec.p(), dens).map_err(|e| match e {
        Error::DegenerateWeight(m) => {
            Error::DegenerateWeight(format!("{m}; the departure has no effect there"))
        }
        e => e,
    })
}

/// Window integrals `a_k = n^{-1} sum_{I_k} K H`.
fn window_products(k: &[f64], h: &[f64], bounds: &[(usize, usize)]) -> Vec<f64> {
    let n = k.len() as f64;
    bounds
        .iter()
        .map(|&(lo, hi)| (lo - 1..hi).map(|i| k[i] * h[i]).sum::<f64>() / n)
        .collect()
}

fn check_lengths(k: &[f64], h: &[f64]) -> Result<()> {
    if k.len() != h.len() || k.is_empty() {
        return Err(Error::GridMismatch(format!(
            "weight of length {} against a drift density of length {}",
            k.len(),
            h.len()
        )));
    }
    Ok(())
}

/// `lambda(K) = sum a_k^2/d_k + (1 - sum c_k^2/d_k)^{-1} (sum c_k a_k / d_k)^2`.
pub fn lambda_expanded(k: &[f64], h: &[f64], part: &WindowPartition) -> Result<f64> {
    check_lengths(k, h)?;
    let bounds = part.index_ranges(k.len())?;
    let (c, d) = window_moments(k, &bounds);
    sherman_morrison_form(&window_products(k, h, &bounds), &c, &d)
}

/// `lambda(K) = a^T (D - c c^T)^{-1} a` with the inverse taken numerically.
pub fn lambda_matrix_form(k: &[f64], h: &[f64], part: &WindowPartition) -> Result<f64> {
    check_lengths(k, h)?;
    let bounds = part.index_ranges(k.len())?;
    let (c, d) = window_moments(k, &bounds);
    let sigma = SymMatrix::from_lower(c.len(), |a, b| {
        let base = -c[a] * c[b];
        if a == b {
            base + d[a]
        } else {
            base
        }
    });
    let inv = sigma
        .inverse(DEFAULT_EIGEN_FLOOR)
        .map_err(|_| Error::DegenerateWeight("D - c c^T is singular".into()))?;
    Ok(inv.quad_form(&window_products(k, h, &bounds)))
}

/// Constant-weight noncentrality `sum_k (int_{I_k} H)^2 / |I_k|`.
pub fn constant_weight_lambda(h: &[f64], part: &WindowPartition) -> Result<f64> {
    let n = h.len();
    let bounds = part.index_ranges(n)?;
    Ok(bounds
        .iter()
        .map(|&(lo, hi)| {
            let mass = h[lo - 1..hi].iter().sum::<f64>() / n as f64;
            mass * mass * n as f64 / (hi - lo + 1) as f64
        })
        .sum())
}

/// Whether `k` is constant and nonzero on every window, in which case `Q`
/// reduces to the rescaled window test with `m - 1` degrees of freedom.
pub(crate) fn piecewise_constant(k: &[f64], part: &WindowPartition) -> Result<bool> {
    let bounds = part.index_ranges(k.len())?;
    Ok(window_levels(k, &bounds).is_some_and(|l| l.iter().all(|&v| v != 0.0)))
}

/// `int_0^1 H^2 ds`.
pub fn lambda_bound(h: &[f64]) -> f64 {
    h.iter().map(|v| v * v).sum::<f64>() / h.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentLambda {
    pub lambda: f64,
    pub df: usize,
}

/// Noncentrality of `Q_j` for every component, of `Q = sum Q_j`, and the
/// maximum `int (delta o (h - hbar))^T J (delta o (h - hbar))` attainable
/// with optimal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Noncentrality {
    pub components: Vec<ComponentLambda>,
    pub total: f64,
    pub total_df: usize,
    pub optimal: f64,
}

pub fn noncentrality(
    w: &WeightSpec,
    spec: &DepartureSpec,
    info: &SymMatrix,
    part: &WindowPartition,
) -> Result<Noncentrality> {
    if w.n() != spec.n || w.p() != spec.p() {
        return Err(Error::GridMismatch(format!(
            "weights on n = {}, p = {} against a departure on n = {}, p = {}",
            w.n(),
            w.p(),
            spec.n,
            spec.p()
        )));
    }
    let p = spec.p();
    let dens = drift_density(spec, info)?;
    let m = part.m();
    let components = (0..p)
        .map(|j| {
            let h: Vec<f64> = dens.iter().skip(j).step_by(p).copied().collect();
            let k = w.component(j);
            if piecewise_constant(&k, part)? {
                Ok(ComponentLambda {
                    lambda: constant_weight_lambda(&h, part)?,
                    df: m - 1,
                })
            } else {
                Ok(ComponentLambda {
                    lambda: lambda_expanded(&k, &h, part)?,
                    df: m,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let optimal = (1..=spec.n)
        .map(|i| info.quad_form(&spec.centred(i)))
        .sum::<f64>()
        / spec.n as f64;
    Ok(Noncentrality {
        total: components.iter().map(|c| c.lambda).sum(),
        total_df: components.iter().map(|c| c.df).sum(),
        components,
        optimal,
    })
}
