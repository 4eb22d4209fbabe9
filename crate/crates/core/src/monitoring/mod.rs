//! Monitoring paths built from cumulative estimated scores.
//!
//! A path lives on the grid `t = k/n`, `k = 0..=n`, as a right-continuous
//! step function: the value on `[k/n, (k+1)/n)` is `values[k]`. The `i`-th
//! increment (`i = 1..=n`) is `values[i] - values[i-1]`.

mod io;
mod plugin;
mod weights;

pub use plugin::{plugin_process, PluginEstimator, SampleCorrelation, SampleMean};
pub use weights::{weighted_covariance, weighted_process, WeightSpec, WeightTag};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{Family, FitResult, Observation};
use crate::numerics::{Matrix, SymMatrix, DEFAULT_EIGEN_FLOOR};

/// Reference band drawn around paths: the 0.95 quantile of `max |W0(t)|`.
pub const BRIDGE_BAND_95: f64 = 1.358;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Canonical,
    Robust,
    Plugin,
    Weighted,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Canonical => "canonical",
            PathKind::Robust => "robust",
            PathKind::Plugin => "plugin",
            PathKind::Weighted => "weighted",
        }
    }
}

impl FromStr for PathKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            PathKind::Canonical,
            PathKind::Robust,
            PathKind::Plugin,
            PathKind::Weighted,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown path kind `{s}`")))
    }
}

/// Which estimate of the score variance standardizes the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Standardizer {
    /// Model information at the estimate, `J_hat`.
    #[default]
    Expected,
    /// `-n^{-1} sum i(Y_i, theta_hat)`.
    Observed,
    /// Empirical score covariance `K_hat`.
    Robust,
}

impl Standardizer {
    pub fn as_str(self) -> &'static str {
        match self {
            Standardizer::Expected => "expected",
            Standardizer::Observed => "observed",
            Standardizer::Robust => "robust",
        }
    }
}

impl fmt::Display for Standardizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Standardizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(Standardizer::Expected),
            "observed" => Ok(Standardizer::Observed),
            "robust" => Ok(Standardizer::Robust),
            _ => Err(Error::InvalidArgument(format!(
                "unknown standardizer `{s}` (expected, observed, robust)"
            ))),
        }
    }
}

/// How the path was scaled.
#[derive(Debug, Clone, PartialEq)]
pub enum Scaling {
    /// Inverse symmetric eigen-root of the chosen matrix.
    EigenRoot(Standardizer),
    /// A caller-supplied root matrix.
    CustomRoot,
    /// Division by an influence-function scale estimate.
    InfluenceScale(f64),
    /// Unknown provenance (e.g. a path read back from a file).
    Unrecorded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringPath {
    n: usize,
    p: usize,
    values: Vec<f64>,
    kind: PathKind,
    scaling: Scaling,
    weight: Option<WeightTag>,
}

impl MonitoringPath {
    /// Wraps `(n + 1) x p` row-major values. Row `0` must be exactly zero.
    pub fn from_values(
        kind: PathKind,
        p: usize,
        values: Vec<f64>,
        scaling: Scaling,
    ) -> Result<Self> {
        if p == 0 || !values.len().is_multiple_of(p) || values.len() < 2 * p {
            return Err(Error::InvalidArgument(format!(
                "path needs at least two rows of {p} components, got {} values",
                values.len()
            )));
        }
        if values[..p].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument(
                "path must start at exactly zero".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("path values must be finite".into()));
        }
        Ok(MonitoringPath {
            n: values.len() / p - 1,
            p,
            values,
            kind,
            scaling,
            weight: None,
        })
    }

    /// `values[k] = root * n^{-1/2} sum_{i <= k} u_i` for flattened `n x p` scores.
    pub fn from_scores(
        kind: PathKind,
        scores: &[f64],
        root: &Matrix,
        scaling: Scaling,
    ) -> Result<Self> {
        let p = root.dim();
        if scores.is_empty() || !scores.len().is_multiple_of(p) {
            return Err(Error::InvalidArgument(format!(
                "score array of length {} does not split into rows of {p}",
                scores.len()
            )));
        }
        let n = scores.len() / p;
        let scale = 1.0 / (n as f64).sqrt();
        let mut values = vec![0.0; (n + 1) * p];
        let mut sum = vec![0.0; p];
        for (k, row) in scores.chunks_exact(p).enumerate() {
            for (s, u) in sum.iter_mut().zip(row) {
                *s += u;
            }
            let rotated = root.mul_vec(&sum);
            for (dst, v) in values[(k + 1) * p..(k + 2) * p].iter_mut().zip(rotated) {
                *dst = v * scale;
            }
        }
        Self::from_values(kind, p, values, scaling)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    /// Weight descriptor for weighted paths.
    pub fn weight(&self) -> Option<&WeightTag> {
        self.weight.as_ref()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// All `p` components at grid point `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.p..(k + 1) * self.p]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.p + j]
    }

    /// `i`-th increment of component `j`, `i = 1..=n`.
    pub fn increment(&self, i: usize, j: usize) -> f64 {
        self.value(i, j) - self.value(i - 1, j)
    }

    /// Component `j` at every grid point.
    pub fn component(&self, j: usize) -> Vec<f64> {
        (0..=self.n).map(|k| self.value(k, j)).collect()
    }

    /// Raw row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_k |values[k]_j|`, which covers both one-sided limits of a step path.
    pub fn max_abs(&self, j: usize) -> f64 {
        (0..=self.n)
            .map(|k| self.value(k, j).abs())
            .fold(0.0, f64::max)
    }

    /// Sup-norm of the terminal value.
    pub fn endpoint_sup(&self) -> f64 {
        self.row(self.n).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn with_weight(mut self, tag: WeightTag) -> Self {
        self.weight = Some(tag);
        self
    }
}

fn standardizing_matrix(fit: &FitResult, which: Standardizer) -> &SymMatrix {
    match which {
        Standardizer::Expected => &fit.expected_info,
        Standardizer::Observed => &fit.observed_info,
        Standardizer::Robust => &fit.score_variance,
    }
}

/// `J^{-1/2} n^{-1/2} sum_{i <= nt} u(Y_i, theta_hat)` with the chosen estimate of `J`.
pub fn standardized_process(
    data: &[Observation],
    family: &Family,
    fit: &FitResult,
    which: Standardizer,
) -> Result<MonitoringPath> {
    if fit.theta_hat.family() != family.id() {
        return Err(Error::InvalidArgument(format!(
            "fit belongs to `{}`, not `{}`",
            fit.theta_hat.family(),
            family.id()
        )));
    }
    let root = standardizing_matrix(fit, which).inv_sqrt(DEFAULT_EIGEN_FLOOR)?;
    let scores = family.scores(data, &fit.theta_hat)?;
    let kind = match which {
        Standardizer::Robust => PathKind::Robust,
        _ => PathKind::Canonical,
    };
    MonitoringPath::from_scores(kind, &scores, &root.to_matrix(), Scaling::EigenRoot(which))
}

/// Canonical process standardized by the expected information.
pub fn canonical_process(
    data: &[Observation],
    family: &Family,
    fit: &FitResult,
) -> Result<MonitoringPath> {
    standardized_process(data, family, fit, Standardizer::Expected)
}

/// Model-robust process standardized by the empirical score covariance.
pub fn robust_process(
    data: &[Observation],
    family: &Family,
    fit: &FitResult,
) -> Result<MonitoringPath> {
    standardized_process(data, family, fit, Standardizer::Robust)
}

/// Canonical process for a regression family, with `J_hat = n^{-1} sum V(x_i, theta_hat)`.
pub fn regression_process(
    data: &[Observation],
    family: &Family,
    fit: &FitResult,
) -> Result<MonitoringPath> {
    if !family.id().is_regression() {
        return Err(Error::InvalidArgument(format!(
            "family `{}` is not a regression family",
            family.id()
        )));
    }
    canonical_process(data, family, fit)
}

#[cfg(test)]
mod tests;
