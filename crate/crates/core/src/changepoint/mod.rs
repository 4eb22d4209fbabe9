//! Shape diagnostics for a rejected monitoring path.
//!
//! A jump at `a` makes a path component drift along the triangle
//! `T_a(t) = -(1 - a) t` on `[0, a]`, `a (t - 1)` on `[a, 1]`; a linear trend
//! makes it drift along the parabola `t (1 - t)`. Both templates are fitted
//! by least squares over the grid points `t = k/n`, `k = 0..=n`. The fits are
//! descriptive: no significance is attached.

use std::fmt;

use crate::error::{Error, Result};
use crate::monitoring::MonitoringPath;

/// Fitting criterion, reported with every diagnosis.
pub const CRITERION: &str = "least-squares";

/// Shortest path, in increments, that the fits accept.
pub const MIN_INCREMENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleFit {
    /// Break time `k_hat / n`.
    pub a_hat: f64,
    pub k_hat: usize,
    pub amplitude: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaFit {
    pub amplitude: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Triangle,
    Parabola,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Triangle => "triangle",
            Shape::Parabola => "parabola",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDiagnosis {
    /// 1-based component index.
    pub component: usize,
    pub triangle: TriangleFit,
    pub parabola: ParabolaFit,
    /// Template with the smaller SSE; the triangle on ties.
    pub best: Shape,
}

impl fmt::Display for ShapeDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "diagnosis component={} criterion={CRITERION} best={} a_hat={} k_hat={} triangle_amplitude={} triangle_sse={} parabola_amplitude={} parabola_sse={}",
            self.component,
            self.best.as_str(),
            self.triangle.a_hat,
            self.triangle.k_hat,
            self.triangle.amplitude,
            self.triangle.sse,
            self.parabola.amplitude,
            self.parabola.sse,
        )
    }
}

fn check_length(values: &[f64]) -> Result<usize> {
    let n = values.len().saturating_sub(1);
    if n < MIN_INCREMENTS {
        return Err(Error::InvalidArgument(format!(
            "shape fitting needs at least {MIN_INCREMENTS} increments, got {n}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("path values must be finite".into()));
    }
    Ok(n)
}

/// Least-squares triangle over break points `k = 2..=n-2`; ties go to the
/// smaller `k`. `values[k]` is the path at `t = k/n`.
pub fn fit_triangle(values: &[f64]) -> Result<TriangleFit> {
    let n = check_length(values)?;
    let nf = n as f64;
    // prefix sums over i = 0..=k of x t, x, t^2 and (t - 1)^2
    let mut xt = vec![0.0; n + 1];
    let mut x = vec![0.0; n + 1];
    let mut tt = vec![0.0; n + 1];
    let mut uu = vec![0.0; n + 1];
    for i in 0..=n {
        let t = i as f64 / nf;
        let prev = |v: &[f64]| if i == 0 { 0.0 } else { v[i - 1] };
        xt[i] = prev(&xt) + values[i] * t;
        x[i] = prev(&x) + values[i];
        tt[i] = prev(&tt) + t * t;
        uu[i] = prev(&uu) + (t - 1.0) * (t - 1.0);
    }
    let total_sq: f64 = values.iter().map(|v| v * v).sum();
    let mut best: Option<TriangleFit> = None;
    for k in 2..=n - 2 {
        let a = k as f64 / nf;
        let cross = -(1.0 - a) * xt[k] + a * ((xt[n] - xt[k]) - (x[n] - x[k]));
        let norm = (1.0 - a).powi(2) * tt[k] + a * a * (uu[n] - uu[k]);
        let amplitude = cross / norm;
        let sse = (total_sq - cross * amplitude).max(0.0);
        if best.is_none_or(|b| sse < b.sse) {
            best = Some(TriangleFit {
                a_hat: a,
                k_hat: k,
                amplitude,
                sse,
            });
        }
    }
    Ok(best.expect("n >= 10 leaves break points to search"))
}

/// Least-squares multiple of `t (1 - t)`.
pub fn fit_parabola(values: &[f64]) -> Result<ParabolaFit> {
    let n = check_length(values)?;
    let (mut cross, mut norm) = (0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let t = k as f64 / n as f64;
        let b = t * (1.0 - t);
        cross += v * b;
        norm += b * b;
    }
    let amplitude = cross / norm;
    let total_sq: f64 = values.iter().map(|v| v * v).sum();
    Ok(ParabolaFit {
        amplitude,
        sse: (total_sq - cross * amplitude).max(0.0),
    })
}

/// Both fits for every component of `path`.
pub fn diagnose(path: &MonitoringPath) -> Result<Vec<ShapeDiagnosis>> {
    (0..path.p())
        .map(|j| {
            let values = path.component(j);
            let triangle = fit_triangle(&values)?;
            let parabola = fit_parabola(&values)?;
            let best = if triangle.sse <= parabola.sse {
                Shape::Triangle
            } else {
                Shape::Parabola
            };
            Ok(ShapeDiagnosis {
                component: j + 1,
                triangle,
                parabola,
                best,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
