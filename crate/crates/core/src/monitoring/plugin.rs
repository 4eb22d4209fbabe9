use super::{MonitoringPath, PathKind, Scaling};
use crate::error::{Error, Result};
use crate::models::Observation;

/// A statistical functional estimated on every prefix of the data.
pub trait PluginEstimator {
    fn name(&self) -> &str;

    /// Smallest prefix length with a usable estimate; the path is pinned to
    /// zero on shorter prefixes.
    fn min_prefix(&self) -> usize;

    /// `alpha_hat_j` for `j = 1..=n`; entries below [`Self::min_prefix`] are ignored.
    fn prefix_estimates(&self, data: &[Observation]) -> Result<Vec<f64>>;

    /// Standard deviation of the empirical influence values on the full sample.
    fn influence_scale(&self, data: &[Observation]) -> Result<f64>;
}

/// `n^{-1/2} k (alpha_hat_k - alpha_hat_n) / tau_hat`.
pub fn plugin_process(
    data: &[Observation],
    estimator: &dyn PluginEstimator,
) -> Result<MonitoringPath> {
    let n = data.len();
    let min = estimator.min_prefix().max(1);
    if n < min {
        return Err(Error::InvalidArgument(format!(
            "estimator `{}` needs at least {min} observations, got {n}",
            estimator.name()
        )));
    }
    let alpha = estimator.prefix_estimates(data)?;
    let tau = estimator.influence_scale(data)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::DegenerateFit(format!(
            "influence scale of `{}` is {tau}",
            estimator.name()
        )));
    }
    let full = alpha[n - 1];
    let scale = 1.0 / ((n as f64).sqrt() * tau);
    let mut values = vec![0.0; n + 1];
    for k in min..=n {
        values[k] = k as f64 * (alpha[k - 1] - full) * scale;
    }
    MonitoringPath::from_values(PathKind::Plugin, 1, values, Scaling::InfluenceScale(tau))
}

fn scalar_values(data: &[Observation]) -> Result<Vec<f64>> {
    data.iter()
        .map(|o| match o {
            Observation::Scalar(y) if y.is_finite() => Ok(*y),
            _ => Err(Error::Domain(format!(
                "expected a finite scalar observation, got {o:?}"
            ))),
        })
        .collect()
}

fn pair_values(data: &[Observation]) -> Result<Vec<(f64, f64)>> {
    data.iter()
        .map(|o| match o {
            Observation::Pair(x, y) if x.is_finite() && y.is_finite() => Ok((*x, *y)),
            _ => Err(Error::Domain(format!(
                "expected a finite pair observation, got {o:?}"
            ))),
        })
        .collect()
}

/// The sample mean, with influence values `y - ybar`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleMean;

impl PluginEstimator for SampleMean {
    fn name(&self) -> &str {
        "mean"
    }

    fn min_prefix(&self) -> usize {
        1
    }

    fn prefix_estimates(&self, data: &[Observation]) -> Result<Vec<f64>> {
        let y = scalar_values(data)?;
        let mut sum = 0.0;
        Ok(y.iter()
            .enumerate()
            .map(|(k, v)| {
                sum += v;
                sum / (k + 1) as f64
            })
            .collect())
    }

    fn influence_scale(&self, data: &[Observation]) -> Result<f64> {
        let y = scalar_values(data)?;
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        Ok((y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
    }
}

/// Pearson correlation of paired data, with influence values
/// `z1 z2 - rho (z1^2 + z2^2) / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleCorrelation;

impl PluginEstimator for SampleCorrelation {
    fn name(&self) -> &str {
        "correlation"
    }

    fn min_prefix(&self) -> usize {
        10
    }

    fn prefix_estimates(&self, data: &[Observation]) -> Result<Vec<f64>> {
        let pairs = pair_values(data)?;
        // shift by the first pair to limit cancellation
        let (x0, y0) = pairs.first().copied().unwrap_or((0.0, 0.0));
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        Ok(pairs
            .iter()
            .enumerate()
            .map(|(k, (x, y))| {
                let (dx, dy) = (x - x0, y - y0);
                sx += dx;
                sy += dy;
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
                let m = (k + 1) as f64;
                let vx = sxx - sx * sx / m;
                let vy = syy - sy * sy / m;
                let denom = (vx * vy).sqrt();
                if denom > 0.0 {
                    (sxy - sx * sy / m) / denom
                } else {
                    0.0
                }
            })
            .collect())
    }

    fn influence_scale(&self, data: &[Observation]) -> Result<f64> {
        let pairs = pair_values(data)?;
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let sx = (pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n).sqrt();
        let sy = (pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n).sqrt();
        if !(sx > 0.0 && sy > 0.0) {
            return Err(Error::DegenerateFit("zero variance in a margin".into()));
        }
        let z: Vec<(f64, f64)> = pairs
            .iter()
            .map(|p| ((p.0 - mx) / sx, (p.1 - my) / sy))
            .collect();
        let rho = z.iter().map(|(a, b)| a * b).sum::<f64>() / n;
        let infl: Vec<f64> = z
            .iter()
            .map(|(a, b)| a * b - 0.5 * rho * (a * a + b * b))
            .collect();
        let mean = infl.iter().sum::<f64>() / n;
        Ok((infl.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
    }
}
