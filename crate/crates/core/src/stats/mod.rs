//! Test statistics on monitoring paths.
//!
//! Window tests use exact chi-squared references. Supremum and integral
//! tests take a [`NullTable`] of the matching functional and report the
//! simulated p-value `(1 + #{sample >= observed}) / (R + 1)`.

mod partition;
mod report;

pub use partition::WindowPartition;
pub use report::{ComponentRow, Reference, TestReport};

use crate::error::{Error, Result};
use crate::monitoring::{MonitoringPath, PathKind, WeightSpec, BRIDGE_BAND_95};
use crate::nulldist::{cvm_sum, sd_weighted_max, Functional, NullTable};
use crate::numerics::chi2_sf;

/// Default number of windows for the chi-squared tests.
pub const DEFAULT_WINDOWS: usize = 5;
/// Default trimming for the standardized supremum test.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Upper 10% point of the standardized supremum at `eps = 0.05`.
pub const SD_WEIGHTED_CRITICAL_10: f64 = 2.89;
/// Upper 5% point of the standardized supremum at `eps = 0.05`.
pub const SD_WEIGHTED_CRITICAL_05: f64 = 3.15;

/// Below this, `1 - sum c^2/d` is treated as zero.
const DEGENERATE_WEIGHT_TOL: f64 = 1e-10;

fn require_unweighted(path: &MonitoringPath, test: &str) -> Result<()> {
    if path.kind() == PathKind::Weighted {
        return Err(Error::InvalidArgument(format!(
            "{test} needs an unweighted path; use the weighted tests for weighted paths"
        )));
    }
    Ok(())
}

fn require_table(table: &NullTable, functional: Functional, p: usize) -> Result<()> {
    let key = table.key();
    if key.functional != functional || key.p != p {
        return Err(Error::InvalidArgument(format!(
            "table `{key}` does not match functional `{functional}` with p = {p}"
        )));
    }
    Ok(())
}

/// Increments of component `j` over each window.
fn window_increments(path: &MonitoringPath, bounds: &[(usize, usize)], j: usize) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| path.value(hi, j) - path.value(lo - 1, j))
        .collect()
}

fn chi2_report(name: &str, value: f64, df: usize, components: Vec<ComponentRow>) -> TestReport {
    TestReport {
        name: name.to_string(),
        value,
        reference: Reference::ChiSquared { df },
        p_value: chi2_sf(value, df as f64),
        components,
    }
}

/// `A2_j = sum_k {Delta M_j(I_k)}^2 / |I_k|` against `chi2_{m-1}`, and their
/// sum `A2` against `chi2_{p(m-1)}`. `|I_k|` is the share of increments in
/// window `k`.
pub fn chi2_window_test(path: &MonitoringPath, part: &WindowPartition) -> Result<TestReport> {
    require_unweighted(path, "the window chi-squared test")?;
    let n = path.n();
    let bounds = part.index_ranges(n)?;
    let df = part.m() - 1;
    let mut total = 0.0;
    let mut rows = Vec::with_capacity(path.p());
    for j in 0..path.p() {
        let a: f64 = window_increments(path, &bounds, j)
            .iter()
            .zip(&bounds)
            .map(|(d, &(lo, hi))| d * d * n as f64 / (hi - lo + 1) as f64)
            .sum();
        total += a;
        rows.push(ComponentRow::chi2(j + 1, a, df));
    }
    Ok(chi2_report("A2", total, path.p() * df, rows))
}

/// `U = max_t ||M(t)||^2`.
pub fn ks_norm_test(path: &MonitoringPath, table: &NullTable) -> Result<TestReport> {
    require_unweighted(path, "U")?;
    require_table(table, Functional::MaxSqNorm, path.p())?;
    let value = (0..=path.n())
        .map(|k| path.row(k).iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(TestReport::simulated("U", value, table, Vec::new()))
}

/// `U' = sum_j max_t |M_j(t)|`; each component maximum is also reported
/// against the 1.358 band.
pub fn ks_sum_test(path: &MonitoringPath, table: &NullTable) -> Result<TestReport> {
    require_unweighted(path, "U'")?;
    require_table(table, Functional::SumMaxAbs, path.p())?;
    let rows: Vec<ComponentRow> = (0..path.p())
        .map(|j| ComponentRow::benchmark(j + 1, path.max_abs(j), BRIDGE_BAND_95))
        .collect();
    let value = rows.iter().map(|r| r.value).sum();
    Ok(TestReport::simulated("U'", value, table, rows))
}

/// `T_j = max_{eps <= t <= 1 - eps} |M_j(t)| / sqrt(t (1 - t))`, one report
/// per component. The 2.89 / 3.15 benchmarks are attached when `eps = 0.05`.
pub fn ks_weighted_sd_test(
    path: &MonitoringPath,
    eps: f64,
    table: &NullTable,
) -> Result<Vec<TestReport>> {
    require_unweighted(path, "T")?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {eps} outside (0, 1/2)"
        )));
    }
    require_table(table, Functional::MaxAbsSdWeighted { eps }, 1)?;
    (0..path.p())
        .map(|j| {
            let value = sd_weighted_max(&path.component(j), eps)?;
            let rows = if (eps - 0.05).abs() < 1e-12 {
                vec![
                    ComponentRow::benchmark(j + 1, value, SD_WEIGHTED_CRITICAL_10),
                    ComponentRow::benchmark(j + 1, value, SD_WEIGHTED_CRITICAL_05),
                ]
            } else {
                Vec::new()
            };
            Ok(TestReport::simulated(
                &format!("T_{}", j + 1),
                value,
                table,
                rows,
            ))
        })
        .collect()
}

/// `C2 = n^{-1} sum_{k=1}^{n-1} ||M(k/n)||^2`.
pub fn cvm_test(path: &MonitoringPath, table: &NullTable) -> Result<TestReport> {
    require_unweighted(path, "C2")?;
    require_table(table, Functional::Cvm, path.p())?;
    let value = cvm_sum(path.values(), path.p());
    Ok(TestReport::simulated("C2", value, table, Vec::new()))
}

/// `max_t |V_j(t)|` per component, against a weighted-bridge table.
pub fn weighted_sup_test(vpath: &MonitoringPath, table: &NullTable) -> Result<Vec<TestReport>> {
    if !matches!(table.key().functional, Functional::MaxAbsWeighted(_)) || table.key().p != 1 {
        return Err(Error::InvalidArgument(format!(
            "table `{}` is not a weighted-bridge table",
            table.key()
        )));
    }
    Ok((0..vpath.p())
        .map(|j| {
            TestReport::simulated(
                &format!("maxV_{}", j + 1),
                vpath.max_abs(j),
                table,
                Vec::new(),
            )
        })
        .collect())
}

/// Window sums `c_k = n^{-1} sum_{i in I_k} K(i/n)` and `d_k = n^{-1} sum K^2`.
pub(crate) fn window_moments(weights: &[f64], bounds: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
    let n = weights.len() as f64;
    bounds
        .iter()
        .map(|&(lo, hi)| {
            let slice = &weights[lo - 1..hi];
            (
                slice.iter().sum::<f64>() / n,
                slice.iter().map(|k| k * k).sum::<f64>() / n,
            )
        })
        .unzip()
}

/// `sum x_k^2 / d_k + (1 - sum c_k^2 / d_k)^{-1} (sum c_k x_k / d_k)^2`, i.e.
/// `x^T (D - c c^T)^{-1} x` expanded by Sherman-Morrison.
pub(crate) fn sherman_morrison_form(x: &[f64], c: &[f64], d: &[f64]) -> Result<f64> {
    if let Some(k) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateWeight(format!(
            "weight vanishes on all of window {}",
            k + 1
        )));
    }
    let slack = 1.0 - c.iter().zip(d).map(|(c, d)| c * c / d).sum::<f64>();
    if slack <= DEGENERATE_WEIGHT_TOL {
        return Err(Error::DegenerateWeight(format!(
            "1 - sum c^2/d = {slack:e} is not positive"
        )));
    }
    let direct: f64 = x.iter().zip(d).map(|(x, d)| x * x / d).sum();
    let cross: f64 = x.iter().zip(c).zip(d).map(|((x, c), d)| c * x / d).sum();
    Ok(direct + cross * cross / slack)
}

/// Per-window levels `kappa_k` when `weights` is constant on every window.
pub(crate) fn window_levels(weights: &[f64], bounds: &[(usize, usize)]) -> Option<Vec<f64>> {
    let scale = weights.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    bounds
        .iter()
        .map(|&(lo, hi)| {
            let first = weights[lo - 1];
            weights[lo - 1..hi]
                .iter()
                .all(|v| (v - first).abs() <= 1e-12 * scale)
                .then_some(first)
        })
        .collect()
}

/// `Q_j` per component with `chi2_m` reference, and `Q = sum Q_j`.
///
/// When `K_j` is constant on every window, `Delta V_{j,k} = kappa_k Delta M_{j,k}`
/// and `D - c c^T` is singular; the component then falls back to `A2_j` on the
/// rescaled increments with `chi2_{m-1}`. A globally constant weight is the
/// common case.
pub fn weighted_chi2_test(
    vpath: &MonitoringPath,
    w: &WeightSpec,
    part: &WindowPartition,
) -> Result<TestReport> {
    if vpath.kind() != PathKind::Weighted {
        return Err(Error::InvalidArgument("Q needs a weighted path".into()));
    }
    if vpath.n() != w.n() || vpath.p() != w.p() {
        return Err(Error::GridMismatch(format!(
            "weights on n = {}, p = {} do not match the path (n = {}, p = {})",
            w.n(),
            w.p(),
            vpath.n(),
            vpath.p()
        )));
    }
    let n = vpath.n();
    let bounds = part.index_ranges(n)?;
    let m = part.m();
    let mut total = 0.0;
    let mut total_df = 0;
    let mut rows = Vec::with_capacity(vpath.p());
    for j in 0..vpath.p() {
        let dv = window_increments(vpath, &bounds, j);
        let k = w.component(j);
        let (value, df) = match window_levels(&k, &bounds) {
            Some(levels) if levels.iter().all(|&l| l != 0.0) => {
                let a = dv
                    .iter()
                    .zip(&levels)
                    .zip(&bounds)
                    .map(|((d, l), &(lo, hi))| (d / l).powi(2) * n as f64 / (hi - lo + 1) as f64)
                    .sum();
                (a, m - 1)
            }
            _ => {
                let (c, d) = window_moments(&k, &bounds);
                (sherman_morrison_form(&dv, &c, &d)?, m)
            }
        };
        total += value;
        total_df += df;
        rows.push(ComponentRow::chi2(j + 1, value, df));
    }
    Ok(chi2_report("Q", total, total_df, rows))
}

#[cfg(test)]
mod tests;
