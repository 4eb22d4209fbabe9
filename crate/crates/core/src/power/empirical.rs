use std::fmt;

use rayon::prelude::*;

use super::{
    constant_weight_lambda, drift_density, lambda_expanded, piecewise_constant, DepartureSpec,
};
use crate::error::{Error, Result};
use crate::models::simulate::simulate;
use crate::models::{Family, Observation};
use crate::monitoring::{canonical_process, weighted_process, MonitoringPath, WeightSpec};
use crate::nulldist::cvm_sum;
use crate::numerics::{
    chi2_quantile, noncentral_chi2_cdf, rng::STREAM_BLOCK, RngStream, SymMatrix,
};
use crate::stats::{chi2_window_test, weighted_chi2_test, WindowPartition};

/// Weight used by a weighted test in a power study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightChoice {
    Constant,
    Trend,
    Jump(f64),
    /// `H_j` of the departure under study, scaled to unit `int H_j^2`.
    Optimal,
}

impl fmt::Display for WeightChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightChoice::Constant => f.write_str("constant"),
            WeightChoice::Trend => f.write_str("trend"),
            WeightChoice::Jump(a) => write!(f, "jump({a})"),
            WeightChoice::Optimal => f.write_str("optimal"),
        }
    }
}

/// A test run inside a power study. `component` is 1-based; `None` uses
/// all components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerTest {
    A2 {
        windows: usize,
        component: Option<usize>,
    },
    Q {
        weight: WeightChoice,
        windows: usize,
        component: Option<usize>,
    },
    /// `max |M_j|` for one component, `max ||M||^2` for all.
    MaxM {
        component: Option<usize>,
    },
    /// `max |V_j|` for one component, `sum_j max |V_j|` for all.
    MaxV {
        weight: WeightChoice,
        component: Option<usize>,
    },
    Cvm {
        component: Option<usize>,
    },
}

impl PowerTest {
    fn component(&self) -> Option<usize> {
        match *self {
            PowerTest::A2 { component, .. }
            | PowerTest::Q { component, .. }
            | PowerTest::MaxM { component }
            | PowerTest::MaxV { component, .. }
            | PowerTest::Cvm { component } => component,
        }
    }

    fn weight_choice(&self) -> Option<WeightChoice> {
        match *self {
            PowerTest::Q { weight, .. } | PowerTest::MaxV { weight, .. } => Some(weight),
            _ => None,
        }
    }

    fn windows(&self) -> Option<usize> {
        match *self {
            PowerTest::A2 { windows, .. } | PowerTest::Q { windows, .. } => Some(windows),
            _ => None,
        }
    }
}

impl fmt::Display for PowerTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = self
            .component()
            .map(|j| format!("_{j}"))
            .unwrap_or_default();
        match self {
            PowerTest::A2 { windows, .. } => write!(f, "A2{sub}(m={windows})"),
            PowerTest::Q {
                weight, windows, ..
            } => write!(f, "Q{sub}[{weight}](m={windows})"),
            PowerTest::MaxM { .. } => write!(f, "maxM{sub}"),
            PowerTest::MaxV { weight, .. } => write!(f, "maxV{sub}[{weight}]"),
            PowerTest::Cvm { .. } => write!(f, "C2{sub}"),
        }
    }
}

/// Model, null parameter, sample size and Monte Carlo settings of a study.
#[derive(Debug, Clone)]
pub struct PowerSetup {
    pub family: Family,
    pub theta0: Vec<f64>,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub level: f64,
}

impl PowerSetup {
    fn validate(&self) -> Result<()> {
        self.family.check_params(&self.theta0)?;
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        if self.replications < 2 {
            return Err(Error::InvalidArgument(
                "a power study needs at least 2 replications".into(),
            ));
        }
        Ok(())
    }

    /// Information at `theta0`, averaged over a reference sample for
    /// families whose information depends on covariates or states.
    fn information(&self) -> Result<SymMatrix> {
        let mut rng = RngStream::new(self.seed, 2 * STREAM_BLOCK);
        let reference = simulate(&self.family, self.n, |_| self.theta0.clone(), &mut rng)?;
        let theta = self.family.params(self.theta0.clone())?;
        self.family.expected_info(&theta, &reference)
    }
}

/// A test with its weights and windows resolved.
struct Prepared {
    test: PowerTest,
    /// 0-based components the statistic uses.
    comps: Vec<usize>,
    weight: Option<WeightSpec>,
    part: Option<WindowPartition>,
}

fn select(path: &MonitoringPath, comps: &[usize]) -> Result<MonitoringPath> {
    if comps.len() == path.p() {
        return Ok(path.clone());
    }
    let mut values = Vec::with_capacity((path.n() + 1) * comps.len());
    for k in 0..=path.n() {
        values.extend(comps.iter().map(|&j| path.value(k, j)));
    }
    MonitoringPath::from_values(path.kind(), comps.len(), values, path.scaling().clone())
}

/// Unit-norm optimal direction, row-major `n x p`.
fn normalised_density(spec: &DepartureSpec, info: &SymMatrix) -> Result<Vec<f64>> {
    let p = spec.p();
    let mut dens = drift_density(spec, info)?;
    for j in 0..p {
        let norm =
            (dens.iter().skip(j).step_by(p).map(|v| v * v).sum::<f64>() / spec.n() as f64).sqrt();
        if norm > 0.0 {
            dens.iter_mut().skip(j).step_by(p).for_each(|v| *v /= norm);
        }
    }
    Ok(dens)
}

fn build_weight(
    choice: WeightChoice,
    n: usize,
    comps: &[usize],
    p: usize,
    optimal: &[f64],
) -> Result<WeightSpec> {
    let q = comps.len();
    match choice {
        WeightChoice::Constant => WeightSpec::constant(n, q),
        WeightChoice::Trend => WeightSpec::trend(n, q),
        WeightChoice::Jump(a) => WeightSpec::jump(n, q, a),
        WeightChoice::Optimal => {
            let mut values = Vec::with_capacity(n * q);
            for i in 0..n {
                values.extend(comps.iter().map(|&j| optimal[i * p + j]));
            }
            WeightSpec::custom(n, q, values)
        }
    }
}

impl Prepared {
    fn new(test: PowerTest, n: usize, p: usize, optimal: &[f64]) -> Result<Self> {
        let comps = match test.component() {
            Some(j) if j == 0 || j > p => {
                return Err(Error::InvalidArgument(format!(
                    "component {j} outside 1..={p}"
                )));
            }
            Some(j) => vec![j - 1],
            None => (0..p).collect(),
        };
        let weight = test
            .weight_choice()
            .map(|w| build_weight(w, n, &comps, p, optimal))
            .transpose()?;
        let part = test.windows().map(WindowPartition::equal).transpose()?;
        Ok(Prepared {
            test,
            comps,
            weight,
            part,
        })
    }

    fn statistic(&self, path: &MonitoringPath) -> Result<f64> {
        let m = select(path, &self.comps)?;
        let weighted = || {
            weighted_process(
                &m,
                self.weight.as_ref().expect("weighted test without weight"),
            )
        };
        Ok(match self.test {
            PowerTest::A2 { .. } => {
                chi2_window_test(&m, self.part.as_ref().expect("windows")).map(|r| r.value)?
            }
            PowerTest::Q { .. } => {
                let w = self.weight.as_ref().expect("weight");
                weighted_chi2_test(&weighted()?, w, self.part.as_ref().expect("windows"))?.value
            }
            PowerTest::MaxM { .. } => (0..=m.n())
                .map(|k| m.row(k).iter().map(|v| v * v).sum::<f64>())
                .fold(0.0, f64::max),
            PowerTest::MaxV { .. } => {
                let v = weighted()?;
                (0..v.p()).map(|j| v.max_abs(j)).sum()
            }
            PowerTest::Cvm { .. } => cvm_sum(m.values(), m.p()),
        })
    }

    /// Noncentral chi-squared power at the nominal critical value.
    fn predicted(&self, level: f64, dens: &[f64], p: usize) -> Result<Option<f64>> {
        let Some(part) = &self.part else {
            return Ok(None);
        };
        let m = part.m();
        let mut lambda = 0.0;
        let mut df = 0;
        for (col, &j) in self.comps.iter().enumerate() {
            let h: Vec<f64> = dens.iter().skip(j).step_by(p).copied().collect();
            match &self.weight {
                Some(w) if !piecewise_constant(&w.component(col), part)? => {
                    lambda += lambda_expanded(&w.component(col), &h, part)?;
                    df += m;
                }
                _ => {
                    lambda += constant_weight_lambda(&h, part)?;
                    df += m - 1;
                }
            }
        }
        let critical = chi2_quantile(1.0 - level, df as f64)?;
        Ok(Some(
            1.0 - noncentral_chi2_cdf(critical, df as u32, lambda)?,
        ))
    }
}

/// Replications drawn at `theta_i = theta0 + delta o h(i/n) / sqrt(n)`,
/// replication `r` from stream `block + r`.
fn replicate(
    setup: &PowerSetup,
    spec: &DepartureSpec,
    tests: &[Prepared],
    block: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..setup.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(setup.seed, block + r);
            let data: Vec<Observation> = simulate(
                &setup.family,
                setup.n,
                |i| spec.theta_at(&setup.theta0, i),
                &mut rng,
            )?;
            let fit = setup.family.fit(&data)?;
            let path = canonical_process(&data, &setup.family, &fit)?;
            tests.iter().map(|t| t.statistic(&path)).collect()
        })
        .collect()
}

fn upper_quantile(mut values: Vec<f64>, prob: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let h = (values.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}

/// Monte Carlo critical values of a set of tests at the study's level,
/// from null replications on streams `0..R`.
pub struct Calibration {
    setup: PowerSetup,
    info: SymMatrix,
    tests: Vec<Prepared>,
    critical: Vec<f64>,
}

impl Calibration {
    /// `direction` fixes the optimal weights; only its shape and the sign
    /// pattern of its `delta` matter.
    pub fn new(setup: &PowerSetup, direction: &DepartureSpec, tests: &[PowerTest]) -> Result<Self> {
        setup.validate()?;
        if direction.n() != setup.n || direction.p() != setup.family.dim() {
            return Err(Error::GridMismatch(format!(
                "departure on n = {}, p = {} for a study with n = {}, p = {}",
                direction.n(),
                direction.p(),
                setup.n,
                setup.family.dim()
            )));
        }
        if tests.is_empty() {
            return Err(Error::InvalidArgument("no tests requested".into()));
        }
        let info = setup.information()?;
        let optimal = normalised_density(direction, &info)?;
        let p = setup.family.dim();
        let prepared = tests
            .iter()
            .map(|&t| Prepared::new(t, setup.n, p, &optimal))
            .collect::<Result<Vec<_>>>()?;
        let null = direction.with_delta(vec![0.0; p])?;
        let stats = replicate(setup, &null, &prepared, 0)?;
        let critical = (0..prepared.len())
            .map(|t| upper_quantile(stats.iter().map(|row| row[t]).collect(), 1.0 - setup.level))
            .collect();
        Ok(Calibration {
            setup: setup.clone(),
            info,
            tests: prepared,
            critical,
        })
    }

    pub fn critical(&self) -> &[f64] {
        &self.critical
    }

    /// Rejection rates under `spec`, from streams `STREAM_BLOCK..STREAM_BLOCK + R`.
    pub fn power(&self, spec: &DepartureSpec) -> Result<Vec<PowerRow>> {
        let setup = &self.setup;
        if spec.n() != setup.n || spec.p() != setup.family.dim() {
            return Err(Error::GridMismatch(
                "departure does not match the calibrated study".into(),
            ));
        }
        let stats = replicate(setup, spec, &self.tests, STREAM_BLOCK)?;
        let dens = drift_density(spec, &self.info)?;
        let reps = setup.replications as f64;
        self.tests
            .iter()
            .enumerate()
            .map(|(t, prep)| {
                let hits = stats.iter().filter(|row| row[t] > self.critical[t]).count() as f64;
                let power = hits / reps;
                Ok(PowerRow {
                    delta: spec.delta().to_vec(),
                    shape: spec.describe(),
                    test: prep.test.to_string(),
                    n: setup.n,
                    level: setup.level,
                    empirical_power: power,
                    predicted_power: prep.predicted(setup.level, &dens, spec.p())?,
                    mc_se: (power * (1.0 - power) / reps).sqrt(),
                })
            })
            .collect()
    }
}

/// One row of a power report.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub delta: Vec<f64>,
    pub shape: String,
    pub test: String,
    pub n: usize,
    pub level: f64,
    pub empirical_power: f64,
    /// Noncentral chi-squared prediction; chi-squared tests only.
    pub predicted_power: Option<f64>,
    pub mc_se: f64,
}

/// Calibrates under the null and simulates under `spec` in one go.
pub fn empirical_power(
    setup: &PowerSetup,
    spec: &DepartureSpec,
    tests: &[PowerTest],
) -> Result<Vec<PowerRow>> {
    Calibration::new(setup, spec, tests)?.power(spec)
}

/// Columns `delta,shape,test,n,level,empirical_power,predicted_power,mc_se`;
/// vector entries are joined with `;`, a missing prediction is `NA`.
pub fn power_report_csv(rows: &[PowerRow]) -> String {
    let mut out = String::from("delta,shape,test,n,level,empirical_power,predicted_power,mc_se\n");
    for r in rows {
        let delta = r
            .delta
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let predicted = r
            .predicted_power
            .map_or("NA".to_string(), |p| p.to_string());
        out.push_str(&format!(
            "{delta},{},{},{},{},{},{predicted},{}\n",
            r.shape, r.test, r.n, r.level, r.empirical_power, r.mc_se
        ));
    }
    out
}
