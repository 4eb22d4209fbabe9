//! The two synthetic experiments.
//!
//! Experiment 1: 200 gamma draws whose standard deviation grows by a factor
//! 1.25 after observation 100 while the mean stays put; a gamma model is
//! fitted to all of them. Experiment 2: 200 normal responses around the
//! line `1.11 + 2.22 x`, `x ~ U(0, 1)`, with `sigma_i = 1 + 0.5 i / 200`.

use std::fmt::Write as _;

use constancy::changepoint::{diagnose, ShapeDiagnosis};
use constancy::models::simulate::simulate;
use constancy::models::{Family, Observation};
use constancy::monitoring::{standardized_process, MonitoringPath, Standardizer, BRIDGE_BAND_95};
use constancy::numerics::RngStream;

use crate::error::Result;

pub const N: usize = 200;
pub const DEFAULT_GAMMA_SHAPE: f64 = 0.25;
/// Variance ratio of experiment 1 (standard deviation ratio 1.25).
pub const VARIANCE_RATIO: f64 = 1.5625;

#[derive(Debug, Clone)]
pub struct IllustrationRun {
    pub which: u8,
    pub seed: u64,
    pub family: Family,
    pub data: Vec<Observation>,
    pub path: MonitoringPath,
    pub diagnosis: Vec<ShapeDiagnosis>,
}

/// Gamma `(a, b)` before and after the change; `b = a` keeps the mean at 1.
pub fn gamma_parameters(shape: f64) -> ([f64; 2], [f64; 2]) {
    let before = [shape, shape];
    (before, [shape / VARIANCE_RATIO, shape / VARIANCE_RATIO])
}

pub fn illustration(
    which: u8,
    seed: u64,
    gamma_shape: f64,
    standardizer: Standardizer,
) -> Result<IllustrationRun> {
    let mut rng = RngStream::new(seed, 0);
    let (family, data) = match which {
        1 => {
            let (before, after) = gamma_parameters(gamma_shape);
            let data = simulate(
                &Family::Gamma,
                N,
                |i| {
                    if i <= N / 2 {
                        before.to_vec()
                    } else {
                        after.to_vec()
                    }
                },
                &mut rng,
            )?;
            (Family::Gamma, data)
        }
        _ => {
            let family = Family::NormalRegression { covariates: 2 };
            let data = simulate(
                &family,
                N,
                |i| vec![1.11, 2.22, 1.0 + 0.5 * i as f64 / N as f64],
                &mut rng,
            )?;
            (family, data)
        }
    };
    let fit = family.fit(&data)?;
    let path = standardized_process(&data, &family, &fit, standardizer)?;
    let diagnosis = diagnose(&path)?;
    Ok(IllustrationRun {
        which,
        seed,
        family,
        data,
        path,
        diagnosis,
    })
}

impl IllustrationRun {
    /// The simulated data in the ingest format: `y` or `x,y`.
    pub fn data_csv(&self) -> String {
        let mut out = String::new();
        for (i, obs) in self.data.iter().enumerate() {
            match obs {
                Observation::Scalar(y) => {
                    if i == 0 {
                        out.push_str("y\n");
                    }
                    let _ = writeln!(out, "{y}");
                }
                Observation::Regression { y, x } => {
                    if i == 0 {
                        out.push_str("x,y\n");
                    }
                    let _ = writeln!(out, "{},{y}", x[1]);
                }
                _ => {}
            }
        }
        out
    }

    pub fn exceeds(&self, j: usize) -> bool {
        self.path.max_abs(j) > BRIDGE_BAND_95
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "illustration {}", self.which);
        let _ = writeln!(out, "family {}", self.family.id());
        let _ = writeln!(out, "n {}", self.data.len());
        let _ = writeln!(out, "seed {}", self.seed);
        for j in 0..self.path.p() {
            let _ = writeln!(
                out,
                "component {} max_abs={} band={BRIDGE_BAND_95} exceeds={}",
                j + 1,
                self.path.max_abs(j),
                self.exceeds(j)
            );
        }
        for d in &self.diagnosis {
            let _ = writeln!(out, "{d}");
        }
        out
    }
}
