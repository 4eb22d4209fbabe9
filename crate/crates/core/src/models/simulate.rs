//! Draws observation sequences with a possibly time-varying parameter.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson, StandardNormal};

use super::{Family, Observation};
use crate::error::{Error, Result};

/// Simulates `n` observations where observation `i` (1-based) is drawn at
/// parameter `theta_at(i)`.
///
/// Regression covariates are `[1, U(0,1), U(0,1), ...]`. A Markov chain starts
/// from the stationary law of its first parameter and returns `n`
/// transitions, i.e. `n + 1` states.
pub fn simulate<R, F>(
    family: &Family,
    n: usize,
    mut theta_at: F,
    rng: &mut R,
) -> Result<Vec<Observation>>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> Vec<f64>,
{
    let mut out = Vec::with_capacity(n);
    let mut state = None;
    for i in 1..=n {
        let theta = theta_at(i);
        family.check_params(&theta).map_err(|e| {
            Error::AlternativeOutOfRange(format!("parameter at observation {i}: {e}"))
        })?;
        out.push(draw(family, &theta, &mut state, rng)?);
    }
    Ok(out)
}

/// One draw at a fixed, already validated parameter.
fn draw<R: Rng + ?Sized>(
    family: &Family,
    theta: &[f64],
    markov_state: &mut Option<usize>,
    rng: &mut R,
) -> Result<Observation> {
    let bad = |e: String| Error::Internal(format!("sampler construction failed: {e}"));
    Ok(match family {
        Family::Normal => {
            let d = Normal::new(theta[0], theta[1]).map_err(|e| bad(e.to_string()))?;
            Observation::Scalar(d.sample(rng))
        }
        Family::Gamma => {
            let d = Gamma::new(theta[0], 1.0 / theta[1]).map_err(|e| bad(e.to_string()))?;
            Observation::Scalar(d.sample(rng))
        }
        Family::Poisson => Observation::Scalar(poisson(theta[0], rng)?),
        Family::Multinomial6 => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut cat = 5;
            for (j, p) in theta.iter().enumerate() {
                acc += p;
                if u < acc {
                    cat = j;
                    break;
                }
            }
            Observation::Category(cat)
        }
        Family::Binormal => {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let r = theta[4];
            let w = r * z1 + (1.0 - r * r).sqrt() * z2;
            Observation::Pair(theta[0] + theta[1] * z1, theta[2] + theta[3] * w)
        }
        Family::NormalRegression { covariates } => {
            let x = covariate_row(*covariates, rng);
            let mean: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
            let z: f64 = StandardNormal.sample(rng);
            Observation::Regression {
                y: mean + theta[*covariates] * z,
                x,
            }
        }
        Family::PoissonRegression { covariates } => {
            let x = covariate_row(*covariates, rng);
            let eta: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
            Observation::Regression {
                y: poisson(eta.exp(), rng)?,
                x,
            }
        }
        Family::MarkovTwoState => {
            let from = match *markov_state {
                Some(s) => s,
                None => {
                    let stationary_one = theta[0] / (theta[0] + theta[1]);
                    usize::from(rng.random::<f64>() < stationary_one)
                }
            };
            let leave = rng.random::<f64>() < theta[from];
            let to = if leave { 1 - from } else { from };
            *markov_state = Some(to);
            Observation::Transition { from, to }
        }
    })
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    let d = Poisson::new(mean)
        .map_err(|e| Error::Internal(format!("Poisson sampler with mean {mean}: {e}")))?;
    Ok(d.sample(rng))
}

fn covariate_row<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Vec<f64> {
    (0..q)
        .map(|j| if j == 0 { 1.0 } else { rng.random::<f64>() })
        .collect()
}
