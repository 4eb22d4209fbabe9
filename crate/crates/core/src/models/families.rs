//! Per-family formulas. Callers in `mod.rs` validate shapes and parameters.

use super::{Family, Observation};
use crate::error::{Error, Result};
use crate::numerics::{digamma, ln_gamma, trigamma, SymMatrix};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
const LN_TWO_PI: f64 = 1.837_877_066_409_345_5;

const GAMMA_TOLERANCE: f64 = 1e-12;
const GAMMA_MAX_ITER: usize = 100;
const POISREG_TOLERANCE: f64 = 1e-10;
const POISREG_MAX_ITER: usize = 100;
const SEPARATION_FLOOR: f64 = 1e-8;

fn scalar(obs: &Observation) -> f64 {
    match obs {
        Observation::Scalar(y) => *y,
        _ => unreachable!("shape checked by caller"),
    }
}

fn regression(obs: &Observation) -> (f64, &[f64]) {
    match obs {
        Observation::Regression { y, x } => (*y, x),
        _ => unreachable!("shape checked by caller"),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn last_prob(theta: &[f64]) -> f64 {
    1.0 - theta.iter().sum::<f64>()
}

/// Standardised binormal coordinates `(z1, z2, rho, 1 - rho^2)`.
fn binormal_z(x: f64, y: f64, theta: &[f64]) -> (f64, f64, f64, f64) {
    let z1 = (x - theta[0]) / theta[1];
    let z2 = (y - theta[2]) / theta[3];
    let r = theta[4];
    (z1, z2, r, 1.0 - r * r)
}

pub(super) fn log_density(family: &Family, obs: &Observation, theta: &[f64]) -> Result<f64> {
    Ok(match family {
        Family::Normal => {
            let z = (scalar(obs) - theta[0]) / theta[1];
            -theta[1].ln() - HALF_LN_TWO_PI - 0.5 * z * z
        }
        Family::Gamma => {
            let (a, b) = (theta[0], theta[1]);
            let y = scalar(obs);
            a * b.ln() - ln_gamma(a)? + (a - 1.0) * y.ln() - b * y
        }
        Family::Poisson => {
            let y = scalar(obs);
            y * theta[0].ln() - theta[0] - ln_gamma(y + 1.0)?
        }
        Family::Multinomial6 => match obs {
            Observation::Category(5) => last_prob(theta).ln(),
            Observation::Category(c) => theta[*c].ln(),
            _ => unreachable!(),
        },
        Family::Binormal => {
            let Observation::Pair(x, y) = obs else {
                unreachable!()
            };
            let (z1, z2, r, w) = binormal_z(*x, *y, theta);
            let q = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / w;
            -LN_TWO_PI - theta[1].ln() - theta[3].ln() - 0.5 * w.ln() - 0.5 * q
        }
        Family::NormalRegression { covariates } => {
            let (y, x) = regression(obs);
            let sigma = theta[*covariates];
            let z = (y - dot(x, &theta[..*covariates])) / sigma;
            -sigma.ln() - HALF_LN_TWO_PI - 0.5 * z * z
        }
        Family::PoissonRegression { .. } => {
            let (y, x) = regression(obs);
            let eta = dot(x, theta);
            y * eta - eta.exp() - ln_gamma(y + 1.0)?
        }
        Family::MarkovTwoState => {
            let Observation::Transition { from, to } = obs else {
                unreachable!()
            };
            let p = theta[*from];
            // state 0 leaves with p01, state 1 leaves with p10
            if from != to {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        }
    })
}

pub(super) fn scores(family: &Family, data: &[Observation], theta: &[f64]) -> Result<Vec<f64>> {
    let p = family.dim();
    let mut out = vec![0.0; data.len() * p];
    match family {
        Family::Normal => {
            let (mu, sigma) = (theta[0], theta[1]);
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let z = (scalar(obs) - mu) / sigma;
                row[0] = z / sigma;
                row[1] = (z * z - 1.0) / sigma;
            }
        }
        Family::Gamma => {
            let (a, b) = (theta[0], theta[1]);
            let offset = b.ln() - digamma(a)?;
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let y = scalar(obs);
                row[0] = y.ln() + offset;
                row[1] = a / b - y;
            }
        }
        Family::Poisson => {
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                row[0] = scalar(obs) / theta[0] - 1.0;
            }
        }
        Family::Multinomial6 => {
            let p6 = last_prob(theta);
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                match obs {
                    Observation::Category(5) => row.iter_mut().for_each(|v| *v = -1.0 / p6),
                    Observation::Category(c) => row[*c] = 1.0 / theta[*c],
                    _ => unreachable!(),
                }
            }
        }
        Family::Binormal => {
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let Observation::Pair(x, y) = obs else {
                    unreachable!()
                };
                row.copy_from_slice(&binormal_score(*x, *y, theta));
            }
        }
        Family::NormalRegression { covariates } => {
            let q = *covariates;
            let sigma = theta[q];
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let (y, x) = regression(obs);
                let z = (y - dot(x, &theta[..q])) / sigma;
                for (r, xv) in row[..q].iter_mut().zip(x) {
                    *r = z * xv / sigma;
                }
                row[q] = (z * z - 1.0) / sigma;
            }
        }
        Family::PoissonRegression { .. } => {
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let (y, x) = regression(obs);
                let resid = y - dot(x, theta).exp();
                for (r, xv) in row.iter_mut().zip(x) {
                    *r = resid * xv;
                }
            }
        }
        Family::MarkovTwoState => {
            for (row, obs) in out.chunks_exact_mut(p).zip(data) {
                let Observation::Transition { from, to } = obs else {
                    unreachable!()
                };
                let prob = theta[*from];
                row[*from] = if from != to {
                    1.0 / prob
                } else {
                    -1.0 / (1.0 - prob)
                };
            }
        }
    }
    Ok(out)
}

fn binormal_score(x: f64, y: f64, theta: &[f64]) -> [f64; 5] {
    let (s1, s2) = (theta[1], theta[3]);
    let (z1, z2, r, w) = binormal_z(x, y, theta);
    let quad = z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2;
    [
        (z1 - r * z2) / (w * s1),
        (-1.0 + (z1 * z1 - r * z1 * z2) / w) / s1,
        (z2 - r * z1) / (w * s2),
        (-1.0 + (z2 * z2 - r * z1 * z2) / w) / s2,
        r / w + z1 * z2 / w - r * quad / (w * w),
    ]
}

pub(super) fn hessian(family: &Family, obs: &Observation, theta: &[f64]) -> Result<SymMatrix> {
    Ok(match family {
        Family::Normal => {
            let sigma = theta[1];
            let z = (scalar(obs) - theta[0]) / sigma;
            let s2 = sigma * sigma;
            SymMatrix::from_lower(2, |i, j| match (i, j) {
                (0, 0) => -1.0 / s2,
                (1, 0) => -2.0 * z / s2,
                _ => (1.0 - 3.0 * z * z) / s2,
            })
        }
        Family::Gamma => {
            let (a, b) = (theta[0], theta[1]);
            let tg = trigamma(a)?;
            SymMatrix::from_lower(2, |i, j| match (i, j) {
                (0, 0) => -tg,
                (1, 0) => 1.0 / b,
                _ => -a / (b * b),
            })
        }
        Family::Poisson => SymMatrix::diag(&[-scalar(obs) / (theta[0] * theta[0])]),
        Family::Multinomial6 => {
            let p6 = last_prob(theta);
            match obs {
                Observation::Category(5) => SymMatrix::from_lower(5, |_, _| -1.0 / (p6 * p6)),
                Observation::Category(c) => {
                    let mut d = [0.0; 5];
                    d[*c] = -1.0 / (theta[*c] * theta[*c]);
                    SymMatrix::diag(&d)
                }
                _ => unreachable!(),
            }
        }
        Family::Binormal => {
            // Central differences of the analytic score.
            let Observation::Pair(x, y) = obs else {
                unreachable!()
            };
            let mut jac = [[0.0; 5]; 5];
            for (k, col) in jac.iter_mut().enumerate() {
                let h = 1e-5 * theta[k].abs().max(if k == 4 { 0.1 } else { 1.0 });
                let mut up = theta.to_vec();
                let mut down = theta.to_vec();
                up[k] += h;
                down[k] -= h;
                let su = binormal_score(*x, *y, &up);
                let sd = binormal_score(*x, *y, &down);
                for i in 0..5 {
                    col[i] = (su[i] - sd[i]) / (2.0 * h);
                }
            }
            SymMatrix::from_lower(5, |i, j| 0.5 * (jac[i][j] + jac[j][i]))
        }
        Family::NormalRegression { covariates } => {
            let q = *covariates;
            let (y, x) = regression(obs);
            let sigma = theta[q];
            let s2 = sigma * sigma;
            let z = (y - dot(x, &theta[..q])) / sigma;
            SymMatrix::from_lower(q + 1, |i, j| {
                if i < q {
                    -x[i] * x[j] / s2
                } else if j < q {
                    -2.0 * z * x[j] / s2
                } else {
                    (1.0 - 3.0 * z * z) / s2
                }
            })
        }
        Family::PoissonRegression { .. } => {
            let (_, x) = regression(obs);
            let mu = dot(x, theta).exp();
            SymMatrix::from_lower(x.len(), |i, j| -mu * x[i] * x[j])
        }
        Family::MarkovTwoState => {
            let Observation::Transition { from, to } = obs else {
                unreachable!()
            };
            let prob = theta[*from];
            let mut d = [0.0; 2];
            d[*from] = if from != to {
                -1.0 / (prob * prob)
            } else {
                -1.0 / ((1.0 - prob) * (1.0 - prob))
            };
            SymMatrix::diag(&d)
        }
    })
}

pub(super) fn conditional_info(
    family: &Family,
    obs: Option<&Observation>,
    theta: &[f64],
) -> Result<SymMatrix> {
    Ok(match family {
        Family::Normal => {
            let s2 = theta[1] * theta[1];
            SymMatrix::diag(&[1.0 / s2, 2.0 / s2])
        }
        Family::Gamma => {
            let (a, b) = (theta[0], theta[1]);
            let tg = trigamma(a)?;
            SymMatrix::from_lower(2, |i, j| match (i, j) {
                (0, 0) => tg,
                (1, 0) => -1.0 / b,
                _ => a / (b * b),
            })
        }
        Family::Poisson => SymMatrix::diag(&[1.0 / theta[0]]),
        Family::Multinomial6 => {
            let p6 = last_prob(theta);
            SymMatrix::from_lower(5, |i, j| {
                let off = 1.0 / p6;
                if i == j {
                    1.0 / theta[i] + off
                } else {
                    off
                }
            })
        }
        Family::Binormal => binormal_info(theta),
        Family::NormalRegression { covariates } => {
            let q = *covariates;
            let (_, x) = regression(obs.expect("regression info needs covariates"));
            let s2 = theta[q] * theta[q];
            SymMatrix::from_lower(q + 1, |i, j| {
                if i < q {
                    x[i] * x[j] / s2
                } else if j < q {
                    0.0
                } else {
                    2.0 / s2
                }
            })
        }
        Family::PoissonRegression { .. } => {
            let (_, x) = regression(obs.expect("regression info needs covariates"));
            let mu = dot(x, theta).exp();
            SymMatrix::from_lower(x.len(), |i, j| mu * x[i] * x[j])
        }
        Family::MarkovTwoState => {
            let Some(Observation::Transition { from, .. }) = obs else {
                unreachable!("Markov info needs the lagged state")
            };
            let prob = theta[*from];
            let mut d = [0.0; 2];
            d[*from] = 1.0 / (prob * (1.0 - prob));
            SymMatrix::diag(&d)
        }
    })
}

/// Fisher information of the binormal in the order `(mu1, sigma1, mu2, sigma2, rho)`.
fn binormal_info(theta: &[f64]) -> SymMatrix {
    let (s1, s2, r) = (theta[1], theta[3], theta[4]);
    let w = 1.0 - r * r;
    let mut m = [[0.0; 5]; 5];
    m[0][0] = 1.0 / (w * s1 * s1);
    m[2][2] = 1.0 / (w * s2 * s2);
    m[0][2] = -r / (w * s1 * s2);
    m[1][1] = (2.0 - r * r) / (w * s1 * s1);
    m[3][3] = (2.0 - r * r) / (w * s2 * s2);
    m[1][3] = -r * r / (w * s1 * s2);
    m[1][4] = -r / (w * s1);
    m[3][4] = -r / (w * s2);
    m[4][4] = (1.0 + r * r) / (w * w);
    SymMatrix::from_lower(5, |i, j| m[j][i] + if i != j { m[i][j] } else { 0.0 })
}

/// Maximum-likelihood estimate and iteration count.
pub(super) fn estimate(family: &Family, data: &[Observation]) -> Result<(Vec<f64>, usize)> {
    let n = data.len() as f64;
    match family {
        Family::Normal => {
            let mean = data.iter().map(scalar).sum::<f64>() / n;
            let var = data.iter().map(|o| (scalar(o) - mean).powi(2)).sum::<f64>() / n;
            if !(var > 0.0) {
                return Err(Error::DegenerateFit("zero sample variance".into()));
            }
            Ok((vec![mean, var.sqrt()], 0))
        }
        Family::Gamma => fit_gamma(data),
        Family::Poisson => {
            let mean = data.iter().map(scalar).sum::<f64>() / n;
            if mean == 0.0 {
                return Err(Error::DegenerateFit("all counts are zero".into()));
            }
            Ok((vec![mean], 0))
        }
        Family::Multinomial6 => {
            let mut counts = [0usize; 6];
            for obs in data {
                if let Observation::Category(c) = obs {
                    counts[*c] += 1;
                }
            }
            if let Some(c) = counts.iter().position(|&c| c == 0) {
                return Err(Error::DegenerateFit(format!(
                    "category {} never observed",
                    c + 1
                )));
            }
            Ok((counts[..5].iter().map(|&c| c as f64 / n).collect(), 0))
        }
        Family::Binormal => {
            let pairs: Vec<(f64, f64)> = data
                .iter()
                .map(|o| match o {
                    Observation::Pair(x, y) => (*x, *y),
                    _ => unreachable!(),
                })
                .collect();
            let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for (x, y) in &pairs {
                sxx += (x - mx) * (x - mx);
                syy += (y - my) * (y - my);
                sxy += (x - mx) * (y - my);
            }
            if !(sxx > 0.0 && syy > 0.0) {
                return Err(Error::DegenerateFit(
                    "zero variance in a binormal margin".into(),
                ));
            }
            let rho = sxy / (sxx * syy).sqrt();
            if rho.abs() >= 1.0 - 1e-12 {
                return Err(Error::DegenerateFit("sample correlation is +-1".into()));
            }
            Ok((vec![mx, (sxx / n).sqrt(), my, (syy / n).sqrt(), rho], 0))
        }
        Family::NormalRegression { covariates } => {
            let q = *covariates;
            let (gram, xty) = normal_equations(data, q);
            let beta = gram.solve(&xty)?;
            let rss: f64 = data
                .iter()
                .map(|o| {
                    let (y, x) = regression(o);
                    (y - dot(x, &beta)).powi(2)
                })
                .sum();
            if !(rss > 0.0) {
                return Err(Error::DegenerateFit("zero residual variance".into()));
            }
            let mut theta = beta;
            theta.push((rss / n).sqrt());
            Ok((theta, 0))
        }
        Family::PoissonRegression { covariates } => fit_poisson_regression(data, *covariates),
        Family::MarkovTwoState => {
            let mut counts = [[0usize; 2]; 2];
            for obs in data {
                if let Observation::Transition { from, to } = obs {
                    counts[*from][*to] += 1;
                }
            }
            let mut theta = Vec::with_capacity(2);
            for (state, row) in counts.iter().enumerate() {
                let total = row[0] + row[1];
                let leave = row[1 - state];
                if total == 0 || leave == 0 || leave == total {
                    return Err(Error::DegenerateFit(format!(
                        "transition probability out of state {state} is not interior"
                    )));
                }
                theta.push(leave as f64 / total as f64);
            }
            Ok((theta, 0))
        }
    }
}

fn normal_equations(data: &[Observation], q: usize) -> (SymMatrix, Vec<f64>) {
    let mut gram = SymMatrix::zeros(q);
    let mut xty = vec![0.0; q];
    for obs in data {
        let (y, x) = regression(obs);
        gram.add_outer(x, 1.0);
        for (acc, xv) in xty.iter_mut().zip(x) {
            *acc += y * xv;
        }
    }
    (gram, xty)
}

/// Solves `ln a - psi(a) = ln(mean y) - mean(ln y)` by Newton steps in `ln a`,
/// falling back to bisection whenever a step leaves the current bracket.
fn fit_gamma(data: &[Observation]) -> Result<(Vec<f64>, usize)> {
    let n = data.len() as f64;
    let mean = data.iter().map(scalar).sum::<f64>() / n;
    let mean_log = data.iter().map(|o| scalar(o).ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if !(s > 1e-14) {
        return Err(Error::DegenerateFit("all observations are equal".into()));
    }
    let g = |x: f64| -> Result<(f64, f64)> {
        let a = x.exp();
        Ok((x - digamma(a)? - s, 1.0 - a * trigamma(a)?))
    };

    let a0 = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    let mut x = a0.ln();
    // g is decreasing in x; bracket the root
    let (mut lo, mut hi) = (x - 1.0, x + 1.0);
    while g(lo)?.0 <= 0.0 {
        lo -= 2.0 * (x - lo);
        if lo < -700.0 {
            return Err(Error::DegenerateFit(
                "Gamma shape estimate underflows".into(),
            ));
        }
    }
    while g(hi)?.0 >= 0.0 {
        hi += 2.0 * (hi - x);
        if hi > 700.0 {
            return Err(Error::DegenerateFit(
                "Gamma shape estimate overflows".into(),
            ));
        }
    }

    for iter in 1..=GAMMA_MAX_ITER {
        let (value, slope) = g(x)?;
        if value > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - value / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= GAMMA_TOLERANCE * x.abs().max(1.0) {
            let a = x.exp();
            return Ok((vec![a, a / mean], iter));
        }
    }
    Err(Error::DegenerateFit(format!(
        "Gamma shape equation did not converge in {GAMMA_MAX_ITER} iterations"
    )))
}

/// Newton-Raphson with step halving; converged once the mean score is below
/// `POISREG_TOLERANCE` in sup-norm.
fn fit_poisson_regression(data: &[Observation], q: usize) -> Result<(Vec<f64>, usize)> {
    let n = data.len() as f64;
    let (gram, _) = normal_equations(data, q);
    gram.inverse(crate::numerics::DEFAULT_EIGEN_FLOOR)?;
    let mean_y = data.iter().map(|o| regression(o).0).sum::<f64>() / n;
    if mean_y == 0.0 {
        return Err(Error::DegenerateFit("all counts are zero".into()));
    }

    let mut beta = vec![0.0; q];
    if let Some(j) = (0..q).find(|&j| data.iter().all(|o| regression(o).1[j] == 1.0)) {
        beta[j] = (mean_y + 0.5).ln();
    }

    let loglik = |beta: &[f64]| -> f64 {
        data.iter()
            .map(|o| {
                let (y, x) = regression(o);
                let eta = dot(x, beta);
                y * eta - eta.exp()
            })
            .sum()
    };

    let mut current = loglik(&beta);
    for iter in 0..=POISREG_MAX_ITER {
        let mut grad = vec![0.0; q];
        let mut info = SymMatrix::zeros(q);
        for obs in data {
            let (y, x) = regression(obs);
            let mu = dot(x, &beta).exp();
            for (g, xv) in grad.iter_mut().zip(x) {
                *g += (y - mu) * xv;
            }
            info.add_outer(x, mu);
        }
        if grad.iter().all(|g| (g / n).abs() < POISREG_TOLERANCE) {
            let collapsed = data
                .iter()
                .any(|o| dot(regression(o).1, &beta).exp() < SEPARATION_FLOOR * mean_y);
            if collapsed {
                return Err(Error::DegenerateFit(
                    "Poisson regression fitted means collapse to zero (separation)".into(),
                ));
            }
            return Ok((beta, iter));
        }
        if iter == POISREG_MAX_ITER {
            break;
        }
        let step = info.solve(&grad).map_err(|_| {
            Error::DegenerateFit(
                "Poisson regression information became singular (separation?)".into(),
            )
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let value = loglik(&trial);
            if value.is_finite() && value >= current - 1e-12 * current.abs() {
                beta = trial;
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::DegenerateFit(
        "Poisson regression did not converge (possible separation)".into(),
    ))
}
