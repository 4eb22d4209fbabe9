//! Polygamma, log-gamma and chi-squared distribution functions.
//!
//! The polygamma and log-gamma routines shift the argument above
//! [`ASYMPTOTIC_CUTOFF`] with the functional recurrences and then sum the
//! asymptotic (Bernoulli) series.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

const ASYMPTOTIC_CUTOFF: f64 = 10.0;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} requires a positive finite argument, got {x}"
        )))
    }
}

/// Digamma function `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_CUTOFF {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // -sum B_2k / (2k x^2k), k = 1..7
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(shift + x.ln() - 0.5 / x - series)
}

/// Trigamma function `psi'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive(x, "trigamma")?;
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_CUTOFF {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // sum B_2k / x^(2k+1), k = 1..7
    let series = (1.0 / 6.0
        - r * (1.0 / 30.0
            - r * (1.0 / 42.0
                - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0))))))
        * r
        / x;
    Ok(shift + 1.0 / x + 0.5 * r + series)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive(x, "ln_gamma")?;
    let mut x = x;
    let mut product = 1.0;
    while x < ASYMPTOTIC_CUTOFF {
        product *= x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = (1.0 / 12.0
        - r * (1.0 / 360.0
            - r * (1.0 / 1260.0
                - r * (1.0 / 1680.0 - r * (1.0 / 1188.0 - r * (691.0 / 360360.0 - r / 156.0))))))
        / x;
    Ok((x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series - product.ln())
}

/// Central chi-squared CDF.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(0.5 * df, 0.5 * x)
    }
}

/// Upper tail `1 - F(x)` of the central chi-squared distribution.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        statrs::function::gamma::gamma_ur(0.5 * df, 0.5 * x)
    }
}

/// Quantile of the central chi-squared distribution.
pub fn chi2_quantile(prob: f64, df: f64) -> Result<f64> {
    let dist = ChiSquared::new(df)
        .map_err(|e| Error::InvalidArgument(format!("chi-squared df {df}: {e}")))?;
    Ok(dist.inverse_cdf(prob))
}

/// Noncentral chi-squared CDF, as a Poisson(`lambda / 2`) mixture of central
/// chi-squared CDFs with `df + 2k` degrees of freedom.
pub fn noncentral_chi2_cdf(x: f64, df: u32, lambda: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be positive".into(),
        ));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noncentrality must be non-negative, got {lambda}"
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let df = f64::from(df);
    if lambda == 0.0 {
        return Ok(chi2_cdf(x, df));
    }
    let half = 0.5 * lambda;
    let log_weight = |k: f64| -> f64 { -half + k * half.ln() - ln_gamma(k + 1.0).unwrap_or(0.0) };
    let mode = half.floor();

    let mut total = 0.0;
    let mut k = mode;
    loop {
        let w = log_weight(k).exp();
        total += w * chi2_cdf(x, df + 2.0 * k);
        if w < 1e-18 && k > mode {
            break;
        }
        k += 1.0;
    }
    let mut k = mode - 1.0;
    while k >= 0.0 {
        let w = log_weight(k).exp();
        total += w * chi2_cdf(x, df + 2.0 * k);
        if w < 1e-18 {
            break;
        }
        k -= 1.0;
    }
    Ok(total.clamp(0.0, 1.0))
}
