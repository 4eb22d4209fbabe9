//! Parametric families: log-densities, score functions, information matrices
//! and maximum-likelihood fitting.
//!
//! Variance estimators use divisor `n`, never `n - 1`, matching the
//! maximum-likelihood convention (`sigma_hat^2 = n^{-1} sum (y - ybar)^2`).

mod families;
pub mod simulate;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{SymMatrix, DEFAULT_EIGEN_FLOOR};

/// Stable family identifiers used on the command line and in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Normal,
    Gamma,
    Poisson,
    Multinomial6,
    Binormal,
    NormalRegression,
    PoissonRegression,
    MarkovTwoState,
}

impl FamilyId {
    pub const ALL: [FamilyId; 8] = [
        FamilyId::Normal,
        FamilyId::Gamma,
        FamilyId::Poisson,
        FamilyId::Multinomial6,
        FamilyId::Binormal,
        FamilyId::NormalRegression,
        FamilyId::PoissonRegression,
        FamilyId::MarkovTwoState,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::Normal => "normal",
            FamilyId::Gamma => "gamma",
            FamilyId::Poisson => "poisson",
            FamilyId::Multinomial6 => "multinomial6",
            FamilyId::Binormal => "binormal",
            FamilyId::NormalRegression => "normreg",
            FamilyId::PoissonRegression => "poisreg",
            FamilyId::MarkovTwoState => "markov2",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(
            self,
            FamilyId::NormalRegression | FamilyId::PoissonRegression
        )
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family `{s}`")))
    }
}

/// One data point, shaped according to its family.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// Normal, Gamma and Poisson responses (Poisson counts stored as whole numbers).
    Scalar(f64),
    /// Die face `0..6` of the six-category multinomial.
    Category(usize),
    /// Binormal pair `(x, y)`.
    Pair(f64, f64),
    /// Regression response with its covariate row (include a `1.0` for an intercept).
    Regression { y: f64, x: Vec<f64> },
    /// Two-state Markov transition `from -> to`, states `0` or `1`.
    Transition { from: usize, to: usize },
}

/// Parameter vector tagged with its family.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    family: FamilyId,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of [`Family::fit`].
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    /// Model information at the estimate, averaged over the data (`J_hat`).
    pub expected_info: SymMatrix,
    /// `-n^{-1} sum i(Y_i, theta_hat)`.
    pub observed_info: SymMatrix,
    /// Empirical covariance of the per-observation scores (`K_hat`), divisor `n`.
    pub score_variance: SymMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// A parametric family. Regression families carry the covariate dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `N(mu, sigma^2)`, parameters `(mu, sigma)`.
    Normal,
    /// Gamma with shape `a` and rate `b`, density `b^a y^(a-1) e^(-b y) / Gamma(a)`.
    Gamma,
    /// Poisson with mean `mu`.
    Poisson,
    /// Six categories, parameterised by `p_1..p_5`; `p_6 = 1 - sum`.
    Multinomial6,
    /// Bivariate normal `(mu_1, sigma_1, mu_2, sigma_2, rho)`.
    Binormal,
    /// `y | x ~ N(x^T beta, sigma^2)`, parameters `(beta_1..beta_q, sigma)`.
    NormalRegression { covariates: usize },
    /// `y | x ~ Poisson(exp(x^T beta))`.
    PoissonRegression { covariates: usize },
    /// Two-state chain with transition probabilities `(p_01, p_10)`; the first
    /// state is conditioned on.
    MarkovTwoState,
}

impl Family {
    pub fn from_id(id: FamilyId, covariates: usize) -> Result<Family> {
        let needs_covariates = id.is_regression();
        if needs_covariates && covariates == 0 {
            return Err(Error::InvalidArgument(format!(
                "family `{id}` needs at least one covariate column"
            )));
        }
        Ok(match id {
            FamilyId::Normal => Family::Normal,
            FamilyId::Gamma => Family::Gamma,
            FamilyId::Poisson => Family::Poisson,
            FamilyId::Multinomial6 => Family::Multinomial6,
            FamilyId::Binormal => Family::Binormal,
            FamilyId::NormalRegression => Family::NormalRegression { covariates },
            FamilyId::PoissonRegression => Family::PoissonRegression { covariates },
            FamilyId::MarkovTwoState => Family::MarkovTwoState,
        })
    }

    pub fn id(&self) -> FamilyId {
        match self {
            Family::Normal => FamilyId::Normal,
            Family::Gamma => FamilyId::Gamma,
            Family::Poisson => FamilyId::Poisson,
            Family::Multinomial6 => FamilyId::Multinomial6,
            Family::Binormal => FamilyId::Binormal,
            Family::NormalRegression { .. } => FamilyId::NormalRegression,
            Family::PoissonRegression { .. } => FamilyId::PoissonRegression,
            Family::MarkovTwoState => FamilyId::MarkovTwoState,
        }
    }

    /// Number of parameters `p`.
    pub fn dim(&self) -> usize {
        match self {
            Family::Normal | Family::Gamma | Family::MarkovTwoState => 2,
            Family::Poisson => 1,
            Family::Multinomial6 | Family::Binormal => 5,
            Family::NormalRegression { covariates } => covariates + 1,
            Family::PoissonRegression { covariates } => *covariates,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let fixed = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        match self {
            Family::Normal => fixed(&["mu", "sigma"]),
            Family::Gamma => fixed(&["a", "b"]),
            Family::Poisson => fixed(&["mu"]),
            Family::Multinomial6 => fixed(&["p1", "p2", "p3", "p4", "p5"]),
            Family::Binormal => fixed(&["mu1", "sigma1", "mu2", "sigma2", "rho"]),
            Family::NormalRegression { covariates } => (1..=*covariates)
                .map(|j| format!("beta{j}"))
                .chain(std::iter::once("sigma".to_string()))
                .collect(),
            Family::PoissonRegression { covariates } => {
                (1..=*covariates).map(|j| format!("beta{j}")).collect()
            }
            Family::MarkovTwoState => fixed(&["p01", "p10"]),
        }
    }

    /// Smallest sample for which the estimate can be interior.
    pub fn min_sample_size(&self) -> usize {
        match self {
            Family::Poisson => 1,
            Family::Normal | Family::Gamma | Family::MarkovTwoState => 2,
            Family::Binormal => 3,
            Family::Multinomial6 => 6,
            Family::NormalRegression { covariates } => covariates + 1,
            Family::PoissonRegression { covariates } => *covariates,
        }
    }

    /// Validates `values` against the parameter region and tags them.
    pub fn params(&self, values: Vec<f64>) -> Result<ParamVector> {
        self.check_params(&values)?;
        Ok(ParamVector {
            family: self.id(),
            values,
        })
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "family `{}` has {} parameters, got {}",
                self.id(),
                self.dim(),
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        let ok = match self {
            Family::Normal => theta[1] > 0.0,
            Family::Gamma => theta[0] > 0.0 && theta[1] > 0.0,
            Family::Poisson => theta[0] > 0.0,
            Family::Multinomial6 => {
                theta.iter().all(|&p| p > 0.0 && p < 1.0) && theta.iter().sum::<f64>() < 1.0
            }
            Family::Binormal => theta[1] > 0.0 && theta[3] > 0.0 && theta[4].abs() < 1.0,
            Family::NormalRegression { covariates } => theta[*covariates] > 0.0,
            Family::PoissonRegression { .. } => true,
            Family::MarkovTwoState => theta.iter().all(|&p| p > 0.0 && p < 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "parameters {theta:?} outside the region of family `{}`",
                self.id()
            )))
        }
    }

    /// Checks the observation's shape and support.
    pub fn check_observation(&self, obs: &Observation) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("{what} for family `{}`", self.id())));
        match (self, obs) {
            (Family::Normal, Observation::Scalar(y)) if y.is_finite() => Ok(()),
            (Family::Gamma, Observation::Scalar(y)) => {
                if *y > 0.0 && y.is_finite() {
                    Ok(())
                } else {
                    bad(&format!("observation {y} outside (0, inf)"))
                }
            }
            (Family::Poisson, Observation::Scalar(y)) => check_count(*y, self.id()),
            (Family::Multinomial6, Observation::Category(c)) => {
                if *c < 6 {
                    Ok(())
                } else {
                    bad(&format!("category {c} outside 0..6"))
                }
            }
            (Family::Binormal, Observation::Pair(x, y)) if x.is_finite() && y.is_finite() => Ok(()),
            (Family::NormalRegression { covariates }, Observation::Regression { y, x })
            | (Family::PoissonRegression { covariates }, Observation::Regression { y, x }) => {
                if x.len() != *covariates {
                    return bad(&format!(
                        "covariate row of length {} (expected {covariates})",
                        x.len()
                    ));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return bad("non-finite covariate");
                }
                match self {
                    Family::PoissonRegression { .. } => check_count(*y, self.id()),
                    _ if y.is_finite() => Ok(()),
                    _ => bad("non-finite response"),
                }
            }
            (Family::MarkovTwoState, Observation::Transition { from, to })
                if *from < 2 && *to < 2 =>
            {
                Ok(())
            }
            _ => bad(&format!("observation {obs:?} of the wrong shape")),
        }
    }

    fn check_data(&self, data: &[Observation]) -> Result<()> {
        data.iter().try_for_each(|o| self.check_observation(o))
    }

    fn check_theta_family(&self, theta: &ParamVector) -> Result<()> {
        if theta.family != self.id() {
            return Err(Error::InvalidArgument(format!(
                "parameters belong to `{}`, not `{}`",
                theta.family,
                self.id()
            )));
        }
        self.check_params(&theta.values)
    }

    /// `log f(obs, theta)`.
    pub fn log_density(&self, obs: &Observation, theta: &ParamVector) -> Result<f64> {
        self.check_theta_family(theta)?;
        self.check_observation(obs)?;
        families::log_density(self, obs, &theta.values)
    }

    /// Score `u(obs, theta)`, the gradient of the log-density.
    pub fn score(&self, obs: &Observation, theta: &ParamVector) -> Result<Vec<f64>> {
        self.scores(std::slice::from_ref(obs), theta)
    }

    /// Scores of every observation, flattened row-major (`n x p`).
    pub fn scores(&self, data: &[Observation], theta: &ParamVector) -> Result<Vec<f64>> {
        self.check_theta_family(theta)?;
        self.check_data(data)?;
        families::scores(self, data, &theta.values)
    }

    /// Hessian `i(obs, theta)` of the log-density.
    pub fn hessian(&self, obs: &Observation, theta: &ParamVector) -> Result<SymMatrix> {
        self.check_theta_family(theta)?;
        self.check_observation(obs)?;
        families::hessian(self, obs, &theta.values)
    }

    /// `V(x, theta) = Var u(Y | x, theta)` for the conditioning information in `obs`
    /// (covariates, or the lagged state). Constant for i.i.d. families.
    pub fn conditional_info(&self, obs: &Observation, theta: &ParamVector) -> Result<SymMatrix> {
        self.check_theta_family(theta)?;
        self.check_observation(obs)?;
        families::conditional_info(self, Some(obs), &theta.values)
    }

    /// Information matrix `J = n^{-1} sum V(x_i, theta)`.
    ///
    /// I.i.d. families ignore `data`; regression and Markov families average
    /// over it and fail if it is empty or the design is rank deficient.
    pub fn expected_info(&self, theta: &ParamVector, data: &[Observation]) -> Result<SymMatrix> {
        self.check_theta_family(theta)?;
        self.check_data(data)?;
        let info = match self {
            Family::NormalRegression { .. }
            | Family::PoissonRegression { .. }
            | Family::MarkovTwoState => {
                if data.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "family `{}` needs data to average its information",
                        self.id()
                    )));
                }
                let mut acc = SymMatrix::zeros(self.dim());
                for obs in data {
                    acc.add_scaled(
                        &families::conditional_info(self, Some(obs), &theta.values)?,
                        1.0,
                    );
                }
                acc.scale(1.0 / data.len() as f64)
            }
            _ => families::conditional_info(self, None, &theta.values)?,
        };
        if matches!(
            self,
            Family::NormalRegression { .. } | Family::PoissonRegression { .. }
        ) {
            // rank check on the design
            info.inverse(DEFAULT_EIGEN_FLOOR)?;
        }
        Ok(info)
    }

    /// Empirical covariance (divisor `n`) of the scores at `theta`, checked for rank.
    pub fn robust_score_variance(
        &self,
        data: &[Observation],
        theta: &ParamVector,
    ) -> Result<SymMatrix> {
        let k = score_covariance(&self.scores(data, theta)?, self.dim());
        k.inverse(DEFAULT_EIGEN_FLOOR)?;
        Ok(k)
    }

    /// Maximum-likelihood fit.
    pub fn fit(&self, data: &[Observation]) -> Result<FitResult> {
        self.check_data(data)?;
        if data.len() < self.min_sample_size() {
            return Err(Error::DegenerateFit(format!(
                "family `{}` needs at least {} observations, got {}",
                self.id(),
                self.min_sample_size(),
                data.len()
            )));
        }
        let (values, iterations) = families::estimate(self, data)?;
        let theta_hat = self.params(values).map_err(|e| {
            Error::DegenerateFit(format!("estimate left the parameter region: {e}"))
        })?;
        self.summarize_fit(data, theta_hat, iterations)
    }

    fn summarize_fit(
        &self,
        data: &[Observation],
        theta_hat: ParamVector,
        iterations: usize,
    ) -> Result<FitResult> {
        let p = self.dim();
        let n = data.len() as f64;
        let expected_info = self.expected_info(&theta_hat, data)?;
        let scores = families::scores(self, data, &theta_hat.values)?;
        let score_variance = score_covariance(&scores, p);
        let mut observed = SymMatrix::zeros(p);
        let mut log_likelihood = 0.0;
        for obs in data {
            observed.add_scaled(&families::hessian(self, obs, &theta_hat.values)?, -1.0 / n);
            log_likelihood += families::log_density(self, obs, &theta_hat.values)?;
        }
        Ok(FitResult {
            theta_hat,
            expected_info,
            observed_info: observed,
            score_variance,
            log_likelihood,
            iterations,
        })
    }
}

fn check_count(y: f64, id: FamilyId) -> Result<()> {
    if y >= 0.0 && y.is_finite() && y.fract() == 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "count {y} is not a non-negative integer for family `{id}`"
        )))
    }
}

/// Covariance with divisor `n` of the rows of a flattened `n x p` array.
pub(crate) fn score_covariance(scores: &[f64], p: usize) -> SymMatrix {
    let n = scores.len() / p;
    let mut mean = vec![0.0; p];
    for row in scores.chunks_exact(p) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = SymMatrix::zeros(p);
    let mut centred = vec![0.0; p];
    for row in scores.chunks_exact(p) {
        for ((c, v), m) in centred.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        cov.add_outer(&centred, 1.0 / n as f64);
    }
    cov
}

/// Converts a two-state sequence into the transitions `(y_{i-1}, y_i)`, `i = 2..n`.
pub fn markov_transitions(states: &[usize]) -> Result<Vec<Observation>> {
    if let Some(s) = states.iter().find(|&&s| s > 1) {
        return Err(Error::Domain(format!("Markov state {s} is not 0 or 1")));
    }
    Ok(states
        .windows(2)
        .map(|w| Observation::Transition {
            from: w[0],
            to: w[1],
        })
        .collect())
}
