//! Numerical kernels: symmetric linear algebra, special functions and the
//! seeded random-stream contract.

pub mod linalg;
pub mod rng;
pub mod special;

pub use linalg::{Matrix, SymEigen, SymMatrix, DEFAULT_EIGEN_FLOOR};
pub use rng::RngStream;
pub use special::{
    chi2_cdf, chi2_quantile, chi2_sf, digamma, ln_gamma, noncentral_chi2_cdf, trigamma,
};
