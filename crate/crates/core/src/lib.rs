#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod changepoint;
pub mod error;
pub mod models;
pub mod monitoring;
pub mod nulldist;
pub mod numerics;
pub mod power;
pub mod stats;

pub use error::{Error, ErrorClass, Result};
