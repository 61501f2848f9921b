//! Rule-based seasonal lags and half-hourly load forecasting models.

pub mod ann;
pub mod calendar;
pub mod error;
pub mod estimate;
pub mod eval;
pub mod hwt;
pub mod sarma;
pub mod model;
pub mod rules;
pub mod series;
pub mod svdmodel;
pub mod synth;

pub use error::{Error, Result};
