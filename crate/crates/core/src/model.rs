//! Common interface for models driven through a rolling origin.

use crate::error::Result;

/// A model that absorbs log-load one observation at a time and forecasts
/// from the last absorbed observation.
///
/// Implementations see the series only through [`Forecaster::observe`], so a
/// forecast can never depend on observations after its origin.
pub trait Forecaster {
    fn name(&self) -> &str;

    /// Number of observations absorbed so far; the next call to `observe`
    /// supplies the observation at this offset.
    fn observed(&self) -> usize;

    fn observe(&mut self, y_log: f64) -> Result<()>;

    /// Log-load forecasts for horizons `1..=horizon`. Horizons a model does
    /// not produce are `None`.
    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>>;
}

impl<F: Forecaster + ?Sized> Forecaster for Box<F> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn observed(&self) -> usize {
        (**self).observed()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        (**self).observe(y_log)
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        (**self).forecast(horizon)
    }
}
