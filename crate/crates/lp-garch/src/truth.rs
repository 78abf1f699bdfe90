//! Benchmark estimator: the AR(1)-GARCH(1,1) model that generated the data.
//!
//! Refitting the true model on every replication makes the benchmark's
//! impulse-response dispersion reflect estimation uncertainty, the same
//! uncertainty the LP variants face.

use crate::error::{Error, Result};
use crate::garch::{fit_mle, ExogTerms, FitResult, VarianceKind};
use crate::num::Scalar;
use crate::optim::OptimizerConfig;

/// Fitted AR(1)-GARCH(1,1) model and its implied impulse responses.
#[derive(Debug, Clone)]
pub struct TrueModelFit<S> {
    /// One-step fit of `y_{t+1}` on `y_t` with GARCH(1,1) errors.
    pub fit: FitResult<S>,
    /// Implied responses `beta1^h` for `h = 1..=H`.
    pub irf: Vec<S>,
}

/// Impulse responses of an AR(1): `(beta1, beta1^2, ..., beta1^H)`.
pub fn irf_ar<S: Scalar>(beta1: S, max_horizon: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(max_horizon);
    let mut acc = S::one();
    for _ in 0..max_horizon {
        acc = acc * beta1;
        out.push(acc);
    }
    out
}

/// Fit the AR(1)-GARCH(1,1) benchmark on `y` and derive `H` responses.
pub fn fit_true_model<S: Scalar>(
    y: &[S],
    max_horizon: usize,
    cfg: &OptimizerConfig,
) -> Result<TrueModelFit<S>> {
    if y.len() < 30 {
        return Err(Error::InsufficientData {
            required: 30,
            actual: y.len(),
        });
    }
    if max_horizon < 1 {
        return Err(Error::Domain("max horizon must be >= 1".into()));
    }
    let regressor = &y[..y.len() - 1];
    let response = &y[1..];
    let fit = fit_mle(
        response,
        regressor,
        VarianceKind::Garch,
        &ExogTerms::none(),
        cfg,
    )?;
    let irf = irf_ar(fit.mean_coeffs.1, max_horizon);
    Ok(TrueModelFit { fit, irf })
}
