//! Per-horizon local-projection datasets and the four LP estimators.
//!
//! Estimation is recursive in the horizon: each fitted horizon stores its
//! residuals, and later horizons feed on them through the variance
//! equation's exogenous terms. Horizon 1 always estimates the plain
//! LP-GARCH specification for the GARCH-family models because no earlier
//! residuals exist yet.

use crate::error::{Error, Result};
use crate::garch::{fit_mle, ols_fit, ExogTerms, FitResult, VarianceKind, VarianceSpec};
use crate::num::{mean_sq, Scalar};
use crate::optim::OptimizerConfig;

/// The four local-projection estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpModel {
    /// Per-horizon least squares with constant error variance.
    Lp,
    /// GARCH(1,1) projection errors.
    LpGarch,
    /// GARCH plus the previous horizon's squared residuals.
    LpGarchX,
    /// GARCH-X plus heterogeneous average terms.
    LpGarchHar,
}

impl LpModel {
    pub const ALL: [LpModel; 4] = [
        LpModel::Lp,
        LpModel::LpGarch,
        LpModel::LpGarchX,
        LpModel::LpGarchHar,
    ];

    /// Display name used in tables and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            LpModel::Lp => "LP",
            LpModel::LpGarch => "LP-GARCH",
            LpModel::LpGarchX => "LP-GARCHX",
            LpModel::LpGarchHar => "LP-GARCH-HAR",
        }
    }

    /// Variance law this model estimates at horizon `h`.
    ///
    /// Returns `None` for the plain LP model, which is fit by least squares.
    fn variance_kind(self, h: usize) -> Option<VarianceKind> {
        match self {
            LpModel::Lp => None,
            LpModel::LpGarch => Some(VarianceKind::Garch),
            LpModel::LpGarchX => {
                if h == 1 {
                    Some(VarianceKind::Garch)
                } else {
                    Some(VarianceKind::GarchX)
                }
            }
            LpModel::LpGarchHar => {
                if h == 1 {
                    Some(VarianceKind::Garch)
                } else {
                    Some(VarianceKind::GarchHar { with_bar: h - 1 > 5 })
                }
            }
        }
    }
}

/// One horizon's fitted model.
#[derive(Debug, Clone)]
pub struct HorizonFit<S> {
    /// Projection horizon, `1..=H`.
    pub h: usize,
    /// Which estimator produced this fit.
    pub model: LpModel,
    /// Estimation output; `fit.n_obs == T - h`.
    pub fit: FitResult<S>,
}

/// Per-horizon residual vectors aligned on the shared calendar index.
///
/// The vector for horizon `h` has length `T - h`; entry `t` of every vector
/// refers to the same calendar date, so truncating a longer vector to a
/// shorter sample just drops trailing observations.
#[derive(Debug, Clone, Default)]
pub struct ResidualMatrix<S> {
    t_len: usize,
    by_horizon: Vec<Vec<S>>,
}

impl<S: Scalar> ResidualMatrix<S> {
    /// Empty matrix for a series of length `t_len`.
    pub fn new(t_len: usize) -> Self {
        Self {
            t_len,
            by_horizon: Vec::new(),
        }
    }

    /// Number of horizons stored so far.
    pub fn horizons(&self) -> usize {
        self.by_horizon.len()
    }

    /// Residuals for horizon `h`, if stored.
    pub fn get(&self, h: usize) -> Option<&[S]> {
        if h == 0 {
            return None;
        }
        self.by_horizon.get(h - 1).map(|v| v.as_slice())
    }

    /// Append the residuals for the next horizon.
    ///
    /// Horizons must be pushed in order starting at 1, and the vector for
    /// horizon `h` must have length `T - h`.
    pub fn push(&mut self, h: usize, residuals: Vec<S>) -> Result<()> {
        if h != self.by_horizon.len() + 1 {
            return Err(Error::PipelineOrder(format!(
                "expected horizon {} next, got {h}",
                self.by_horizon.len() + 1
            )));
        }
        let expected = self.t_len.checked_sub(h).ok_or_else(|| {
            Error::Domain(format!("horizon {h} exceeds series length {}", self.t_len))
        })?;
        if residuals.len() != expected {
            return Err(Error::Domain(format!(
                "residual vector for horizon {h} must have length {expected}, got {}",
                residuals.len()
            )));
        }
        self.by_horizon.push(residuals);
        Ok(())
    }
}

/// Split a series into the horizon-`h` projection sample.
///
/// Returns `(regressor, response)` with `regressor[t] = y_t` and
/// `response[t] = y_{t+h}`, both of length `T - h`. Requires
/// `1 <= h <= T - 3` so at least three observations remain.
pub fn build_horizon_dataset<S: Scalar>(y: &[S], h: usize) -> Result<(Vec<S>, Vec<S>)> {
    let t_len = y.len();
    if h < 1 || h + 3 > t_len {
        return Err(Error::Domain(format!(
            "horizon must satisfy 1 <= h <= T - 3 (T = {t_len}), got {h}"
        )));
    }
    let regressor = y[..t_len - h].to_vec();
    let response = y[h..].to_vec();
    Ok((regressor, response))
}

/// Heterogeneous averages of squared residuals from earlier horizons.
///
/// `tilde_sq[t]` averages the squared residuals of horizons `1..h-1`;
/// `bar_sq[t]` averages those of horizons `1..5` and is produced only when
/// `h - 1 > 5`. Both are truncated to `sample_len` entries.
pub fn har_aggregates<S: Scalar>(
    residuals: &ResidualMatrix<S>,
    h: usize,
    sample_len: usize,
) -> Result<(Vec<S>, Option<Vec<S>>)> {
    if h < 2 {
        return Err(Error::Domain(format!(
            "heterogeneous aggregates need h >= 2, got {h}"
        )));
    }
    for i in 1..h {
        match residuals.get(i) {
            None => {
                return Err(Error::PipelineOrder(format!(
                    "residuals for horizon {i} are not available yet (needed by horizon {h})"
                )))
            }
            Some(v) if v.len() < sample_len => {
                return Err(Error::PipelineOrder(format!(
                    "residuals for horizon {i} have length {} < sample length {sample_len}",
                    v.len()
                )))
            }
            Some(_) => {}
        }
    }

    let average_over = |count: usize| -> Vec<S> {
        let inv = S::one() / S::from_usize(count).unwrap();
        (0..sample_len)
            .map(|t| {
                let mut acc = S::zero();
                for i in 1..=count {
                    let e = residuals.get(i).unwrap()[t];
                    acc += e * e;
                }
                acc * inv
            })
            .collect()
    };

    let tilde_sq = average_over(h - 1);
    let bar_sq = (h - 1 > 5).then(|| average_over(5));
    Ok((tilde_sq, bar_sq))
}

/// Least-squares fit wrapped as a [`FitResult`] with the constant-variance
/// maximum-likelihood solution (`gamma` = mean squared residual).
fn ols_fit_result<S: Scalar>(regressor: &[S], response: &[S]) -> Result<FitResult<S>> {
    let ols = ols_fit(regressor, response)?;
    let n = ols.residuals.len();
    // Floor keeps the variance strictly positive on noiseless input.
    let gamma = mean_sq(&ols.residuals).max(S::min_positive_value());
    let variances = vec![gamma; n];
    let two_pi = S::TAU();
    let mut nll = S::zero();
    for &e in &ols.residuals {
        nll += (two_pi * gamma).ln() + e * e / gamma;
    }
    Ok(FitResult {
        mean_coeffs: (ols.intercept, ols.slope),
        variance_spec: VarianceSpec::Constant { gamma },
        residuals: ols.residuals,
        variances,
        loglik: -S::from_f64_c(0.5) * nll,
        converged: true,
        n_restarts_used: 0,
        n_obs: n,
        collinear_exog: false,
    })
}

/// Estimate one LP model at every horizon `1..=H`.
///
/// Returns the per-horizon fits and the residual matrix they produced. The
/// horizons run in order; each horizon's residuals are stored before the
/// next horizon is estimated so the exogenous variance terms can be built
/// from them. Singular regressions abort the pipeline with an error;
/// non-convergence is recorded on the affected [`HorizonFit`] and the
/// pipeline continues.
pub fn estimate_all_horizons<S: Scalar>(
    y: &[S],
    max_horizon: usize,
    model: LpModel,
    cfg: &OptimizerConfig,
) -> Result<(Vec<HorizonFit<S>>, ResidualMatrix<S>)> {
    let t_len = y.len();
    if max_horizon < 1 {
        return Err(Error::Domain("max horizon must be >= 1".into()));
    }
    if t_len < max_horizon + 30 {
        return Err(Error::InsufficientData {
            required: max_horizon + 30,
            actual: t_len,
        });
    }

    let mut fits = Vec::with_capacity(max_horizon);
    let mut residuals = ResidualMatrix::new(t_len);

    for h in 1..=max_horizon {
        let (regressor, response) = build_horizon_dataset(y, h)?;
        let sample_len = regressor.len();

        let fit = match model.variance_kind(h) {
            None => ols_fit_result(&regressor, &response)?,
            Some(kind) => {
                let exog = build_exog(model, h, sample_len, &residuals)?;
                fit_mle(&response, &regressor, kind, &exog, cfg)?
            }
        };

        residuals.push(h, fit.residuals.clone())?;
        fits.push(HorizonFit { h, model, fit });
    }
    Ok((fits, residuals))
}

/// Assemble the exogenous variance terms the model consumes at horizon `h`.
fn build_exog<S: Scalar>(
    model: LpModel,
    h: usize,
    sample_len: usize,
    residuals: &ResidualMatrix<S>,
) -> Result<ExogTerms<S>> {
    if h == 1 {
        return Ok(ExogTerms::none());
    }
    let prev = residuals.get(h - 1).ok_or_else(|| {
        Error::PipelineOrder(format!(
            "residuals for horizon {} are not available yet (needed by horizon {h})",
            h - 1
        ))
    })?;
    let prev_sq: Vec<S> = prev[..sample_len].iter().map(|&e| e * e).collect();

    match model {
        LpModel::Lp | LpModel::LpGarch => Ok(ExogTerms::none()),
        LpModel::LpGarchX => Ok(ExogTerms {
            prev_sq: Some(prev_sq),
            ..ExogTerms::none()
        }),
        LpModel::LpGarchHar => {
            let (tilde_sq, bar_sq) = har_aggregates(residuals, h, sample_len)?;
            Ok(ExogTerms {
                prev_sq: Some(prev_sq),
                tilde_sq: Some(tilde_sq),
                bar_sq,
            })
        }
    }
}
