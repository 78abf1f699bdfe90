//! Conditional-variance models, Gaussian likelihood, and the shared
//! maximum-likelihood fitting routine.
//!
//! A [`VarianceSpec`] describes one conditional-variance law. Beyond plain
//! GARCH(1,1) the law may load on exogenous nonnegative series supplied via
//! [`ExogTerms`]: the previous projection horizon's squared residuals, their
//! running average, and a five-horizon average. Those terms enter the
//! recursion contemporaneously (at index `t`, not `t-1`).
//!
//! Estimation maximizes the Gaussian likelihood jointly over the mean pair
//! `(c, beta)` and the variance coefficients with a Nelder-Mead search on an
//! unconstrained reparameterization, so no move of the simplex can leave the
//! feasible region.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::{mean_sq, Scalar};
use crate::optim::{nelder_mead, OptimizerConfig};

/// Which conditional-variance law to estimate.
///
/// `GarchHar` carries the indicator state for the five-horizon average term:
/// `with_bar` is true only from projection horizon 7 onward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceKind {
    /// Constant variance (single coefficient `gamma`).
    Constant,
    /// GARCH(1,1): `gamma`, `alpha1`, `alpha2`.
    Garch,
    /// GARCH(1,1) plus the previous horizon's squared residuals (`alpha3`).
    GarchX,
    /// GARCH-X plus heterogeneous average terms (`alpha4`, optionally `alpha5`).
    GarchHar { with_bar: bool },
}

impl VarianceKind {
    /// Number of variance coefficients this kind estimates.
    pub fn n_coeffs(self) -> usize {
        match self {
            VarianceKind::Constant => 1,
            VarianceKind::Garch => 3,
            VarianceKind::GarchX => 4,
            VarianceKind::GarchHar { with_bar: false } => 5,
            VarianceKind::GarchHar { with_bar: true } => 6,
        }
    }
}

/// A conditional-variance law with concrete coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceSpec<S> {
    Constant {
        gamma: S,
    },
    Garch {
        gamma: S,
        alpha1: S,
        alpha2: S,
    },
    GarchX {
        gamma: S,
        alpha1: S,
        alpha2: S,
        alpha3: S,
    },
    GarchHar {
        gamma: S,
        alpha1: S,
        alpha2: S,
        alpha3: S,
        alpha4: S,
        /// Present only when the five-horizon average term is active.
        alpha5: Option<S>,
    },
}

impl<S: Scalar> VarianceSpec<S> {
    pub fn kind(&self) -> VarianceKind {
        match self {
            VarianceSpec::Constant { .. } => VarianceKind::Constant,
            VarianceSpec::Garch { .. } => VarianceKind::Garch,
            VarianceSpec::GarchX { .. } => VarianceKind::GarchX,
            VarianceSpec::GarchHar { alpha5, .. } => VarianceKind::GarchHar {
                with_bar: alpha5.is_some(),
            },
        }
    }

    pub fn gamma(&self) -> S {
        match *self {
            VarianceSpec::Constant { gamma }
            | VarianceSpec::Garch { gamma, .. }
            | VarianceSpec::GarchX { gamma, .. }
            | VarianceSpec::GarchHar { gamma, .. } => gamma,
        }
    }

    pub fn alpha1(&self) -> Option<S> {
        match *self {
            VarianceSpec::Constant { .. } => None,
            VarianceSpec::Garch { alpha1, .. }
            | VarianceSpec::GarchX { alpha1, .. }
            | VarianceSpec::GarchHar { alpha1, .. } => Some(alpha1),
        }
    }

    pub fn alpha2(&self) -> Option<S> {
        match *self {
            VarianceSpec::Constant { .. } => None,
            VarianceSpec::Garch { alpha2, .. }
            | VarianceSpec::GarchX { alpha2, .. }
            | VarianceSpec::GarchHar { alpha2, .. } => Some(alpha2),
        }
    }

    pub fn alpha3(&self) -> Option<S> {
        match *self {
            VarianceSpec::GarchX { alpha3, .. } | VarianceSpec::GarchHar { alpha3, .. } => {
                Some(alpha3)
            }
            _ => None,
        }
    }

    pub fn alpha4(&self) -> Option<S> {
        match *self {
            VarianceSpec::GarchHar { alpha4, .. } => Some(alpha4),
            _ => None,
        }
    }

    pub fn alpha5(&self) -> Option<S> {
        match *self {
            VarianceSpec::GarchHar { alpha5, .. } => alpha5,
            _ => None,
        }
    }

    /// Check the coefficient domain: `gamma > 0`, every `alpha >= 0`, and
    /// `alpha1 + alpha2 < 1` for the endogenous pair.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma() > S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma()
            )));
        }
        let alphas = [
            self.alpha1(),
            self.alpha2(),
            self.alpha3(),
            self.alpha4(),
            self.alpha5(),
        ];
        for (i, a) in alphas.iter().enumerate() {
            if let Some(a) = a {
                if *a < S::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "alpha{} must be >= 0, got {}",
                        i + 1,
                        a
                    )));
                }
            }
        }
        if let (Some(a1), Some(a2)) = (self.alpha1(), self.alpha2()) {
            if !(a1 + a2 < S::one()) {
                return Err(Error::InvalidParameter(format!(
                    "alpha1 + alpha2 must be < 1, got {}",
                    a1 + a2
                )));
            }
        }
        Ok(())
    }
}

/// Exogenous nonnegative series entering the variance recursion at index `t`.
///
/// All present vectors must match the estimation sample length.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogTerms<S> {
    /// Squared residuals from the previous projection horizon.
    pub prev_sq: Option<Vec<S>>,
    /// Average of squared residuals over all earlier horizons.
    pub tilde_sq: Option<Vec<S>>,
    /// Average of squared residuals over the first five horizons.
    pub bar_sq: Option<Vec<S>>,
}

impl<S> Default for ExogTerms<S> {
    fn default() -> Self {
        Self {
            prev_sq: None,
            tilde_sq: None,
            bar_sq: None,
        }
    }
}

impl<S: Scalar> ExogTerms<S> {
    /// No exogenous terms.
    pub fn none() -> Self {
        Self::default()
    }

    fn validate(&self, n: usize, kind: VarianceKind) -> Result<()> {
        let check = |name: &str, v: &Option<Vec<S>>| -> Result<()> {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Specification(format!(
                        "exogenous vector {name} has length {} but the sample has {n}",
                        v.len()
                    )));
                }
                if v.iter().any(|&x| x < S::zero()) {
                    return Err(Error::Specification(format!(
                        "exogenous vector {name} must be elementwise nonnegative"
                    )));
                }
            }
            Ok(())
        };
        check("prev_sq", &self.prev_sq)?;
        check("tilde_sq", &self.tilde_sq)?;
        check("bar_sq", &self.bar_sq)?;

        let require = |name: &str, present: bool| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(Error::Specification(format!(
                    "variance kind {kind:?} requires exogenous vector {name}"
                )))
            }
        };
        match kind {
            VarianceKind::Constant | VarianceKind::Garch => {}
            VarianceKind::GarchX => require("prev_sq", self.prev_sq.is_some())?,
            VarianceKind::GarchHar { with_bar } => {
                require("prev_sq", self.prev_sq.is_some())?;
                require("tilde_sq", self.tilde_sq.is_some())?;
                if with_bar {
                    require("bar_sq", self.bar_sq.is_some())?;
                }
            }
        }
        Ok(())
    }
}

/// Flattened coefficient view used by the recursion loops.
struct PathCoeffs<S> {
    gamma: S,
    alpha1: S,
    alpha2: S,
    alpha3: S,
    alpha4: S,
    alpha5: S,
}

impl<S: Scalar> PathCoeffs<S> {
    fn from_spec(spec: &VarianceSpec<S>) -> Self {
        Self {
            gamma: spec.gamma(),
            alpha1: spec.alpha1().unwrap_or_else(S::zero),
            alpha2: spec.alpha2().unwrap_or_else(S::zero),
            alpha3: spec.alpha3().unwrap_or_else(S::zero),
            alpha4: spec.alpha4().unwrap_or_else(S::zero),
            alpha5: spec.alpha5().unwrap_or_else(S::zero),
        }
    }
}

/// Compute the conditional-variance path implied by `spec`.
///
/// For the recursive kinds the first element is `sigma1sq`; for `t >= 2`,
/// `sigma2_t = gamma + alpha1 * sigma2_{t-1} + alpha2 * e_{t-1}^2` plus the
/// active exogenous contributions evaluated at index `t`. A `Constant` spec
/// has no lagged state, so its path is `gamma` at every index.
pub fn variance_path<S: Scalar>(
    spec: &VarianceSpec<S>,
    residuals: &[S],
    exog: &ExogTerms<S>,
    sigma1sq: S,
) -> Result<Vec<S>> {
    if residuals.is_empty() {
        return Err(Error::Domain("residuals must be nonempty".into()));
    }
    if !(sigma1sq > S::zero()) {
        return Err(Error::Domain(format!(
            "initial variance must be > 0, got {sigma1sq}"
        )));
    }
    spec.validate()?;
    exog.validate(residuals.len(), spec.kind())?;

    let n = residuals.len();
    if let VarianceSpec::Constant { gamma } = spec {
        return Ok(vec![*gamma; n]);
    }
    let k = PathCoeffs::from_spec(spec);
    let prev = exog.prev_sq.as_deref();
    let tilde = exog.tilde_sq.as_deref();
    let bar = exog.bar_sq.as_deref();

    let mut out = Vec::with_capacity(n);
    out.push(sigma1sq);
    let mut sigma_prev = sigma1sq;
    for t in 1..n {
        let e_prev = residuals[t - 1];
        let mut sigma = k.gamma + k.alpha1 * sigma_prev + k.alpha2 * e_prev * e_prev;
        if let Some(p) = prev {
            sigma = sigma + k.alpha3 * p[t];
        }
        if let Some(w) = tilde {
            sigma = sigma + k.alpha4 * w[t];
        }
        if let Some(b) = bar {
            sigma = sigma + k.alpha5 * b[t];
        }
        out.push(sigma);
        sigma_prev = sigma;
    }
    Ok(out)
}

/// Gaussian negative log-likelihood `0.5 * sum(log(2 pi s2_t) + e_t^2 / s2_t)`.
pub fn gaussian_neg_loglik<S: Scalar>(residuals: &[S], variances: &[S]) -> Result<S> {
    if residuals.is_empty() || residuals.len() != variances.len() {
        return Err(Error::Domain(format!(
            "residuals ({}) and variances ({}) must be nonempty and equal length",
            residuals.len(),
            variances.len()
        )));
    }
    let half = S::from_f64_c(0.5);
    let two_pi = S::TAU();
    let mut acc = S::zero();
    for (&e, &v) in residuals.iter().zip(variances) {
        if !(v > S::zero()) {
            return Err(Error::Domain(format!("variance must be > 0, got {v}")));
        }
        acc += (two_pi * v).ln() + e * e / v;
    }
    Ok(half * acc)
}

/// Map a feasible spec to an unconstrained parameter vector.
///
/// Layout: `theta[0] = log(gamma)`; the endogenous pair maps through the
/// inverse of a scaled-simplex transform, `theta[i] = log(alpha_i / alpha0)`
/// with `alpha0 = 1 - alpha1 - alpha2`; any exogenous coefficients map
/// through plain logs. Errors on boundary values (an `alpha` exactly zero or
/// `alpha1 + alpha2` at one), where no finite preimage exists.
pub fn to_unconstrained<S: Scalar>(spec: &VarianceSpec<S>) -> Result<Vec<S>> {
    spec.validate()?;
    let mut theta = vec![spec.gamma().ln()];
    if let (Some(a1), Some(a2)) = (spec.alpha1(), spec.alpha2()) {
        let rest = S::one() - a1 - a2;
        if !(a1 > S::zero() && a2 > S::zero() && rest > S::zero()) {
            return Err(Error::Domain(
                "alpha1, alpha2, and 1 - alpha1 - alpha2 must be strictly positive".into(),
            ));
        }
        theta.push((a1 / rest).ln());
        theta.push((a2 / rest).ln());
    }
    for a in [spec.alpha3(), spec.alpha4(), spec.alpha5()].into_iter().flatten() {
        if !(a > S::zero()) {
            return Err(Error::Domain(
                "exogenous coefficients must be strictly positive to transform".into(),
            ));
        }
        theta.push(a.ln());
    }
    Ok(theta)
}

/// Inverse of [`to_unconstrained`]: every finite `theta` maps to a feasible
/// spec of the requested kind.
///
/// # Panics
/// Panics if `theta.len()` does not match `kind.n_coeffs()`.
pub fn from_unconstrained<S: Scalar>(kind: VarianceKind, theta: &[S]) -> VarianceSpec<S> {
    assert_eq!(
        theta.len(),
        kind.n_coeffs(),
        "theta length {} does not match {:?}",
        theta.len(),
        kind
    );
    // exp with an underflow floor so `gamma > 0` survives extreme arguments.
    let exp_pos = |x: S| x.exp().max(S::min_positive_value());
    let gamma = exp_pos(theta[0]);
    if kind == VarianceKind::Constant {
        return VarianceSpec::Constant { gamma };
    }

    // Scaled-simplex transform with max-shift for overflow safety.
    let m = theta[1].max(theta[2]).max(S::zero());
    let e0 = (-m).exp();
    let e1 = (theta[1] - m).exp();
    let e2 = (theta[2] - m).exp();
    let denom = e0 + e1 + e2;
    let mut alpha1 = e1 / denom;
    let mut alpha2 = e2 / denom;
    let sum = alpha1 + alpha2;
    if sum >= S::one() {
        // e0 underflowed; pull strictly inside the simplex.
        let shrink = (S::one() - S::epsilon()) / sum;
        alpha1 = alpha1 * shrink;
        alpha2 = alpha2 * shrink;
    }

    match kind {
        VarianceKind::Constant => unreachable!(),
        VarianceKind::Garch => VarianceSpec::Garch {
            gamma,
            alpha1,
            alpha2,
        },
        VarianceKind::GarchX => VarianceSpec::GarchX {
            gamma,
            alpha1,
            alpha2,
            alpha3: exp_pos(theta[3]),
        },
        VarianceKind::GarchHar { with_bar } => VarianceSpec::GarchHar {
            gamma,
            alpha1,
            alpha2,
            alpha3: exp_pos(theta[3]),
            alpha4: exp_pos(theta[4]),
            alpha5: with_bar.then(|| exp_pos(theta[5])),
        },
    }
}

/// Intercept, slope, and residuals of a simple least-squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit<S> {
    pub intercept: S,
    pub slope: S,
    pub residuals: Vec<S>,
}

/// Least-squares regression of `response` on `regressor` with an intercept.
pub fn ols_fit<S: Scalar>(regressor: &[S], response: &[S]) -> Result<OlsFit<S>> {
    if regressor.len() != response.len() {
        return Err(Error::Domain(format!(
            "regressor ({}) and response ({}) lengths differ",
            regressor.len(),
            response.len()
        )));
    }
    if regressor.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: regressor.len(),
        });
    }
    let n = S::from_usize(regressor.len()).unwrap();
    let mut xbar = S::zero();
    let mut ybar = S::zero();
    for (&x, &y) in regressor.iter().zip(response) {
        xbar += x;
        ybar += y;
    }
    xbar /= n;
    ybar /= n;

    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (&x, &y) in regressor.iter().zip(response) {
        let dx = x - xbar;
        sxx += dx * dx;
        sxy += dx * (y - ybar);
    }
    if !(sxx > S::zero()) {
        return Err(Error::Singular(
            "regressor has zero variance; slope is not identified".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals = regressor
        .iter()
        .zip(response)
        .map(|(&x, &y)| y - intercept - slope * x)
        .collect();
    Ok(OlsFit {
        intercept,
        slope,
        residuals,
    })
}

/// Result of one maximum-likelihood fit (or of the closed-form OLS path).
#[derive(Debug, Clone)]
pub struct FitResult<S> {
    /// Estimated `(c, beta)`.
    pub mean_coeffs: (S, S),
    /// Fitted variance law.
    pub variance_spec: VarianceSpec<S>,
    /// Residuals `response - c - beta * regressor` at the fitted mean.
    pub residuals: Vec<S>,
    /// Fitted conditional variances, strictly positive, one per observation.
    pub variances: Vec<S>,
    /// Maximized Gaussian log-likelihood.
    pub loglik: S,
    /// Whether the simplex reached its function tolerance.
    pub converged: bool,
    /// Jittered restarts consumed beyond the first attempt.
    pub n_restarts_used: usize,
    /// Number of observations.
    pub n_obs: usize,
    /// True when two supplied exogenous vectors coincide (duplicate
    /// regressors in the variance equation).
    pub collinear_exog: bool,
}

/// Negative log-likelihood evaluated in one pass without allocation.
///
/// Total on all inputs: any nonpositive or non-finite variance yields `+inf`
/// so the simplex treats the point as infeasible.
pub(crate) fn fused_neg_loglik<S: Scalar>(
    c: S,
    beta: S,
    spec: &VarianceSpec<S>,
    response: &[S],
    regressor: &[S],
    exog: &ExogTerms<S>,
    sigma1sq: S,
) -> S {
    let n = response.len();
    let constant = matches!(spec, VarianceSpec::Constant { .. });
    let k = PathCoeffs::from_spec(spec);
    let prev = exog.prev_sq.as_deref();
    let tilde = exog.tilde_sq.as_deref();
    let bar = exog.bar_sq.as_deref();

    // sum(log sigma2_t) is accumulated through a running product flushed
    // every LN_CHUNK factors; out-of-band factors take a direct log so the
    // product can never overflow.
    let (guard_lo, guard_hi) = S::ln_chunk_guards();
    let mut log_acc = S::zero();
    let mut prod = S::one();
    let mut in_prod = 0u32;
    let mut ratio_acc = S::zero();

    let mut sigma = if constant { k.gamma } else { sigma1sq };
    let mut e_prev = S::zero();
    for t in 0..n {
        if t > 0 {
            sigma = k.gamma + k.alpha1 * sigma + k.alpha2 * e_prev * e_prev;
            if let Some(p) = prev {
                sigma = sigma + k.alpha3 * p[t];
            }
            if let Some(w) = tilde {
                sigma = sigma + k.alpha4 * w[t];
            }
            if let Some(b) = bar {
                sigma = sigma + k.alpha5 * b[t];
            }
        }
        if !(sigma > S::zero()) || !sigma.is_finite() {
            return S::infinity();
        }
        if sigma > guard_lo && sigma < guard_hi {
            prod *= sigma;
            in_prod += 1;
            if in_prod == S::LN_CHUNK {
                log_acc += prod.ln();
                prod = S::one();
                in_prod = 0;
            }
        } else {
            log_acc += sigma.ln();
        }
        let e = response[t] - c - beta * regressor[t];
        ratio_acc += e * e / sigma;
        e_prev = e;
    }
    log_acc += prod.ln();

    let nf = S::from_usize(n).unwrap();
    let nll = S::from_f64_c(0.5) * (nf * S::TAU().ln() + log_acc + ratio_acc);
    if nll.is_nan() {
        S::infinity()
    } else {
        nll
    }
}

// Cap on the fresh-simplex polish loop after a converged run.
const MAX_POLISH_ROUNDS: usize = 3;

fn vectors_coincide<S: Scalar>(a: &[S], b: &[S]) -> bool {
    let tol = S::from_f64_c(1e-12);
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&x, &y)| (x - y).abs() <= tol * S::one().max(x.abs()))
}

fn detect_collinear_exog<S: Scalar>(exog: &ExogTerms<S>) -> bool {
    let present: Vec<&[S]> = [&exog.prev_sq, &exog.tilde_sq, &exog.bar_sq]
        .into_iter()
        .flat_map(|v| v.as_deref())
        .collect();
    for i in 0..present.len() {
        for j in (i + 1)..present.len() {
            if vectors_coincide(present[i], present[j]) {
                return true;
            }
        }
    }
    false
}

/// Jointly fit `(c, beta)` and the variance coefficients by maximum
/// likelihood.
///
/// The search starts from the OLS mean coefficients with
/// `gamma = 0.1 * var(OLS residuals)`, `alpha1 = 0.5`, `alpha2 = 0.3`, and
/// `0.01` for any exogenous coefficient. The recursion's initial variance is
/// fixed at the sample variance of the OLS residuals for the whole search.
/// When a simplex run fails to converge, up to `cfg.max_restarts` jittered
/// restarts are attempted; the best point across attempts is returned and
/// non-convergence is reported through [`FitResult::converged`], not as an
/// error.
pub fn fit_mle<S: Scalar>(
    response: &[S],
    regressor: &[S],
    kind: VarianceKind,
    exog: &ExogTerms<S>,
    cfg: &OptimizerConfig,
) -> Result<FitResult<S>> {
    if response.len() != regressor.len() {
        return Err(Error::Domain(format!(
            "response ({}) and regressor ({}) lengths differ",
            response.len(),
            regressor.len()
        )));
    }
    if response.len() < 30 {
        return Err(Error::InsufficientData {
            required: 30,
            actual: response.len(),
        });
    }
    let n = response.len();
    exog.validate(n, kind)?;
    let collinear_exog = detect_collinear_exog(exog);

    let ols = ols_fit(regressor, response)?;
    let sigma1sq = mean_sq(&ols.residuals);

    if !(sigma1sq > S::zero()) || !sigma1sq.is_finite() {
        // Degenerate likelihood (e.g. a perfect fit): report the OLS mean
        // coefficients with a floored variance and flag non-convergence.
        let floor = S::min_positive_value();
        let spec = initial_spec(kind, floor);
        let variances = vec![floor; n];
        let loglik = -gaussian_neg_loglik(&ols.residuals, &variances)?;
        return Ok(FitResult {
            mean_coeffs: (ols.intercept, ols.slope),
            variance_spec: spec,
            residuals: ols.residuals,
            variances,
            loglik,
            converged: false,
            n_restarts_used: 0,
            n_obs: n,
            collinear_exog,
        });
    }

    let spec0 = initial_spec(kind, S::from_f64_c(0.1) * sigma1sq);
    let theta_spec0 = to_unconstrained(&spec0).expect("initial spec is interior");
    let mut theta0 = Vec::with_capacity(2 + theta_spec0.len());
    theta0.push(ols.intercept);
    theta0.push(ols.slope);
    theta0.extend_from_slice(&theta_spec0);

    let objective = |theta: &[S]| -> S {
        let spec = from_unconstrained(kind, &theta[2..]);
        fused_neg_loglik(theta[0], theta[1], &spec, response, regressor, exog, sigma1sq)
    };

    let ftol = S::from_f64_c(cfg.ftol);
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(cfg.jitter_seed);
    let jitter_scale = S::from_f64_c(0.25);

    // A single simplex run can stall with its simplex collapsed into a
    // subspace, so every converged run is re-polished from a fresh simplex
    // at the found point until the objective stops improving.
    let minimize = |start: &[S]| {
        let mut out = nelder_mead(objective, start, ftol, cfg.max_evals);
        for _ in 0..MAX_POLISH_ROUNDS {
            if !out.converged {
                break;
            }
            let again = nelder_mead(objective, &out.x, ftol, cfg.max_evals);
            let improvement = out.fx - again.fx;
            if again.fx < out.fx {
                out = again;
            }
            if !(improvement > ftol) {
                break;
            }
        }
        out
    };

    let mut best: Option<(Vec<S>, S, bool)> = None;
    let mut n_restarts_used = 0usize;
    for attempt in 0..=cfg.max_restarts {
        let start: Vec<S> = if attempt == 0 {
            theta0.clone()
        } else {
            n_restarts_used = attempt;
            theta0
                .iter()
                .map(|&v| {
                    let z = S::standard_normal(&mut jitter_rng);
                    v + jitter_scale * (S::one() + v.abs()) * z
                })
                .collect()
        };
        let out = minimize(&start);
        let better = match &best {
            None => true,
            Some((_, fx, _)) => out.fx < *fx,
        };
        if better {
            best = Some((out.x, out.fx, out.converged));
        }
        if out.converged {
            break;
        }
    }
    let (theta_hat, _, converged) = best.expect("at least one attempt runs");

    let (c, beta) = (theta_hat[0], theta_hat[1]);
    let spec = from_unconstrained(kind, &theta_hat[2..]);
    let residuals: Vec<S> = response
        .iter()
        .zip(regressor)
        .map(|(&y, &x)| y - c - beta * x)
        .collect();
    let variances = variance_path(&spec, &residuals, exog, sigma1sq)?;
    let loglik = -gaussian_neg_loglik(&residuals, &variances)?;

    Ok(FitResult {
        mean_coeffs: (c, beta),
        variance_spec: spec,
        residuals,
        variances,
        loglik,
        converged,
        n_restarts_used,
        n_obs: n,
        collinear_exog,
    })
}

fn initial_spec<S: Scalar>(kind: VarianceKind, gamma: S) -> VarianceSpec<S> {
    let a1 = S::from_f64_c(0.5);
    let a2 = S::from_f64_c(0.3);
    let ax = S::from_f64_c(0.01);
    match kind {
        VarianceKind::Constant => VarianceSpec::Constant { gamma },
        VarianceKind::Garch => VarianceSpec::Garch {
            gamma,
            alpha1: a1,
            alpha2: a2,
        },
        VarianceKind::GarchX => VarianceSpec::GarchX {
            gamma,
            alpha1: a1,
            alpha2: a2,
            alpha3: ax,
        },
        VarianceKind::GarchHar { with_bar } => VarianceSpec::GarchHar {
            gamma,
            alpha1: a1,
            alpha2: a2,
            alpha3: ax,
            alpha4: ax,
            alpha5: with_bar.then_some(ax),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn garch_spec(gamma: f64, alpha1: f64, alpha2: f64) -> VarianceSpec<f64> {
        VarianceSpec::Garch {
            gamma,
            alpha1,
            alpha2,
        }
    }

    #[test]
    fn variance_path_fixed_point() {
        // With zero residuals and sigma1sq at the fixed point 1/(1-0.5)=2,
        // the path stays at 2.
        let spec = garch_spec(1.0, 0.5, 0.3);
        let v = variance_path(&spec, &[0.0; 10], &ExogTerms::none(), 2.0).unwrap();
        assert!(v.iter().all(|&x| (x - 2.0).abs() < 1e-15));
    }

    #[test]
    fn variance_path_zero_coefficients() {
        let spec = garch_spec(1.0, 0.0, 0.0);
        let v = variance_path(&spec, &[3.0, -2.0, 5.0, 1.0], &ExogTerms::none(), 9.0).unwrap();
        assert_eq!(v[0], 9.0);
        assert!(v[1..].iter().all(|&x| x == 1.0));
    }

    #[test]
    fn variance_path_hand_recursion() {
        // sigma2_2 = 1 + 0.5*10 + 0.3*4 = 7.2
        let spec = garch_spec(1.0, 0.5, 0.3);
        let v = variance_path(&spec, &[2.0, 0.0, 0.0], &ExogTerms::none(), 10.0).unwrap();
        assert_eq!(v[0], 10.0);
        assert_eq!(v[1], 7.2);
        assert_eq!(v[2], 1.0 + 0.5 * 7.2);
    }

    #[test]
    fn variance_path_exog_enters_contemporaneously() {
        let spec = VarianceSpec::GarchX {
            gamma: 1.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 2.0,
        };
        let exog = ExogTerms {
            prev_sq: Some(vec![10.0, 20.0, 30.0]),
            ..ExogTerms::none()
        };
        let v = variance_path(&spec, &[0.0; 3], &exog, 5.0).unwrap();
        // Index 0 is the initial variance; index t adds alpha3 * prev_sq[t].
        assert_eq!(v, vec![5.0, 41.0, 61.0]);
    }

    #[test]
    fn variance_path_errors() {
        let spec = garch_spec(1.0, 0.5, 0.3);
        assert!(matches!(
            variance_path(&spec, &[], &ExogTerms::none(), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            variance_path(&spec, &[1.0], &ExogTerms::none(), 0.0),
            Err(Error::Domain(_))
        ));
        let xspec = VarianceSpec::GarchX {
            gamma: 1.0,
            alpha1: 0.1,
            alpha2: 0.1,
            alpha3: 0.1,
        };
        assert!(matches!(
            variance_path(&xspec, &[1.0, 2.0], &ExogTerms::none(), 1.0),
            Err(Error::Specification(_))
        ));
        let bad = garch_spec(0.0, 0.5, 0.3);
        assert!(matches!(
            variance_path(&bad, &[1.0], &ExogTerms::none(), 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn neg_loglik_known_values() {
        let ln_2pi = std::f64::consts::TAU.ln();
        let v = gaussian_neg_loglik(&[0.0], &[1.0]).unwrap();
        assert!((v - 0.5 * ln_2pi).abs() < 1e-15);
        assert!((v - 0.918_938_533_204_672_7).abs() < 1e-12);

        let v = gaussian_neg_loglik(&[1.0], &[1.0]).unwrap();
        assert!((v - 0.5 * (ln_2pi + 1.0)).abs() < 1e-15);

        let v = gaussian_neg_loglik(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - ln_2pi).abs() < 1e-15);
    }

    #[test]
    fn neg_loglik_errors() {
        assert!(gaussian_neg_loglik(&[1.0], &[1.0, 2.0]).is_err());
        assert!(gaussian_neg_loglik::<f64>(&[], &[]).is_err());
        assert!(gaussian_neg_loglik(&[1.0], &[0.0]).is_err());
        assert!(gaussian_neg_loglik(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn neg_loglik_minimized_pointwise_at_squared_residual() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..50 {
            let e: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0f64)).collect();
            let opt: Vec<f64> = e.iter().map(|x| (x * x).max(1e-12)).collect();
            let base = gaussian_neg_loglik(&e, &opt).unwrap();
            for scale in [0.5, 0.9, 1.1, 2.0] {
                let perturbed: Vec<f64> = opt.iter().map(|v| v * scale).collect();
                assert!(gaussian_neg_loglik(&e, &perturbed).unwrap() >= base - 1e-12);
            }
        }
    }

    #[test]
    fn transform_round_trip() {
        let specs: Vec<VarianceSpec<f64>> = vec![
            VarianceSpec::Constant { gamma: 2.5 },
            garch_spec(1.0, 0.5, 0.3),
            VarianceSpec::GarchX {
                gamma: 0.2,
                alpha1: 0.05,
                alpha2: 0.9,
                alpha3: 1.5,
            },
            VarianceSpec::GarchHar {
                gamma: 3.0,
                alpha1: 0.3,
                alpha2: 0.6,
                alpha3: 0.01,
                alpha4: 0.4,
                alpha5: Some(0.07),
            },
            VarianceSpec::GarchHar {
                gamma: 3.0,
                alpha1: 0.3,
                alpha2: 0.6,
                alpha3: 0.01,
                alpha4: 0.4,
                alpha5: None,
            },
        ];
        for spec in specs {
            let theta = to_unconstrained(&spec).unwrap();
            assert_eq!(theta.len(), spec.kind().n_coeffs());
            let back = from_unconstrained(spec.kind(), &theta);
            assert!((back.gamma() - spec.gamma()).abs() <= 1e-12 * spec.gamma());
            for (a, b) in [
                (back.alpha1(), spec.alpha1()),
                (back.alpha2(), spec.alpha2()),
                (back.alpha3(), spec.alpha3()),
                (back.alpha4(), spec.alpha4()),
                (back.alpha5(), spec.alpha5()),
            ] {
                match (a, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12 * (1.0 + b)),
                    (None, None) => {}
                    other => panic!("structure mismatch: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn transform_zero_theta_is_interior() {
        let spec = from_unconstrained::<f64>(VarianceKind::Garch, &[0.0, 0.0, 0.0]);
        let (a1, a2) = (spec.alpha1().unwrap(), spec.alpha2().unwrap());
        assert!(a1 > 0.0 && a2 > 0.0 && a1 + a2 < 1.0);
        assert!((a1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((a2 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(spec.gamma(), 1.0);
    }

    #[test]
    fn transform_boundary_errors() {
        assert!(to_unconstrained(&garch_spec(1.0, 0.0, 0.3)).is_err());
        assert!(to_unconstrained(&garch_spec(1.0, 0.5, 0.5)).is_err());
        assert!(to_unconstrained(&VarianceSpec::GarchX {
            gamma: 1.0,
            alpha1: 0.2,
            alpha2: 0.2,
            alpha3: 0.0,
        })
        .is_err());
    }

    #[test]
    fn transform_random_sweep_stays_feasible() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kinds = [
            VarianceKind::Constant,
            VarianceKind::Garch,
            VarianceKind::GarchX,
            VarianceKind::GarchHar { with_bar: false },
            VarianceKind::GarchHar { with_bar: true },
        ];
        for _ in 0..1000 {
            for kind in kinds {
                let theta: Vec<f64> = (0..kind.n_coeffs())
                    .map(|_| rng.gen_range(-40.0..40.0))
                    .collect();
                let spec = from_unconstrained(kind, &theta);
                spec.validate().expect("image must satisfy the invariants");
            }
        }
    }

    #[test]
    fn ols_exact_line() {
        let fit = ols_fit::<f64>(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!((fit.slope - 1.0).abs() < 1e-14);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-14));
    }

    #[test]
    fn ols_matches_normal_equations_oracle() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.gen_range(3..200usize);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|&xi| 1.3 - 0.7 * xi + rng.gen_range(-1.0..1.0))
                .collect();
            let fit = match ols_fit(&x, &y) {
                Ok(f) => f,
                Err(Error::Singular(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            // Independent route: solve the 2x2 normal equations by Cramer's
            // rule on raw sums.
            let nf = n as f64;
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            let sxx: f64 = x.iter().map(|v| v * v).sum();
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let det = nf * sxx - sx * sx;
            let c = (sy * sxx - sx * sxy) / det;
            let b = (nf * sxy - sx * sy) / det;
            assert!((fit.intercept - c).abs() < 1e-10, "intercept");
            assert!((fit.slope - b).abs() < 1e-10, "slope");
        }
    }

    #[test]
    fn ols_rejects_constant_regressor() {
        assert!(matches!(
            ols_fit(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn fused_matches_public_route() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 0.4 + 0.8 * xi + rng.gen_range(-1.0..1.0)).collect();
        let exog = ExogTerms {
            prev_sq: Some((0..n).map(|_| rng.gen_range(0.0..4.0)).collect()),
            tilde_sq: Some((0..n).map(|_| rng.gen_range(0.0..4.0)).collect()),
            bar_sq: Some((0..n).map(|_| rng.gen_range(0.0..4.0)).collect()),
        };
        for _ in 0..20 {
            let spec = VarianceSpec::GarchHar {
                gamma: rng.gen_range(0.01..2.0),
                alpha1: rng.gen_range(0.01..0.6),
                alpha2: rng.gen_range(0.01..0.35),
                alpha3: rng.gen_range(0.001..0.5),
                alpha4: rng.gen_range(0.001..0.5),
                alpha5: Some(rng.gen_range(0.001..0.5)),
            };
            let (c, beta) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let s1 = rng.gen_range(0.5..3.0);
            let fused = fused_neg_loglik(c, beta, &spec, &y, &x, &exog, s1);
            let resid: Vec<f64> = y
                .iter()
                .zip(&x)
                .map(|(&yi, &xi)| yi - c - beta * xi)
                .collect();
            let path = variance_path(&spec, &resid, &exog, s1).unwrap();
            let reference = gaussian_neg_loglik(&resid, &path).unwrap();
            assert!(
                (fused - reference).abs() <= 1e-9 * reference.abs().max(1.0),
                "fused {fused} vs reference {reference}"
            );
        }
    }

    #[test]
    fn fit_constant_matches_closed_form() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 200;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 0.7 + 1.9 * xi + rng.gen_range(-1.0..1.0))
            .collect();
        let fit = fit_mle(&y, &x, VarianceKind::Constant, &ExogTerms::none(), &OptimizerConfig::default())
            .unwrap();
        assert!(fit.converged);

        let ols = ols_fit(&x, &y).unwrap();
        let msr = mean_sq(&ols.residuals);
        assert!((fit.mean_coeffs.0 - ols.intercept).abs() < 1e-6);
        assert!((fit.mean_coeffs.1 - ols.slope).abs() < 1e-6);
        assert!((fit.variance_spec.gamma() - msr).abs() < 1e-6);
        // Monotone improvement against the search's own starting point.
        let init_var = vec![0.1 * msr; n];
        let resid0 = &ols.residuals;
        let ll0 = -gaussian_neg_loglik(resid0, &init_var).unwrap();
        assert!(fit.loglik >= ll0);
    }

    #[test]
    fn fit_perfect_fit_is_flagged_not_fatal() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y = x.clone();
        let fit = fit_mle(&y, &x, VarianceKind::Garch, &ExogTerms::none(), &OptimizerConfig::default())
            .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.n_obs, 40);
    }

    #[test]
    fn fit_degenerate_regressor_is_singular() {
        let x = vec![1.0; 40];
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        assert!(matches!(
            fit_mle(&y, &x, VarianceKind::Garch, &ExogTerms::none(), &OptimizerConfig::default()),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn fit_short_sample_rejected() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let y = x.clone();
        assert!(matches!(
            fit_mle(&y, &x, VarianceKind::Garch, &ExogTerms::none(), &OptimizerConfig::default()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn fit_collinear_exog_is_flagged() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 0.5 * xi + rng.gen_range(-1.0..1.0)).collect();
        let shared: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let exog = ExogTerms {
            prev_sq: Some(shared.clone()),
            tilde_sq: Some(shared),
            bar_sq: None,
        };
        let fit = fit_mle(
            &y,
            &x,
            VarianceKind::GarchHar { with_bar: false },
            &exog,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(fit.collinear_exog);
    }

    #[test]
    fn fit_recovers_garch_parameters_loosely() {
        // Cheap smoke version of the recovery oracle; the acceptance suite
        // runs the full 50-seed version.
        use crate::sim::{simulate_series, DgpParams};
        let p = DgpParams {
            beta0: 0.0,
            beta1: 0.5,
            gamma: 1.0,
            alpha1: 0.5,
            alpha2: 0.4,
            t_len: 3000,
        };
        let mut sums = [0.0f64; 3];
        let seeds = [11u64, 12, 13];
        for &seed in &seeds {
            let s = simulate_series(&p, seed).unwrap();
            let regressor = &s.values[..s.values.len() - 1];
            let response = &s.values[1..];
            let fit = fit_mle(
                response,
                regressor,
                VarianceKind::Garch,
                &ExogTerms::none(),
                &OptimizerConfig::default(),
            )
            .unwrap();
            assert!(fit.converged);
            sums[0] += fit.variance_spec.gamma();
            sums[1] += fit.variance_spec.alpha1().unwrap();
            sums[2] += fit.variance_spec.alpha2().unwrap();
        }
        let k = seeds.len() as f64;
        assert!((sums[0] / k - 1.0).abs() < 0.2, "gamma {}", sums[0] / k);
        assert!((sums[1] / k - 0.5).abs() < 0.15, "alpha1 {}", sums[1] / k);
        assert!((sums[2] / k - 0.4).abs() < 0.15, "alpha2 {}", sums[2] / k);
    }
}
