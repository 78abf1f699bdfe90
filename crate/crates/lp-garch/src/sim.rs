//! Simulation of AR(1) series with GARCH(1,1) conditional variance.
//!
//! The generator is fully deterministic given `(params, seed)`: the shock
//! stream is `ChaCha8Rng::seed_from_u64(seed)` feeding the ziggurat
//! standard-normal sampler, so identical inputs reproduce bit-identical
//! series on any machine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Parameters of the AR(1)-GARCH(1,1) data-generating process.
///
/// The level equation is `y_t = beta0 + beta1 * y_{t-1} + eps_t` and the
/// conditional variance follows
/// `sigma2_t = gamma + alpha1 * sigma2_{t-1} + alpha2 * eps_{t-1}^2`,
/// started at its stationary value `gamma / (1 - alpha1 - alpha2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpParams<S> {
    /// Mean intercept.
    pub beta0: S,
    /// AR coefficient; `|beta1| < 1` so the pre-sample level is defined.
    pub beta1: S,
    /// Variance intercept, strictly positive.
    pub gamma: S,
    /// Lagged-variance coefficient, nonnegative.
    pub alpha1: S,
    /// Lagged-squared-innovation coefficient, nonnegative.
    pub alpha2: S,
    /// Series length.
    pub t_len: usize,
}

impl<S: Scalar> DgpParams<S> {
    /// Check the parameter domain: `gamma > 0`, `alpha1, alpha2 >= 0`,
    /// `alpha1 + alpha2 < 1`, `|beta1| < 1`, `t_len >= 30`.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.alpha1 < S::zero() || self.alpha2 < S::zero() {
            return Err(Error::InvalidParameter(format!(
                "alpha1 and alpha2 must be >= 0, got ({}, {})",
                self.alpha1, self.alpha2
            )));
        }
        if !(self.alpha1 + self.alpha2 < S::one()) {
            return Err(Error::InvalidParameter(format!(
                "alpha1 + alpha2 must be < 1, got {}",
                self.alpha1 + self.alpha2
            )));
        }
        if !(self.beta1.abs() < S::one()) {
            return Err(Error::InvalidParameter(format!(
                "|beta1| must be < 1 so the unconditional mean exists, got {}",
                self.beta1
            )));
        }
        if self.t_len < 30 {
            return Err(Error::InsufficientData {
                required: 30,
                actual: self.t_len,
            });
        }
        Ok(())
    }

    /// Stationary variance `gamma / (1 - alpha1 - alpha2)`.
    pub fn stationary_variance(&self) -> S {
        self.gamma / (S::one() - self.alpha1 - self.alpha2)
    }

    /// Unconditional mean `beta0 / (1 - beta1)`, used as the pre-sample level.
    pub fn unconditional_mean(&self) -> S {
        self.beta0 / (S::one() - self.beta1)
    }
}

/// One simulated series together with its conditional-variance path.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample<S> {
    /// Observations `y_1..y_T`.
    pub values: Vec<S>,
    /// Conditional variances `sigma2_1..sigma2_T`.
    pub variances: Vec<S>,
    /// Seed the shock stream was derived from.
    pub seed: u64,
    /// Generating parameters.
    pub params: DgpParams<S>,
}

impl<S: Scalar> SeriesSample<S> {
    /// Innovations `eps_t = y_t - beta0 - beta1 * y_{t-1}` implied by the
    /// stored values, with the pre-sample level at the unconditional mean.
    pub fn innovations(&self) -> Vec<S> {
        let mut prev = self.params.unconditional_mean();
        self.values
            .iter()
            .map(|&y| {
                let e = y - self.params.beta0 - self.params.beta1 * prev;
                prev = y;
                e
            })
            .collect()
    }
}

/// Simulate one AR(1)-GARCH(1,1) series.
///
/// No burn-in is applied: the recursion starts from the stationary variance
/// and the unconditional mean. The shock stream depends only on `seed`, so
/// the variance at `t = 1` is identical across seeds.
pub fn simulate_series<S: Scalar>(params: &DgpParams<S>, seed: u64) -> Result<SeriesSample<S>> {
    params.validate()?;

    let t_len = params.t_len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut values = Vec::with_capacity(t_len);
    let mut variances = Vec::with_capacity(t_len);

    let mut sigma2 = params.stationary_variance();
    let mut prev_y = params.unconditional_mean();
    let mut prev_eps = S::zero();

    for t in 0..t_len {
        if t > 0 {
            sigma2 = params.gamma + params.alpha1 * sigma2 + params.alpha2 * prev_eps * prev_eps;
        }
        let z = S::standard_normal(&mut rng);
        let eps = sigma2.sqrt() * z;
        let y = params.beta0 + params.beta1 * prev_y + eps;

        variances.push(sigma2);
        values.push(y);
        prev_y = y;
        prev_eps = eps;
    }

    Ok(SeriesSample {
        values,
        variances,
        seed,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta0: f64, beta1: f64, gamma: f64, alpha1: f64, alpha2: f64, t_len: usize) -> DgpParams<f64> {
        DgpParams {
            beta0,
            beta1,
            gamma,
            alpha1,
            alpha2,
            t_len,
        }
    }

    #[test]
    fn iid_standard_normal_limit() {
        // beta1 = alpha1 = alpha2 = 0 reduces to i.i.d. N(0, 1).
        let p = params(0.0, 0.0, 1.0, 0.0, 0.0, 10_000);
        let s = simulate_series(&p, 7).unwrap();
        let m = s.values.iter().sum::<f64>() / s.values.len() as f64;
        let v = s.values.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / s.values.len() as f64;
        assert!(m.abs() < 0.05, "sample mean {m}");
        assert!((v - 1.0).abs() < 0.05, "sample variance {v}");
        assert!(s.variances.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn initial_variance_is_stationary_value() {
        let p = params(0.0, 0.0, 1.0, 0.5, 0.4, 100);
        let s = simulate_series(&p, 3).unwrap();
        // Exactly the stationary-variance expression, which is 1/(1-0.9) = 10.
        assert_eq!(s.variances[0], p.stationary_variance());
        assert!((s.variances[0] - 10.0).abs() < 1e-14);
    }

    #[test]
    fn hand_unrolled_three_steps() {
        // Unroll both recursions by hand for the first three observations,
        // using the same shock stream the generator consumes.
        let p = params(0.0, 0.6, 1.0, 0.5, 0.3, 30);
        let seed = 42u64;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..3).map(|_| f64::standard_normal(&mut rng)).collect();

        let s1: f64 = 1.0 / (1.0 - 0.5 - 0.3); // 5
        let e1 = s1.sqrt() * z[0];
        let y1 = 0.6 * 0.0 + e1;

        let s2 = 1.0 + 0.5 * s1 + 0.3 * e1 * e1;
        let e2 = s2.sqrt() * z[1];
        let y2 = 0.6 * y1 + e2;

        let s3 = 1.0 + 0.5 * s2 + 0.3 * e2 * e2;
        let e3 = s3.sqrt() * z[2];
        let y3 = 0.6 * y2 + e3;

        let s = simulate_series(&p, seed).unwrap();
        assert_eq!(&s.variances[..3], &[s1, s2, s3]);
        assert_eq!(&s.values[..3], &[y1, y2, y3]);
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let p = params(0.1, 0.8, 1.0, 0.5, 0.3, 200);
        let a = simulate_series(&p, 11).unwrap();
        let b = simulate_series(&p, 11).unwrap();
        assert_eq!(a, b);

        let c = simulate_series(&p, 12).unwrap();
        assert_ne!(a.values, c.values);
        // The initial variance never depends on the seed.
        assert_eq!(a.variances[0], c.variances[0]);
    }

    #[test]
    fn constant_variance_when_alphas_zero() {
        let p = params(0.0, 0.5, 2.5, 0.0, 0.0, 50);
        let s = simulate_series(&p, 1).unwrap();
        assert!(s.variances.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn innovation_variance_matches_stationary_value() {
        // Persistence low enough that the fourth moment exists and the
        // sample variance obeys the usual root-T convergence.
        let p = params(0.0, 0.9, 1.0, 0.5, 0.3, 100_000);
        let s = simulate_series(&p, 5).unwrap();
        let eps = s.innovations();
        let v = eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64;
        let target = p.stationary_variance();
        assert!(
            (v - target).abs() / target < 0.05,
            "empirical innovation variance {v}, stationary {target}"
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            simulate_series(&params(0.0, 0.5, 0.0, 0.1, 0.1, 100), 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            simulate_series(&params(0.0, 0.5, 1.0, 0.6, 0.4, 100), 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            simulate_series(&params(0.0, 1.0, 1.0, 0.1, 0.1, 100), 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            simulate_series(&params(0.0, 0.5, 1.0, 0.1, 0.1, 10), 0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn f32_instantiation_works() {
        let p = DgpParams {
            beta0: 0.0f32,
            beta1: 0.5,
            gamma: 1.0,
            alpha1: 0.2,
            alpha2: 0.1,
            t_len: 64,
        };
        let s = simulate_series(&p, 9).unwrap();
        assert_eq!(s.values.len(), 64);
        assert!(s.variances.iter().all(|&v| v > 0.0));
    }
}
