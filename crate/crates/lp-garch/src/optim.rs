//! Derivative-free simplex minimizer used by the likelihood fitters.
//!
//! Plain Nelder-Mead with the fminsearch-style initial simplex (each
//! coordinate perturbed by 5%, or by a small absolute step when it is zero)
//! and the standard reflect / expand / contract / shrink moves. Convergence
//! is declared when the spread of objective values across the simplex falls
//! below an absolute function tolerance.

use crate::num::Scalar;

/// Settings shared by every likelihood fit.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Absolute spread of simplex objective values that counts as converged.
    pub ftol: f64,
    /// Hard cap on objective evaluations per simplex run.
    pub max_evals: usize,
    /// Jittered restarts attempted when a run fails to converge.
    pub max_restarts: usize,
    /// Seed for the deterministic restart jitter stream.
    pub jitter_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            // Tight enough that the constant-variance fit pins the mean
            // coefficients to ~1e-7 of the least-squares solution.
            ftol: 1e-10,
            max_evals: 5000,
            max_restarts: 3,
            jitter_seed: 0,
        }
    }
}

/// Outcome of one simplex minimization.
#[derive(Debug, Clone)]
pub struct SimplexOutcome<S> {
    /// Best point found.
    pub x: Vec<S>,
    /// Objective value at `x`.
    pub fx: S,
    /// Objective evaluations consumed.
    pub evals: usize,
    /// Whether the function-spread tolerance was reached within budget.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

// fminsearch-style initial perturbations.
const USUAL_DELTA: f64 = 0.05;
const ZERO_DELTA: f64 = 0.00025;

/// Minimize `f` starting from `x0`.
///
/// `f` must be total: return `+inf` for out-of-range points rather than NaN.
/// The best vertex never regresses, so `fx <= f(x0)` on return.
pub fn nelder_mead<S, F>(mut f: F, x0: &[S], ftol: S, max_evals: usize) -> SimplexOutcome<S>
where
    S: Scalar,
    F: FnMut(&[S]) -> S,
{
    let dim = x0.len();
    assert!(dim >= 1, "nelder_mead requires at least one parameter");

    let mut eval = |x: &[S], evals: &mut usize| -> S {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            S::infinity()
        } else {
            v
        }
    };
    let mut evals = 0usize;

    // Vertices and their objective values; index 0 is x0 itself.
    let mut simplex: Vec<Vec<S>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        if p[i] == S::zero() {
            p[i] = S::from_f64_c(ZERO_DELTA);
        } else {
            p[i] = p[i] * S::from_f64_c(1.0 + USUAL_DELTA);
        }
        simplex.push(p);
    }
    let mut fvals: Vec<S> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let mut converged = false;
    while evals < max_evals {
        // Order vertices by objective value.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if fvals[worst] - fvals[best] < ftol {
            converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![S::zero(); dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        let inv_n = S::one() / S::from_usize(dim).unwrap();
        for c in centroid.iter_mut() {
            *c *= inv_n;
        }

        let blend = |a: &[S], b: &[S], w: S| -> Vec<S> {
            a.iter().zip(b).map(|(&ca, &cb)| ca + w * (ca - cb)).collect()
        };

        // Reflection.
        let xr = blend(&centroid, &simplex[worst], S::from_f64_c(REFLECT));
        let fr = eval(&xr, &mut evals);

        if fr < fvals[best] {
            // Expansion.
            let xe = blend(&centroid, &simplex[worst], S::from_f64_c(EXPAND));
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                fvals[worst] = fe;
            } else {
                simplex[worst] = xr;
                fvals[worst] = fr;
            }
            continue;
        }

        if fr < fvals[second_worst] {
            simplex[worst] = xr;
            fvals[worst] = fr;
            continue;
        }

        // Contraction: outside when the reflected point improved on the
        // worst vertex, inside otherwise.
        let (xc, fc) = if fr < fvals[worst] {
            let xc = blend(&centroid, &simplex[worst], S::from_f64_c(CONTRACT));
            let fc = eval(&xc, &mut evals);
            if fc <= fr {
                (Some(xc), fc)
            } else {
                (None, fc)
            }
        } else {
            let xc = blend(&centroid, &simplex[worst], S::from_f64_c(-CONTRACT));
            let fc = eval(&xc, &mut evals);
            if fc < fvals[worst] {
                (Some(xc), fc)
            } else {
                (None, fc)
            }
        };
        if let Some(xc) = xc {
            simplex[worst] = xc;
            fvals[worst] = fc;
            continue;
        }

        // Shrink toward the best vertex.
        let best_point = simplex[best].clone();
        for &idx in order.iter().skip(1) {
            for d in 0..dim {
                let v = best_point[d] + S::from_f64_c(SHRINK) * (simplex[idx][d] - best_point[d]);
                simplex[idx][d] = v;
            }
            fvals[idx] = eval(&simplex[idx], &mut evals);
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    SimplexOutcome {
        x: simplex.swap_remove(best),
        fx: fvals[best],
        evals,
        converged,
    }
}
