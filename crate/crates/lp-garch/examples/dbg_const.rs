use lp_garch::garch::*;
use lp_garch::optim::OptimizerConfig;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    let n = 200;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let y: Vec<f64> = x.iter().map(|&xi| 0.7 + 1.9 * xi + rng.gen_range(-1.0..1.0)).collect();
    for ftol in [1e-8f64, 1e-10, 1e-12, 1e-14] {
        let cfg = OptimizerConfig { ftol, ..OptimizerConfig::default() };
        let fit = fit_mle(&y, &x, VarianceKind::Constant, &ExogTerms::none(), &cfg).unwrap();
        let ols = ols_fit(&x, &y).unwrap();
        let msr: f64 = ols.residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
        println!(
            "ftol={ftol:.0e} conv={} dc={:.3e} db={:.3e} dγ={:.3e}",
            fit.converged,
            (fit.mean_coeffs.0 - ols.intercept).abs(),
            (fit.mean_coeffs.1 - ols.slope).abs(),
            (fit.variance_spec.gamma() - msr).abs()
        );
    }
}
