use lp_garch::lp::{estimate_all_horizons, LpModel};
use lp_garch::optim::OptimizerConfig;
use lp_garch::sim::{simulate_series, DgpParams};
use lp_garch::truth::fit_true_model;
use std::time::Instant;

fn main() {
    let t_len = 2000;
    let p = DgpParams { beta0: 0.0, beta1: 0.95, gamma: 1.0, alpha1: 0.5, alpha2: 0.4, t_len };
    let cfg = OptimizerConfig::default();
    let mut fails: Vec<(u64, &str, usize, usize)> = Vec::new();
    let start = Instant::now();
    for seed in 0..8u64 {
        let y = simulate_series(&p, seed).unwrap().values;
        for model in LpModel::ALL {
            let (fits, _) = estimate_all_horizons(&y, 24, model, &cfg).unwrap();
            for f in &fits {
                if !f.fit.converged {
                    fails.push((seed, model.name(), f.h, f.fit.n_restarts_used));
                }
            }
        }
        let t = fit_true_model(&y, 24, &cfg).unwrap();
        if !t.fit.converged {
            fails.push((seed, "TRUTH", 1, t.fit.n_restarts_used));
        }
    }
    println!("elapsed {:.1?}", start.elapsed());
    println!("fails ({} of {}):", fails.len(), 8 * (4 * 24 + 1));
    for f in &fails {
        println!("  seed={} model={} h={} restarts={}", f.0, f.1, f.2, f.3);
    }
}
