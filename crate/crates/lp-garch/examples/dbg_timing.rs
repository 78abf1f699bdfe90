use lp_garch::mc::{run_replication, McConfig};
use std::time::Instant;

fn main() {
    for t_len in [500usize, 2000] {
        let cfg = McConfig::<f64> {
            beta1_grid: vec![0.95],
            alpha2_grid: vec![0.4],
            t_grid: vec![t_len],
            replications: 2,
            horizons: 24,
            ..McConfig::default()
        };
        let cell = cfg.cells()[0];
        let start = Instant::now();
        let out = run_replication(&cell, 0, &cfg);
        let dt = start.elapsed();
        let n_unusable: usize = out
            .iter()
            .map(|m| m.usable.iter().filter(|&&u| !u).count())
            .sum();
        println!("T={t_len}: one replication {:.2?} ({n_unusable} unusable fits)", dt);
    }
}
