use lp_garch::optim::nelder_mead;

fn main() {
    // Curvatures comparable to the constant-variance likelihood case.
    let h = [600.0, 3000.0, 900.0];
    let a = [0.7, 1.9, -1.1];
    let f = |x: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            s += 0.5 * h[i] * (x[i] - a[i]).powi(2);
        }
        s + 123.0
    };
    for ftol in [1e-8, 1e-10, 1e-12] {
        let out = nelder_mead(f, &[0.5, 1.5, -0.9], ftol, 20000);
        let d: Vec<f64> = (0..3).map(|i| (out.x[i] - a[i]).abs()).collect();
        println!("ftol={ftol:.0e} conv={} evals={} d={:?}", out.converged, out.evals, d);
    }
}
