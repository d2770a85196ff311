use rand_distr::{Distribution, Normal};
use tripath::campaign::convergence_check;
use tripath::rng;
use tripath::stats::{auto_bin_count, build_histogram, fit_normal, fit_normal_histogram, FitMethod, HistogramWeighting};

fn main() -> tripath::Result<()> {
    let mut gen = rng::from_seed(5000);
    let normal = Normal::new(3.96e-4, 5.23e-4).unwrap();
    let kappa: Vec<f64> = (0..5000).map(|_| normal.sample(&mut gen)).collect();

    let hist = build_histogram(&kappa, auto_bin_count(&kappa))?;
    let peak = *hist.counts.iter().max().unwrap() as f64;
    for (c, n) in hist.bin_centers().iter().zip(&hist.counts).step_by(2) {
        println!("{c:>+11.3e} {}", "#".repeat((60.0 * *n as f64 / peak) as usize));
    }

    for method in [FitMethod::MomentsOnData, FitMethod::LeastSquaresOnHistogram] {
        let f = fit_normal(&kappa, method)?;
        println!("{method:?}: mu = {:.3e}, sigma = {:.3e}", f.mu, f.sigma);
    }
    let poisson = fit_normal_histogram(&hist, HistogramWeighting::Poisson)?;
    println!("Poisson-weighted histogram fit: mu = {:.3e}, sigma = {:.3e}", poisson.mu, poisson.sigma);

    let conv = convergence_check(&kappa, 1e-5)?;
    println!("running mean converged: {} (last increment {:.2e})", conv.passed, conv.final_increment());
    Ok(())
}
