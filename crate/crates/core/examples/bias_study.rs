//! At very low count rates `delta` is dominated by shot noise, and negative
//! `epsilon` tends to come with larger `delta`, which biases the mean of
//! `kappa = epsilon / delta` upward.

use tripath::campaign::bias_study;

fn main() -> tripath::Result<()> {
    for rate in [10.0, 100.0, 1000.0] {
        let b = bias_study(rate, 10_000, 11)?;
        println!("rate {rate} /s over {} runs", b.runs);
        println!("  mean eps {:+.4}, mean delta {:.3}", b.mean_eps, b.mean_delta);
        let show = |x: Option<f64>| x.map_or("empty".to_string(), |v| format!("{v:.3}"));
        println!(
            "  delta | eps<0 = {} ({} runs), delta | eps>0 = {} ({} runs)",
            show(b.mean_delta_given_eps_neg),
            b.n_eps_neg,
            show(b.mean_delta_given_eps_pos),
            b.n_eps_pos
        );
        println!("  mean kappa {:+.4} ({} undefined)", b.mean_kappa, b.n_undefined);
    }
    Ok(())
}
