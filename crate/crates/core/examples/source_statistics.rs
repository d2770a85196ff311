//! Count statistics of the three source models over one-second windows.

use tripath::rng;
use tripath::source::{draw_counts_with, sample_pulses, SourceModel};
use tripath::stats::summary;

fn main() -> tripath::Result<()> {
    let sources = [
        ("coherent", SourceModel::coherent(1e6)?),
        ("ideal sps", SourceModel::ideal_sps(100e-9, 0.1)?),
        ("contaminated sps", SourceModel::contaminated_sps(100e-9, 0.1, 6.4e-3)?),
    ];
    for (name, source) in &sources {
        let mut gen = rng::from_seed(7);
        for transmission in [1.0, 0.5] {
            let counts: Vec<f64> = (0..500)
                .map(|_| draw_counts_with(source, transmission, 1.0, &mut gen).map(|c| c.counts as f64))
                .collect::<tripath::Result<_>>()?;
            let s = summary(&counts)?;
            println!(
                "{name:>17} T={transmission:.1}: mean {:>10.1}  var/mean {:.4}",
                s.mean,
                s.std * s.std / s.mean
            );
        }
    }
    let stats = sample_pulses(&sources[2].1, 10_000_000, 3)?;
    println!("contaminated pulses: {stats:?}, measured g2(0) = {:.2e}", stats.g2_zero().unwrap());
    Ok(())
}
