//! Spread of the Sorkin parameter across repeated one-second acquisitions
//! with a 45 ns detector, for a laser and for an ideal single-photon source.

use tripath::campaign::{run_campaign, CampaignConfig};
use tripath::config::LogGrid;
use tripath::detector::DeadtimeModel;
use tripath::source::SourceModel;

fn main() -> tripath::Result<()> {
    let grid = LogGrid { start: 10.0, stop: 1e7, points: 13 }.rates()?;
    let det = DeadtimeModel::constant(45e-9)?;
    for (name, source) in [
        ("coherent", SourceModel::coherent(1.0)?),
        ("ideal single-photon", SourceModel::ideal_sps(100e-9, 0.5)?),
    ] {
        let result = run_campaign(&CampaignConfig::new(source, det, grid.clone(), 2000, 1))?;
        println!("{name}");
        println!("{:>12} {:>14} {:>12} {:>6}", "rate", "mean kappa", "std kappa", "undef");
        for s in &result.summaries {
            println!("{:>12.3e} {:>+14.5e} {:>12.3e} {:>6}", s.rate_hz, s.mean_kappa, s.std_kappa, s.n_undefined);
        }
    }
    Ok(())
}
