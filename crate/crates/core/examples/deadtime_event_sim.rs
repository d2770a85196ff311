//! Runs a Poisson photon stream through a non-paralyzable detector event by
//! event and compares the surviving count rate with the steady-state
//! response.

use tripath::detector::{apply_deadtime_events, detected_rate, DeadtimeModel};
use tripath::source::{pulse_train_timestamps, SourceModel};

fn main() -> tripath::Result<()> {
    let det = DeadtimeModel::constant(45e-9)?;
    println!("{:>10} {:>12} {:>12} {:>8}", "rate", "events", "analytic", "z");
    for (i, rate) in [1e3, 1e5, 1e6, 5e6, 1e7].into_iter().enumerate() {
        let arrivals = pulse_train_timestamps(&SourceModel::coherent(rate)?, 1.0, i as u64)?;
        let clicks = apply_deadtime_events(&arrivals, 1.0, &det, 100 + i as u64)?;
        let expected = detected_rate(rate, &det)?;
        let z = (clicks.len() as f64 - expected) / expected.sqrt();
        println!("{rate:>10.0e} {:>12} {expected:>12.1} {z:>+8.2}", clicks.len());
    }

    // Pulses closer together than the deadtime are partly blocked.
    let sps = SourceModel::ideal_sps(30e-9, 1.0)?;
    let arrivals = pulse_train_timestamps(&sps, 1e-3, 0)?;
    let clicks = apply_deadtime_events(&arrivals, 1e-3, &det, 1)?;
    println!("30 ns pulse train: {} of {} photons detected", clicks.len(), arrivals.len());
    Ok(())
}
