//! Deadtime characterization by the superposition method: two sources are
//! measured alone, together and dark, and the deadtime is the value that
//! makes the corrected rates additive.

use tripath::detector::{characterize_deadtime, DeadtimeModel, SuperpositionMeasurement};
use tripath::rng;

fn main() -> tripath::Result<()> {
    let truth = DeadtimeModel::constant(43.5e-9)?.with_dark_rate(120.0)?;
    let mut gen = rng::from_seed(2020);
    let rows = (0..100)
        .map(|_| SuperpositionMeasurement::simulate(2.0e6, 1.9e6, &truth, Some(1.0), &mut gen))
        .collect::<tripath::Result<Vec<_>>>()?;
    println!("first row: {:?}", rows[0]);

    let est = characterize_deadtime(&rows)?;
    println!(
        "tau = {:.2} +- {:.2} ns from {} rows (true 43.5 ns)",
        est.tau * 1e9,
        est.uncertainty * 1e9,
        est.per_measurement.len()
    );
    let (r, _) = rows[0].residual(est.tau);
    println!("additivity residual of row 0 at the estimate: {r:+.3e}/s");
    Ok(())
}
