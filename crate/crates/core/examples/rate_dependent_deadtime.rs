//! A detector whose deadtime shrinks with count rate, corrected once with
//! its own model and once with a single constant deadtime.

use tripath::campaign::sweep_rate_dependent;
use tripath::config::LogGrid;
use tripath::detector::DeadtimeModel;

fn main() -> tripath::Result<()> {
    let truth = DeadtimeModel::linear_in_rate(51.8e-9, 3.333e-15)?;
    let rates = LogGrid { start: 1e5, stop: 1e7, points: 21 }.rates()?;
    let sweep = sweep_rate_dependent(&truth, 43.5e-9, &rates)?;
    println!("{:>12} {:>14} {:>14}", "rate", "matched", "constant");
    for i in 0..sweep.rates.len() {
        println!("{:>12.3e} {:>+14.3e} {:>+14.3e}", sweep.rates[i], sweep.matched[i], sweep.constant[i]);
    }
    for x in &sweep.crossings {
        println!("constant-deadtime curve crosses zero at {:.3} MHz", x / 1e6);
    }
    Ok(())
}
