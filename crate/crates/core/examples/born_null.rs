//! Born's rule forbids genuine three-path interference: for any amplitudes,
//! phases and dark rate the Sorkin parameter of an ideal interferometer is
//! zero up to rounding.

use std::f64::consts::TAU;

use rand::Rng;
use tripath::interference::{delta, epsilon, interferometer_rate_with_phases, kappa, RateOctet, ShutterConfig};
use tripath::rng;

fn main() -> tripath::Result<()> {
    let amps = [1.0, 0.8, 0.6];
    let octet = RateOctet::from_fn(|c| interferometer_rate_with_phases(c, amps, [0.0, 0.4, 1.1], 1.0, 1e5, 25.0).unwrap())?;
    for c in ShutterConfig::ALL {
        println!("{c:>3}  {:>12.3}/s", octet.get(c));
    }
    println!("epsilon = {:+.3e}  delta = {:.3e}  kappa = {:+.3e}", epsilon(&octet), delta(&octet), kappa(&octet)?);

    let mut gen = rng::from_seed(42);
    let worst = (0..10_000)
        .map(|_| {
            let a = [(); 3].map(|_| gen.random_range(0.05..1.0));
            let p = [(); 3].map(|_| gen.random_range(0.0..TAU));
            let o = RateOctet::from_fn(|c| interferometer_rate_with_phases(c, a, p, 1.0, 1e6, 100.0).unwrap()).unwrap();
            kappa(&o).unwrap().abs()
        })
        .fold(0.0, f64::max);
    println!("max |kappa| over 10000 random settings: {worst:.2e}");

    // A hypothetical additive third-order term is picked up directly.
    let mut exotic = octet;
    exotic.rabc += 0.01 * delta(&octet);
    println!("with 1% third-order term: kappa = {:+.4}", kappa(&exotic)?);
    Ok(())
}
