use std::f64::consts::PI;

use tripath::optics::{fringe_visibility, mach_zehnder, michelson, output_intensities, PathSpec};

fn main() -> tripath::Result<()> {
    let steps = 12;
    println!("{:>8} {:>10} {:>10} {:>10}", "phase", "mzi_out0", "mzi_out1", "michelson");
    let mut samples = Vec::new();
    for k in 0..=steps {
        let phi = 2.0 * PI * k as f64 / steps as f64;
        let mzi = mach_zehnder(0.5, PathSpec::lossless(0.0)?, PathSpec::lossless(phi)?, 0.5)?;
        let m = output_intensities(&mzi, 0)?;
        let mi = output_intensities(&michelson(0.5, PathSpec::lossless(0.0)?, PathSpec::lossless(phi)?)?, 0)?;
        println!("{phi:>8.3} {:>10.4} {:>10.4} {:>10.4}", m[0], m[1], mi[0]);
        samples.push(m[1]);
    }
    println!("visibility, balanced arms: {:.4}", fringe_visibility(&samples)?);

    let lossy: Vec<f64> = (0..=steps)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / steps as f64;
            let mzi = mach_zehnder(0.5, PathSpec::new(1.0, 0.0).unwrap(), PathSpec::new(0.7, phi).unwrap(), 0.5).unwrap();
            output_intensities(&mzi, 0).unwrap()[1]
        })
        .collect();
    println!("visibility, one arm at amplitude 0.7: {:.4}", fringe_visibility(&lossy)?);
    Ok(())
}
