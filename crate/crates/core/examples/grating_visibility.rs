//! Two-path visibilities implied by the measured grating efficiencies, and
//! the error ratio a phase-encoded link would see at the measured contrast.

use tripath::fixtures::{pairwise_visibilities, Fixtures, GratingColumn};
use tripath::optics::qber_from_visibility;

fn main() -> tripath::Result<()> {
    let f = Fixtures::shipped();
    for column in [GratingColumn::Theory, GratingColumn::Experiment] {
        let eff = f.path_efficiencies(column);
        let v = pairwise_visibilities(eff)?;
        println!("{column:?}: efficiencies {eff:.4?}");
        for (pair, value) in ["AB", "AC", "BC"].iter().zip(v) {
            println!("  V_{pair} = {value:.4}%");
        }
    }
    println!("tabulated: {:?}", &f.visibility.theory[..3]);

    for measured in f.visibility.experiment {
        println!("measured V = {measured:.2}% -> QBER {:.3}%", 100.0 * qber_from_visibility(measured / 100.0)?);
    }
    Ok(())
}
