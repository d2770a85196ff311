use tripath::campaign::sweep_corrected_kappa;
use tripath::config::LogGrid;

fn main() -> tripath::Result<()> {
    let rates = LogGrid { start: 1e4, stop: 1e7, points: 13 }.rates()?;
    let assumed = [41.0e-9, 43.5e-9, 45.0e-9];
    let sweep = sweep_corrected_kappa(43.5e-9, &assumed, &rates)?;

    print!("{:>12}", "rate");
    for c in &sweep.curves {
        print!(" {:>14}", format!("tau={:.1}ns", c.assumed_tau * 1e9));
    }
    println!();
    for (i, r) in rates.iter().enumerate() {
        print!("{r:>12.3e}");
        for c in &sweep.curves {
            match c.kappa.get(i) {
                Some(k) => print!(" {k:>+14.4e}"),
                None => print!(" {:>14}", "-"),
            }
        }
        println!();
    }
    for w in &sweep.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
