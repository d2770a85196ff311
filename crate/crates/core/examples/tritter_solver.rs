use tripath::optics::{output_intensities, solve_tritter_ratios, tritter};

fn main() -> tripath::Result<()> {
    for targets in [[1.0 / 3.0; 3], [0.2828, 0.2926, 0.2930], [0.5, 0.3, 0.2]] {
        let s = solve_tritter_ratios(targets)?;
        let out = output_intensities(&tritter(s.r1, s.r2, s.r3)?, 0)?;
        println!(
            "targets {targets:.4?}: r1 = {:.6}, r2 = {:.6}, throughput {:.4}, residual {:.1e}",
            s.r1, s.r2, s.throughput, s.residual
        );
        println!("  forward split {:.4?}", out);
    }
    Ok(())
}
