//! Power-law and geometric fits of `1 - b^n(0)` for the parabolic and
//! attracting families.

use wdl::classify::{attracting_rate, orbit_of_zero_series, parabolic_rates};
use wdl::Family;

fn main() -> wdl::Result<()> {
    let (gaps, _) = orbit_of_zero_series(Family::Par13, 10, 100_000, 9)?;
    for (n, g) in &gaps {
        println!("n = {n:>8}  1 - b^n(0) = {g:.6e}  n^(1/2) (1 - b^n(0)) = {:.6}", g * n.sqrt());
    }
    let p = parabolic_rates(Family::Par13, 1000, 100_000)?;
    println!("gap exponent  {:.5} (residual {:.2e})", p.gap.exponent, p.gap.residual);
    println!("step exponent {:.5} (residual {:.2e})", p.step.exponent, p.step.residual);

    for family in [Family::Att12, Family::Att56] {
        let g = attracting_rate(family, 200)?;
        println!("{family}: consecutive ratio {:.12}, spread {:.1e}", g.last_ratio, g.spread);
    }
    Ok(())
}
