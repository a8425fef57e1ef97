//! The named product families: degrees, the fixed point at 1, the orbit of 0,
//! and the cross-ratio and semi-family inequalities.

use wdl::blaschke::{check_cross_ratio_inequality, semi_family, Family};
use wdl::classify::{attracting_rate, parabolic_rates};

fn main() -> wdl::Result<()> {
    for family in Family::SIX {
        let b = family.product(0)?;
        let fixed = b.multiplier_at_one()?;
        let orbit = b.iterate(num_complex::Complex64::new(0.0, 0.0), 50)?;
        println!(
            "{:>8}: degree {}  b'(1) = {:.6} ({:?})  b^50(0) = {:.12}",
            family.id(),
            b.degree(),
            fixed.multiplier,
            fixed.kind,
            orbit.re
        );
    }

    let rates = parabolic_rates(Family::Par13, 1000, 100_000)?;
    println!("par13: 1 - b^n(0) ~ n^{:.4}, steps ~ n^{:.4}", rates.gap.exponent, rates.step.exponent);
    println!("att12: ratio {:.9}", attracting_rate(Family::Att12, 200)?.last_ratio);
    println!("att56: ratio {:.9}", attracting_rate(Family::Att56, 200)?.last_ratio);

    let c = check_cross_ratio_inequality(0.5, 0.3)?;
    println!("cross ratio at r = 0.5, x = 0.3: {:.6} < {:.6}", c.lhs, c.rhs);

    for s in [0.5, 0.75, 0.9375] {
        let (_, lambda) = semi_family(s)?;
        println!("semi({s}): lambda = {lambda:.9}");
    }
    Ok(())
}
