//! Distances in the Poincaré disc and the comparison factors between
//! concentric discs, followed by a small sweep of the estimates.

use num_complex::Complex64;
use wdl::hypgeo::{contraction_factor, hyp_dist_disc, hyp_dist_unit, hyperbolic_estimate_sweep, Disc};

fn main() -> wdl::Result<()> {
    let (z, w) = (Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4));
    let unit = hyp_dist_unit(z, w)?;
    println!("dist_D(z, w)            = {unit:.9}");

    for (s, r, big_r) in [(0.5, 0.9, 1.1), (0.9, 0.99, 1.01), (0.99, 0.999, 1.001)] {
        let outer = hyp_dist_disc(&Disc::new(Complex64::new(0.0, 0.0), big_r)?, z * s, w * s)?;
        let inner = hyp_dist_disc(&Disc::new(Complex64::new(0.0, 0.0), r)?, z * s, w * s)?;
        let mid = hyp_dist_unit(z * s, w * s)?;
        println!(
            "s = {s:<5} c(s, R) = {:.6}  c(s/r, 1/r) = {:.6}  D_R/D = {:.6}  D_r/D = {:.6}",
            contraction_factor(s, big_r)?,
            contraction_factor(s / r, 1.0 / r)?,
            outer / mid,
            inner / mid
        );
    }

    for r in hyperbolic_estimate_sweep(12, 500, 1)? {
        println!("{:<24} checks {:>6}  min margin {:.3e}  {}", r.name, r.checks, r.min_margin, if r.passed() { "ok" } else { "FAILED" });
    }
    Ok(())
}
