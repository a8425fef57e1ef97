//! Builds a schedule and prints the scale, radius and error sequences per
//! level. Pass a family id and depth, e.g. `cargo run --example build_schedule -- semi 8`.

use wdl::{build_schedule, ell, Family};

fn main() -> wdl::Result<()> {
    let mut args = std::env::args().skip(1);
    let family: Family = args.next().as_deref().unwrap_or("square").parse()?;
    let depth: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);

    let sched = build_schedule(family, depth, 1024)?;
    println!("{family}, depth {depth}, {} steps", sched.steps());
    println!("{:>3} {:>5} {:>6} {:>16} {:>16} {:>16} {:>16}", "n", "ell", "degree", "log2 alpha", "log2 r-gap", "log2 R-gap", "log2 eps");
    for n in 0..=depth {
        let m = ell(n as u64)?;
        println!(
            "{n:>3} {m:>5} {:>6} {:>16.4} {:>16.4} {:>16.4} {:>16.4}",
            sched.degrees()[n],
            sched.alpha(n)?.log2_magnitude(),
            sched.gap_in(m)?.log2_magnitude(),
            sched.gap_out(m)?.log2_magnitude(),
            if m < sched.steps() { sched.eps(m)?.log2_magnitude() } else { f64::NAN },
        );
    }
    Ok(())
}
