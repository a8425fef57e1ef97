//! Follows one perturbed orbit through the itinerary and prints its G-phase
//! subsequence next to the unperturbed orbit of the same start.

use num_complex::Complex64;
use wdl::model::{orbit, start_point, PerturbationModel};
use wdl::{build_schedule, Family};

fn main() -> wdl::Result<()> {
    let sched = build_schedule(Family::SemiSequence, 10, 1024)?;
    let start = start_point(&sched, Complex64::new(4.0, 0.0))?;
    let f = orbit(&start, sched.steps(), &PerturbationModel::seeded(3), &sched)?;
    let phi = orbit(&start, sched.steps(), &PerturbationModel::zero(), &sched)?;

    println!("{:>3} {:>5} {:>20} {:>20} {:>12}", "n", "m", "f", "phi", "|f - phi|");
    for (a, b) in f.gphase_records().iter().zip(phi.gphase_records()) {
        let w = a.point.value();
        println!(
            "{:>3} {:>5} {:>20.15} {:>20.15} {:>12.3e}",
            a.phase.level(),
            a.m,
            w.re,
            b.point.value().re,
            a.point.difference(&b.point).norm()
        );
    }
    print!("{}", f.gphase_csv()?);
    Ok(())
}
