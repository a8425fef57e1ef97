//! Builds each family's schedule and runs the construction verifiers:
//! schedule laws, disjointness, reef ratios and the surround checks.

use std::time::Instant;
use wdl::model::PerturbationModel;
use wdl::schedule::{build_reefs, verify_disjointness, verify_laws, verify_surrounds};
use wdl::{build_schedule, Family};

fn main() -> wdl::Result<()> {
    for family in Family::SIX {
        let t = Instant::now();
        let sched = build_schedule(family, 20, 1024)?;
        let laws = verify_laws(&sched)?;
        let disj = verify_disjointness(&sched)?;
        let reefs = build_reefs(&sched, 256)?;
        println!(
            "{family:>8}: alpha_20 = 2^{:.4e}  laws {}  disjoint {}  reefs decreasing {}  ({:.2?})",
            sched.alpha(20)?.log2_magnitude(),
            laws.passed,
            disj.disjoint,
            reefs.decreasing,
            t.elapsed()
        );
        for f in laws.failures.iter().take(3) {
            println!("          {f}");
        }

        let t = Instant::now();
        let shallow = build_schedule(family, 9, 1024)?;
        let through = wdl::ell(8)?;
        let zero = verify_surrounds(&shallow, &PerturbationModel::zero(), 1, 4096, Some(through))?;
        let seeded = verify_surrounds(&shallow, &PerturbationModel::seeded(1), 4, 4096, Some(through))?;
        let loud = verify_surrounds(&shallow, &PerturbationModel::seeded(1).with_envelope(8.0), 4, 4096, Some(through))?;
        println!(
            "          surrounds: zero {} (margin {:.3})  seeded {} (margin {:.3})  envelope 8: {} failures  ({:.2?})",
            zero.passed,
            zero.min_margin,
            seeded.passed,
            seeded.min_margin,
            loud.failures.len(),
            t.elapsed()
        );
        for f in zero.failures.iter().chain(&seeded.failures).take(3) {
            println!("          {f:?}");
        }
    }
    Ok(())
}
