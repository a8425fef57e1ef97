//! Runs the six classification examples across a few perturbation seeds and
//! prints the summary table.

use wdl::classify::{examples, run_example, summary_markdown};
use wdl::model::PerturbationModel;

fn main() -> wdl::Result<()> {
    for model in [PerturbationModel::zero(), PerturbationModel::seeded(1), PerturbationModel::seeded(7)] {
        println!("{:?}", model.kind);
        let reports = examples().iter().map(|e| run_example(e, 30, &model)).collect::<wdl::Result<Vec<_>>>()?;
        print!("{}", summary_markdown(&reports));
        for r in &reports {
            for m in &r.markers {
                println!("  {} {:<24} margin {:>12.4e}  {}", r.id, m.name, m.margin, m.detail);
            }
        }
    }
    Ok(())
}
