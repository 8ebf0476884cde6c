//! Rank-based plug-in estimate against the true-percentile value as the sample grows.
//!
//! `cargo run --release --example population_equivalence`

use aurc::harness::{equivalence_check, generate_population, LossModel};
use aurc::RngHandle;

fn main() -> aurc::Result<()> {
    let model = LossModel::BernoulliDecreasing { gamma: 2.0 };
    println!("{:>8} {:>11} {:>11} {:>10}", "N", "empirical", "population", "rel gap");
    for n in [100, 1_000, 10_000, 100_000, 1_000_000] {
        let pop = generate_population(&model, n, &mut RngHandle::new(9))?;
        let r = equivalence_check(&pop)?;
        println!("{n:>8} {:>11.6} {:>11.6} {:>10.2e}", r.empirical, r.population, r.rel_gap);
    }
    Ok(())
}
