//! Batch-size sweep on a synthetic population with P(error | beta) = 1 - beta.
//!
//! `cargo run --release --example convergence_study`

use aurc::harness::{convergence_study, generate_population, ConvergenceConfig, LossModel, StudyData};
use aurc::{EstimatorKind, RngHandle};

fn main() -> aurc::Result<()> {
    let pop = generate_population(&LossModel::default(), 1 << 17, &mut RngHandle::new(42))?;
    let data = StudyData::from_population(&pop);
    let table = convergence_study(&data, &ConvergenceConfig::default())?;

    println!("population AURC {:.5}\n", table.reference);
    println!("{:>5} {:<20} {:>9} {:>9} {:>9} {:>8}", "size", "estimator", "mean", "gap", "mae", "batches");
    for row in &table.rows {
        println!(
            "{:>5} {:<20} {:>9.5} {:>+9.5} {:>9.5} {:>8}",
            row.size,
            row.estimator.name(),
            row.mean,
            row.gap,
            row.mae,
            row.batches
        );
    }
    if let Some(fit) = table.rate_fit(EstimatorKind::PluginAlphaHat) {
        println!("\nplug-in alpha: ln MAE vs ln sqrt(ln n / n) slope {:.3} (R^2 {:.3})", fit.slope, fit.r_squared);
    }
    Ok(())
}
