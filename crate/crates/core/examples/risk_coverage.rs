//! A risk-coverage curve and its area, computed three ways.
//!
//! `cargo run --example risk_coverage`

use aurc::estimators::{naive_empirical_aurc, plugin_aurc, risk_coverage_curve};
use aurc::{TiePolicy, WeightKind};

fn main() -> aurc::Result<()> {
    let scores = [0.95, 0.40, 0.88, 0.10, 0.67, 0.73, 0.55, 0.21];
    let losses = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];

    let curve = risk_coverage_curve(&losses, &scores)?;
    println!("{:>9} {:>9} {:>9}", "threshold", "coverage", "risk");
    for p in &curve {
        println!("{:>9.2} {:>9.3} {:>9.4}", p.threshold, p.coverage, p.risk);
    }

    let area = curve.iter().map(|p| p.risk).sum::<f64>() / curve.len() as f64;
    let naive = naive_empirical_aurc(&losses, &scores)?;
    let plug = plugin_aurc(&losses, &scores, WeightKind::AlphaHat, TiePolicy::Stable)?.value;
    println!("\nmean risk {area:.6}  naive {naive:.6}  plug-in {plug:.6}");
    Ok(())
}
