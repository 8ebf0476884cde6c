//! Bias of the three weight estimators across percentiles, with a simulated column.
//!
//! `cargo run --release --example bias_curves`

use aurc::theory::{beta_grid, bias_curve, McConfig};
use aurc::WeightKind;

fn main() -> aurc::Result<()> {
    let mc = Some(McConfig { reps: 50_000, seed: 42 });
    for n in [8, 64, 1024] {
        println!("n = {n}");
        println!("  {:>5} {:>11} {:>11} {:>11} {:>11}", "beta", "alpha", "alpha'", "sele", "alpha (mc)");
        let curves: Vec<_> = WeightKind::ALL
            .iter()
            .map(|&k| bias_curve(k, n, &beta_grid(), if k == WeightKind::AlphaHat { mc } else { None }))
            .collect::<aurc::Result<_>>()?;
        for i in (0..19).step_by(3) {
            let p = |c: usize| curves[c].points[i];
            println!(
                "  {:>5.2} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
                p(0).x,
                p(0).closed_form,
                p(1).closed_form,
                p(2).closed_form,
                p(0).mc_estimate.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
