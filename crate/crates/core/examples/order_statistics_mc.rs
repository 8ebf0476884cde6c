//! The r-th of n sorted uniforms is Beta(r, n+1-r); averaging -ln(1-U_(r))
//! recovers alpha_r = H_n - H_(n-r).
//!
//! `cargo run --release --example order_statistics_mc`

use aurc::theory::{mc_order_statistic_weight, mc_rank_mse, mse_alpha_hat};
use aurc::{RngHandle, WeightKind};

fn main() -> aurc::Result<()> {
    let n = 12;
    let mut rng = RngHandle::new(7);
    println!("{:>4} {:>10} {:>10} {:>9} {:>11} {:>11}", "rank", "alpha", "mc mean", "stderr", "mse", "mc mse");
    for r in [1, 3, 6, 9, 12] {
        let w = mc_order_statistic_weight(n, r, 100_000, &mut rng)?;
        let m = mc_rank_mse(n, r, WeightKind::AlphaHat, 100_000, &mut rng)?;
        println!(
            "{r:>4} {:>10.6} {:>10.6} {:>9.1e} {:>11.6} {:>11.6}",
            WeightKind::AlphaHat.weight(n, r, None),
            w.mean,
            w.stderr,
            mse_alpha_hat(n, r)?,
            m.mean
        );
    }
    Ok(())
}
