//! Fixed-rank MSE of alpha and alpha' against the rate envelope, and the average MSE.
//!
//! `cargo run --example mse_bounds`

use aurc::theory::{avg_mse_closed_form, avg_mse_direct, mse_alpha_hat, mse_alpha_prime, mse_bound, percentile_of_rank};

fn main() -> aurc::Result<()> {
    let n = 32;
    println!("n = {n}");
    println!("{:>4} {:>7} {:>11} {:>11} {:>11}", "rank", "beta", "mse alpha", "mse alpha'", "envelope");
    for r in [1, 4, 8, 16, 24, 28, 31, 32] {
        let beta = percentile_of_rank(n, r);
        println!(
            "{r:>4} {beta:>7.4} {:>11.6} {:>11.6} {:>11.6}",
            mse_alpha_hat(n, r)?,
            mse_alpha_prime(n, r)?,
            mse_bound(n, beta)?
        );
    }

    println!("\n{:>8} {:>13} {:>13} {:>8}", "n", "closed form", "rank average", "ratio");
    for n in [10, 100, 1000, 10_000, 100_000] {
        let c = avg_mse_closed_form(n)?;
        let d = avg_mse_direct(n)?;
        println!("{n:>8} {c:>13.6e} {d:>13.6e} {:>8.4}", d / c);
    }
    Ok(())
}
