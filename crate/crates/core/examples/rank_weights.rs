//! The three rank-to-weight maps on a small batch.
//!
//! `cargo run --example rank_weights`

use aurc::ranking::{alpha_hat_weights, alpha_prime_weights, sele_weights};

fn main() -> aurc::Result<()> {
    let n = 10;
    let ranks: Vec<usize> = (1..=n).collect();
    let hat = alpha_hat_weights(n, &ranks)?;
    let prime = alpha_prime_weights(n, &ranks)?;
    let sele = sele_weights(n, &ranks)?;

    println!("{:>4} {:>10} {:>10} {:>10}", "rank", "alpha", "alpha'", "sele");
    for r in 0..n {
        println!(
            "{:>4} {:>10.6} {:>10.6} {:>10.6}",
            r + 1,
            hat.weights[r],
            prime.weights[r],
            sele.weights[r]
        );
    }
    println!("{:>4} {:>10.6} {:>10.6} {:>10.6}", "mean", hat.mean(), prime.mean(), sele.mean());
    Ok(())
}
