//! Harmonic numbers, digamma and trigamma side by side.
//!
//! `cargo run --example harmonic_digamma`

use aurc::special::{digamma, harmonic_prefix, trigamma, EULER_GAMMA};

fn main() -> aurc::Result<()> {
    let h = harmonic_prefix(100_000);
    println!("{:>8} {:>22} {:>22} {:>10}", "n", "H_n", "psi(n+1) + gamma", "diff");
    for n in [1usize, 5, 10, 100, 1000, 100_000] {
        let via_psi = digamma(n as f64 + 1.0)? + EULER_GAMMA;
        println!("{n:>8} {:>22.16} {:>22.16} {:>10.1e}", h.get(n), via_psi, h.get(n) - via_psi);
    }

    println!("\ntrigamma tail sums: psi'(n+1-r) - psi'(n+1) = sum_(k=n+1-r)^n 1/k^2");
    let (n, r) = (50usize, 20usize);
    let closed = trigamma((n + 1 - r) as f64)? - trigamma((n + 1) as f64)?;
    let direct: f64 = (n + 1 - r..=n).map(|k| 1.0 / (k * k) as f64).sum();
    println!("n = {n}, r = {r}: {closed:.15} vs {direct:.15}");
    Ok(())
}
