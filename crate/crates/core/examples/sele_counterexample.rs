//! Five samples, one error on the most confident: the plug-in estimate
//! exceeds twice the SELE score, so 2 x SELE is not an upper bound.
//!
//! `cargo run --example sele_counterexample`

use aurc::harness::counterexample_demo;

fn main() -> aurc::Result<()> {
    for top_loss in [1.0, 0.25, 0.0] {
        let r = counterexample_demo(top_loss)?;
        println!(
            "L = {top_loss:<4}  plug-in {:.6}  2 x SELE {:.6}  ratio {}  exceeds: {}",
            r.plugin_alpha_hat,
            r.sele_times_two,
            r.ratio.map_or("-".to_string(), |x| format!("{x:.5}")),
            r.holds
        );
    }
    Ok(())
}
