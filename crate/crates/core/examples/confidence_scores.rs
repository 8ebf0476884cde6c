//! Every confidence score function and both losses on a few logit vectors.
//!
//! `cargo run --example confidence_scores`

use aurc::scoring::{confidence_score, softmax};
use aurc::{CsfKind, LogitsRecord, LossKind};

fn main() -> aurc::Result<()> {
    let records = [
        LogitsRecord::new(vec![3.0, 0.0, -1.0], 0)?,
        LogitsRecord::new(vec![0.2, 0.1, 0.0], 2)?,
        LogitsRecord::new(vec![-5.0, 8.0, 7.5], 1)?,
    ];
    for rec in &records {
        let p = softmax(&rec.logits);
        println!("logits {:?} label {} probs {:.3?}", rec.logits, rec.label, p);
        for kind in CsfKind::ALL {
            println!("  {:<16} {:>10.5}", kind.name(), confidence_score(rec, kind, 2.0)?);
        }
        println!(
            "  0/1 loss {}  cross-entropy {:.5}\n",
            LossKind::ZeroOne.loss(rec),
            LossKind::CrossEntropy.loss(rec)
        );
    }
    Ok(())
}
