//! Write a logits file, read it back as a stream and evaluate every estimator.
//!
//! `cargo run --example evaluate_logits`

use aurc::estimators::evaluate;
use aurc::harness::synthetic_logits;
use aurc::io::{render_report, write_dataset, DataFormat, DatasetReader, Provenance, ReportFormat};
use aurc::scoring::Csf;
use aurc::{EstimatorKind, LossKind, RngHandle, TiePolicy};

fn main() -> aurc::Result<()> {
    let dir = std::env::temp_dir().join("aurc-example");
    std::fs::create_dir_all(&dir).map_err(|e| aurc::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("logits.jsonl");

    let records = synthetic_logits(5_000, 10, 2.5, &mut RngHandle::new(1))?;
    write_dataset(&path, DataFormat::Jsonl, &records)?;

    let csf = Csf::default();
    let (mut scores, mut losses) = (Vec::new(), Vec::new());
    for rec in DatasetReader::open(&path, DataFormat::Jsonl)? {
        let rec = rec?;
        scores.push(csf.score(&rec));
        losses.push(LossKind::ZeroOne.loss(&rec));
    }

    let reports = evaluate(&losses, &scores, &EstimatorKind::ALL, TiePolicy::Stable)?;
    let prov = Provenance::new(None, &"example")?;
    print!("{}", render_report(&reports, ReportFormat::Csv, &prov)?);
    Ok(())
}
