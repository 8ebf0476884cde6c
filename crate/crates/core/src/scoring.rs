//! Per-sample losses and confidence score functions (CSFs) computed from logits.
//!
//! Probabilities are never materialized for the losses: everything goes
//! through a max-shifted log-sum-exp.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logits of one observation and its integer label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsRecord {
    pub logits: Vec<f64>,
    pub label: usize,
}

impl LogitsRecord {
    /// Validated constructor: at least two classes, finite logits, label in range.
    pub fn new(logits: Vec<f64>, label: usize) -> Result<Self> {
        let rec = LogitsRecord { logits, label };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.logits.len();
        if k < 2 {
            return Err(Error::invalid(format!("need at least 2 logits, got {k}")));
        }
        if let Some(i) = self.logits.iter().position(|z| !z.is_finite()) {
            return Err(Error::invalid(format!("logit {i} is not finite ({})", self.logits[i])));
        }
        if self.label >= k {
            return Err(Error::invalid(format!("label {} out of range 0..{k}", self.label)));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.logits.len()
    }
}

fn max_of(z: &[f64]) -> f64 {
    z.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `ln Σ exp(z_i)`, shifted by the maximum.
pub fn log_sum_exp(z: &[f64]) -> f64 {
    let m = max_of(z);
    if !m.is_finite() {
        return m;
    }
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = max_of(logits);
    let mut p: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = p.iter().sum();
    for v in &mut p {
        *v /= s;
    }
    p
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &z) in logits.iter().enumerate().skip(1) {
        if z > logits[best] {
            best = i;
        }
    }
    best
}

/// 0 if the lowest-index argmax equals the label, else 1.
pub fn zero_one_loss(rec: &LogitsRecord) -> f64 {
    if argmax(&rec.logits) == rec.label {
        0.0
    } else {
        1.0
    }
}

/// `−ln softmax(z)[label] = lse(z) − z_label`.
pub fn cross_entropy_loss(rec: &LogitsRecord) -> f64 {
    // clamp rounding noise when the label dominates
    (log_sum_exp(&rec.logits) - rec.logits[rec.label]).max(0.0)
}

/// Per-sample loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    ZeroOne,
    CrossEntropy,
}

impl LossKind {
    pub fn loss(self, rec: &LogitsRecord) -> f64 {
        match self {
            LossKind::ZeroOne => zero_one_loss(rec),
            LossKind::CrossEntropy => cross_entropy_loss(rec),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::ZeroOne => "zero_one",
            LossKind::CrossEntropy => "cross_entropy",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "01" | "0/1" | "zero_one" | "zero-one" => Ok(LossKind::ZeroOne),
            "ce" | "cross_entropy" | "cross-entropy" => Ok(LossKind::CrossEntropy),
            _ => Err(Error::Usage(format!("unknown loss `{s}` (01|ce)"))),
        }
    }
}

/// The confidence score functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsfKind {
    /// `max_i p_i`
    #[default]
    Msp,
    /// `max_i z_i`
    MaxLogit,
    /// top-1 minus runner-up probability
    SoftmaxMargin,
    /// `Σ p_i ln p_i`
    NegEntropy,
    /// `‖z‖_p`
    MaxLogitPNorm,
    /// `−1 + Σ p_i²`
    NegGini,
}

impl CsfKind {
    pub const ALL: [CsfKind; 6] = [
        CsfKind::Msp,
        CsfKind::MaxLogit,
        CsfKind::SoftmaxMargin,
        CsfKind::NegEntropy,
        CsfKind::MaxLogitPNorm,
        CsfKind::NegGini,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CsfKind::Msp => "msp",
            CsfKind::MaxLogit => "max_logit",
            CsfKind::SoftmaxMargin => "softmax_margin",
            CsfKind::NegEntropy => "neg_entropy",
            CsfKind::MaxLogitPNorm => "max_logit_p_norm",
            CsfKind::NegGini => "neg_gini",
        }
    }
}

impl fmt::Display for CsfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CsfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        CsfKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .or(match norm.as_str() {
                "max_logit_pnorm" | "pnorm" => Some(CsfKind::MaxLogitPNorm),
                "entropy" => Some(CsfKind::NegEntropy),
                "gini" => Some(CsfKind::NegGini),
                "margin" => Some(CsfKind::SoftmaxMargin),
                _ => None,
            })
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown confidence score `{s}` (msp|max-logit|softmax-margin|neg-entropy|max-logit-pnorm|neg-gini)"
                ))
            })
    }
}

/// A CSF together with its norm order (used by `MaxLogitPNorm` only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Csf {
    pub kind: CsfKind,
    pub p: f64,
}

impl Default for Csf {
    fn default() -> Self {
        Csf {
            kind: CsfKind::Msp,
            p: 2.0,
        }
    }
}

impl Csf {
    pub fn new(kind: CsfKind, p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 || p.is_infinite() {
            return Err(Error::domain(format!("norm order p must be a positive real, got {p}")));
        }
        Ok(Csf { kind, p })
    }

    pub fn score(&self, rec: &LogitsRecord) -> f64 {
        score_unchecked(&rec.logits, self.kind, self.p)
    }
}

/// Confidence score of `rec` under `kind`; larger means more confident.
pub fn confidence_score(rec: &LogitsRecord, kind: CsfKind, p: f64) -> Result<f64> {
    Ok(Csf::new(kind, p)?.score(rec))
}

fn score_unchecked(z: &[f64], kind: CsfKind, p: f64) -> f64 {
    match kind {
        CsfKind::MaxLogit => max_of(z),
        CsfKind::MaxLogitPNorm => lp_norm(z, p),
        CsfKind::Msp => {
            let m = max_of(z);
            1.0 / z.iter().map(|&v| (v - m).exp()).sum::<f64>()
        }
        CsfKind::SoftmaxMargin => {
            let lse = log_sum_exp(z);
            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &v in z {
                if v > first {
                    second = first;
                    first = v;
                } else if v > second {
                    second = v;
                }
            }
            (first - lse).exp() - (second - lse).exp()
        }
        CsfKind::NegEntropy => {
            let lse = log_sum_exp(z);
            z.iter()
                .map(|&v| {
                    let lp = v - lse;
                    let pr = lp.exp();
                    if pr > 0.0 {
                        pr * lp
                    } else {
                        0.0
                    }
                })
                .sum()
        }
        CsfKind::NegGini => {
            let lse = log_sum_exp(z);
            -1.0 + z.iter().map(|&v| (2.0 * (v - lse)).exp()).sum::<f64>()
        }
    }
}

fn lp_norm(z: &[f64], p: f64) -> f64 {
    let m = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * z.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Scores and losses of every record, in input order.
pub fn scores_and_losses(records: &[LogitsRecord], csf: Csf, loss: LossKind) -> (Vec<f64>, Vec<f64>) {
    records.iter().map(|r| (csf.score(r), loss.loss(r))).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(z: &[f64], y: usize) -> LogitsRecord {
        LogitsRecord::new(z.to_vec(), y).unwrap()
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        for c in [-700.0, 0.0, 3.5, 800.0] {
            let p = softmax(&[c, c, c]);
            for v in p {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln()]);
        for (a, b) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = softmax(&[1000.0, -1000.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_one_examples() {
        assert_eq!(zero_one_loss(&rec(&[2.0, 1.0], 0)), 0.0);
        assert_eq!(zero_one_loss(&rec(&[2.0, 1.0], 1)), 1.0);
        assert_eq!(zero_one_loss(&rec(&[1.0, 1.0], 1)), 1.0);
        assert_eq!(zero_one_loss(&rec(&[1.0, 1.0], 0)), 0.0);
    }

    #[test]
    fn cross_entropy_examples() {
        assert!((cross_entropy_loss(&rec(&[0.0, 0.0], 0)) - 2f64.ln()).abs() < 1e-15);
        assert!((cross_entropy_loss(&rec(&[0.0; 4], 2)) - 4f64.ln()).abs() < 1e-15);
        assert!((cross_entropy_loss(&rec(&[3.0, 0.0], 0)) - 0.048_587_351_573_742_06).abs() < 1e-15);
        // no overflow for extreme logits
        let ce = cross_entropy_loss(&rec(&[1000.0, -1000.0], 1));
        assert!((ce - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn csf_examples() {
        let k = 7;
        let u = rec(&vec![0.3; k], 0);
        assert!((Csf::default().score(&u) - 1.0 / k as f64).abs() < 1e-15);
        let g = confidence_score(&u, CsfKind::NegGini, 2.0).unwrap();
        assert!((g - (-1.0 + 1.0 / k as f64)).abs() < 1e-15);
        let e = confidence_score(&u, CsfKind::NegEntropy, 2.0).unwrap();
        assert!((e + (k as f64).ln()).abs() < 1e-14);
        let msp = confidence_score(&rec(&[3.0, 4.0], 0), CsfKind::Msp, 2.0).unwrap();
        assert!((msp - 0.731_058_578_630_004_9).abs() < 1e-15);
        let r = rec(&[3.0, -4.0, 1.0], 2);
        assert_eq!(confidence_score(&r, CsfKind::MaxLogit, 2.0).unwrap(), 3.0);
        assert!((confidence_score(&r, CsfKind::MaxLogitPNorm, 2.0).unwrap() - 26f64.sqrt()).abs() < 1e-14);
        assert!((confidence_score(&r, CsfKind::MaxLogitPNorm, 1.0).unwrap() - 8.0).abs() < 1e-14);
        let p = softmax(&r.logits);
        let margin = confidence_score(&r, CsfKind::SoftmaxMargin, 2.0).unwrap();
        assert!((margin - (p[0] - p[2])).abs() < 1e-15);
    }

    #[test]
    fn binary_margin_is_affine_in_msp() {
        let r = rec(&[0.2, 1.7], 0);
        let msp = confidence_score(&r, CsfKind::Msp, 2.0).unwrap();
        let m = confidence_score(&r, CsfKind::SoftmaxMargin, 2.0).unwrap();
        assert!((m - (2.0 * msp - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs() {
        assert!(LogitsRecord::new(vec![1.0], 0).is_err());
        assert!(LogitsRecord::new(vec![1.0, f64::NAN], 0).is_err());
        assert!(LogitsRecord::new(vec![1.0, 2.0], 2).is_err());
        let r = rec(&[1.0, 2.0], 0);
        assert!(matches!(confidence_score(&r, CsfKind::MaxLogitPNorm, 0.0), Err(Error::Domain(_))));
        assert!(matches!(confidence_score(&r, CsfKind::Msp, -1.0), Err(Error::Domain(_))));
        assert!(matches!("softmax".parse::<CsfKind>(), Err(Error::Usage(_))));
    }

    #[test]
    fn parse_names() {
        assert_eq!("max-logit-pnorm".parse::<CsfKind>().unwrap(), CsfKind::MaxLogitPNorm);
        assert_eq!("neg_gini".parse::<CsfKind>().unwrap(), CsfKind::NegGini);
        assert_eq!("01".parse::<LossKind>().unwrap(), LossKind::ZeroOne);
        assert_eq!("ce".parse::<LossKind>().unwrap(), LossKind::CrossEntropy);
    }
}
