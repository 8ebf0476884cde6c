//! AURC estimators on a finite batch and on a population with known percentiles.
//!
//! The empirical AURC
//!
//! ```text
//! (1/n) Σ_j  [ (1/n) Σ_i ℓ_i 1[g_i ≥ g_j] ] / [ (1/n) Σ_k 1[g_k ≥ g_j] ]
//! ```
//!
//! is evaluated literally by [`naive_empirical_aurc`] in `O(n²)`. On
//! tie-free scores it equals the plug-in form `(1/n) Σ α̂_i ℓ_i` computed by
//! [`plugin_aurc`] after one sort.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{rank_ascending, validate_losses, Ranking, TiePolicy, WeightKind};
use crate::scoring::{CsfKind, LossKind};
use crate::special::HarmonicTable;

/// Largest batch the quadratic oracle accepts.
pub const NAIVE_MAX_N: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    NaiveEmpirical,
    PluginAlphaHat,
    PluginAlphaPrime,
    Sele,
    SeleTimesTwo,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::NaiveEmpirical,
        EstimatorKind::PluginAlphaHat,
        EstimatorKind::PluginAlphaPrime,
        EstimatorKind::Sele,
        EstimatorKind::SeleTimesTwo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::NaiveEmpirical => "naive_empirical",
            EstimatorKind::PluginAlphaHat => "plugin_alpha_hat",
            EstimatorKind::PluginAlphaPrime => "plugin_alpha_prime",
            EstimatorKind::Sele => "sele",
            EstimatorKind::SeleTimesTwo => "sele_times_two",
        }
    }

    /// The rank weight behind this estimator and its multiplier, if it is rank based.
    fn weight(self) -> Option<(WeightKind, f64)> {
        match self {
            EstimatorKind::NaiveEmpirical => None,
            EstimatorKind::PluginAlphaHat => Some((WeightKind::AlphaHat, 1.0)),
            EstimatorKind::PluginAlphaPrime => Some((WeightKind::AlphaPrime, 1.0)),
            EstimatorKind::Sele => Some((WeightKind::Sele, 1.0)),
            EstimatorKind::SeleTimesTwo => Some((WeightKind::Sele, 2.0)),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" | "naive_empirical" | "naive-empirical" => Ok(EstimatorKind::NaiveEmpirical),
            "alpha" | "alpha-hat" | "alpha_hat" | "plugin_alpha_hat" => Ok(EstimatorKind::PluginAlphaHat),
            "alpha-prime" | "alpha_prime" | "plugin_alpha_prime" => Ok(EstimatorKind::PluginAlphaPrime),
            "sele" => Ok(EstimatorKind::Sele),
            "sele2" | "2sele" | "sele_times_two" | "sele-times-two" => Ok(EstimatorKind::SeleTimesTwo),
            _ => Err(Error::Usage(format!(
                "unknown estimator `{s}` (naive|alpha|alpha-prime|sele|sele2)"
            ))),
        }
    }
}

/// One estimator evaluated on one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub estimator: EstimatorKind,
    pub value: f64,
    pub n: usize,
    pub loss_kind: Option<LossKind>,
    pub csf_kind: Option<CsfKind>,
    pub tie_policy: TiePolicy,
    pub seed: Option<u64>,
}

impl EstimatorReport {
    fn bare(estimator: EstimatorKind, value: f64, n: usize, tie_policy: TiePolicy) -> Self {
        EstimatorReport {
            estimator,
            value,
            n,
            loss_kind: None,
            csf_kind: None,
            tie_policy,
            seed: None,
        }
    }

    pub fn with_loss(mut self, loss: LossKind) -> Self {
        self.loss_kind = Some(loss);
        self
    }

    pub fn with_csf(mut self, csf: CsfKind) -> Self {
        self.csf_kind = Some(csf);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn check_batch(losses: &[f64], scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Usage("empty batch".into()));
    }
    validate_losses(losses, scores.len())?;
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::invalid(format!("score at position {i} is not finite")));
    }
    Ok(())
}

/// Literal double-loop evaluation of the empirical AURC (ties count as accepted).
///
/// Quadratic; refuses batches larger than [`NAIVE_MAX_N`].
pub fn naive_empirical_aurc(losses: &[f64], scores: &[f64]) -> Result<f64> {
    check_batch(losses, scores)?;
    let n = scores.len();
    if n > NAIVE_MAX_N {
        return Err(Error::Usage(format!(
            "naive O(n²) AURC is capped at n ≤ {NAIVE_MAX_N}, got n = {n}"
        )));
    }
    let nf = n as f64;
    let mut total = 0.0;
    for &threshold in scores {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&l, &s) in losses.iter().zip(scores) {
            if s >= threshold {
                num += l;
                den += 1.0;
            }
        }
        total += (num / nf) / (den / nf);
    }
    Ok(total / nf)
}

fn ranked_value(
    kind: EstimatorKind,
    ranking: &Ranking,
    losses: &[f64],
    table: &HarmonicTable,
) -> Result<f64> {
    let (weight, scale) = kind
        .weight()
        .expect("rank-based estimator");
    Ok(scale * ranking.weights(weight, table)?.weighted_mean(losses))
}

/// Plug-in AURC `(1/n) Σ w_i ℓ_i` with weights of `weight_kind`.
///
/// With [`WeightKind::Sele`] this is the SELE score.
pub fn plugin_aurc(
    losses: &[f64],
    scores: &[f64],
    weight_kind: WeightKind,
    tie_policy: TiePolicy,
) -> Result<EstimatorReport> {
    let kind = match weight_kind {
        WeightKind::AlphaHat => EstimatorKind::PluginAlphaHat,
        WeightKind::AlphaPrime => EstimatorKind::PluginAlphaPrime,
        WeightKind::Sele => EstimatorKind::Sele,
    };
    Ok(evaluate(losses, scores, &[kind], tie_policy)?.remove(0))
}

/// SELE score `Σ r_i ℓ_i / n²`, computed from ranks in `O(n ln n)`.
pub fn sele_score(losses: &[f64], scores: &[f64], tie_policy: TiePolicy) -> Result<EstimatorReport> {
    Ok(evaluate(losses, scores, &[EstimatorKind::Sele], tie_policy)?.remove(0))
}

/// Evaluate several estimators on one batch, ranking it once.
pub fn evaluate(
    losses: &[f64],
    scores: &[f64],
    kinds: &[EstimatorKind],
    tie_policy: TiePolicy,
) -> Result<Vec<EstimatorReport>> {
    check_batch(losses, scores)?;
    let n = scores.len();
    let needs_ranks = kinds.iter().any(|k| k.weight().is_some());
    let (ranking, table) = if needs_ranks {
        let table = if kinds.contains(&EstimatorKind::PluginAlphaHat) {
            HarmonicTable::new(n)
        } else {
            HarmonicTable::new(0)
        };
        (Some(rank_ascending(scores, tie_policy)?), table)
    } else {
        (None, HarmonicTable::new(0))
    };
    kinds
        .iter()
        .map(|&kind| {
            let value = match kind {
                EstimatorKind::NaiveEmpirical => naive_empirical_aurc(losses, scores)?,
                _ => ranked_value(kind, ranking.as_ref().unwrap(), losses, &table)?,
            };
            Ok(EstimatorReport::bare(kind, value, n, tie_policy))
        })
        .collect()
}

/// Rank-based estimate on a pre-ranked batch, reusing a harmonic table that covers `n`.
pub fn evaluate_ranked(
    kind: EstimatorKind,
    ranking: &Ranking,
    losses: &[f64],
    scores: &[f64],
    table: &HarmonicTable,
) -> Result<f64> {
    match kind {
        EstimatorKind::NaiveEmpirical => naive_empirical_aurc(losses, scores),
        _ => ranked_value(kind, ranking, losses, table),
    }
}

/// Samples with known population percentiles `β_i = G(x_i)` and their losses.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    percentiles: Vec<f64>,
    losses: Vec<f64>,
}

impl PopulationSpec {
    /// Percentiles must be distinct and lie in (0, 1).
    pub fn new(percentiles: Vec<f64>, losses: Vec<f64>) -> Result<Self> {
        if percentiles.is_empty() {
            return Err(Error::invalid("population is empty"));
        }
        validate_losses(&losses, percentiles.len())?;
        if let Some(&b) = percentiles.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::domain(format!(
                "percentile {b} outside (0, 1); the weight −ln(1−β) diverges at β = 1"
            )));
        }
        let mut sorted = percentiles.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate percentile {}", w[0])));
        }
        Ok(PopulationSpec { percentiles, losses })
    }

    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.percentiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.percentiles.is_empty()
    }
}

/// Population AURC `mean_i −ln(1 − β_i) ℓ_i` using the true percentiles.
pub fn population_aurc(spec: &PopulationSpec) -> f64 {
    let sum: f64 = spec
        .percentiles
        .iter()
        .zip(&spec.losses)
        .map(|(&b, &l)| -(-b).ln_1p() * l)
        .sum();
    sum / spec.len() as f64
}

/// One point of the empirical risk-coverage curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskCoveragePoint {
    pub threshold: f64,
    pub coverage: f64,
    pub risk: f64,
}

/// Selective risk at each of the `n` empirical thresholds, in ascending
/// threshold order (coverage from 1 downwards). Samples with score ≥ the
/// threshold are accepted. The mean of the `risk` column is the empirical AURC.
pub fn risk_coverage_curve(losses: &[f64], scores: &[f64]) -> Result<Vec<RiskCoveragePoint>> {
    check_batch(losses, scores)?;
    let n = scores.len();
    let ranking = rank_ascending(scores, TiePolicy::Stable)?;
    let order = ranking.order();
    let mut suffix = vec![0.0; n + 1];
    for pos in (0..n).rev() {
        suffix[pos] = suffix[pos + 1] + losses[order[pos]];
    }
    let mut points = Vec::with_capacity(n);
    let mut group_start = 0;
    for pos in 0..n {
        let s = scores[order[pos]];
        if pos > 0 && s != scores[order[pos - 1]] {
            group_start = pos;
        }
        let accepted = (n - group_start) as f64;
        points.push(RiskCoveragePoint {
            threshold: s,
            coverage: accepted / n as f64,
            risk: suffix[group_start] / accepted,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(losses: &[f64], scores: &[f64], kind: EstimatorKind) -> f64 {
        evaluate(losses, scores, &[kind], TiePolicy::Stable).unwrap()[0].value
    }

    #[test]
    fn single_point_batch() {
        let l = [0.7];
        let s = [0.3];
        assert_eq!(naive_empirical_aurc(&l, &s).unwrap(), 0.7);
        assert!((value(&l, &s, EstimatorKind::PluginAlphaHat) - 0.7).abs() < 1e-15);
        assert!((value(&l, &s, EstimatorKind::PluginAlphaPrime) - 0.7 * 2f64.ln()).abs() < 1e-15);
        assert!((value(&l, &s, EstimatorKind::Sele) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_point_hand_expansion() {
        let (a, b) = (0.3, 0.9);
        let want = ((a + b) / 2.0 + b) / 2.0;
        let got = naive_empirical_aurc(&[a, b], &[0.1, 0.8]).unwrap();
        assert!((got - want).abs() < 1e-15);
        let curve = risk_coverage_curve(&[a, b], &[0.1, 0.8]).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!((curve[0].coverage, curve[0].risk), (1.0, (a + b) / 2.0));
        assert_eq!((curve[1].coverage, curve[1].risk), (0.5, b));
    }

    #[test]
    fn counterexample_numbers() {
        let losses = [0.0, 0.0, 0.0, 0.0, 1.0];
        let scores = [0.1, 0.2, 0.3, 0.4, 0.5];
        let hat = value(&losses, &scores, EstimatorKind::PluginAlphaHat);
        assert!((hat - 2.283_333_333_333_333 / 5.0).abs() < 1e-15);
        assert!((value(&losses, &scores, EstimatorKind::Sele) - 0.2).abs() < 1e-15);
        assert!((value(&losses, &scores, EstimatorKind::SeleTimesTwo) - 0.4).abs() < 1e-15);
        assert!(hat > 0.4);
    }

    #[test]
    fn constant_losses() {
        let scores: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let losses = vec![0.6; 37];
        assert!((value(&losses, &scores, EstimatorKind::PluginAlphaHat) - 0.6).abs() < 1e-14);
        let sele = value(&losses, &scores, EstimatorKind::Sele);
        assert!((sele - 0.6 * 38.0 / 74.0).abs() < 1e-14);
        let zeros = vec![0.0; 37];
        assert_eq!(value(&zeros, &scores, EstimatorKind::Sele), 0.0);
    }

    #[test]
    fn naive_cap_and_empty() {
        assert!(matches!(naive_empirical_aurc(&[], &[]), Err(Error::Usage(_))));
        let big = vec![0.0; NAIVE_MAX_N + 1];
        assert!(matches!(naive_empirical_aurc(&big, &big), Err(Error::Usage(_))));
        assert!(evaluate(&[1.0], &[0.1, 0.2], &[EstimatorKind::Sele], TiePolicy::Stable).is_err());
    }

    #[test]
    fn curve_with_ties_still_averages_to_naive() {
        let scores = [0.5, 0.1, 0.5, 0.9, 0.1, 0.5];
        let losses = [1.0, 0.0, 0.3, 0.2, 1.0, 0.0];
        let curve = risk_coverage_curve(&losses, &scores).unwrap();
        let mean = curve.iter().map(|p| p.risk).sum::<f64>() / curve.len() as f64;
        assert!((mean - naive_empirical_aurc(&losses, &scores).unwrap()).abs() < 1e-15);
        assert!(curve.windows(2).all(|w| w[0].coverage >= w[1].coverage));
    }

    #[test]
    fn population_examples() {
        let p = PopulationSpec::new(vec![0.5], vec![1.0]).unwrap();
        assert!((population_aurc(&p) - 2f64.ln()).abs() < 1e-15);
        let n = 100_000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let ones = PopulationSpec::new(grid.clone(), vec![1.0; n]).unwrap();
        assert!((population_aurc(&ones) - 1.0).abs() < 1e-4);
        let zeros = PopulationSpec::new(grid, vec![0.0; n]).unwrap();
        assert_eq!(population_aurc(&zeros), 0.0);
        assert!(matches!(PopulationSpec::new(vec![1.0], vec![1.0]), Err(Error::Domain(_))));
        assert!(PopulationSpec::new(vec![0.2, 0.2], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert_eq!("sele2".parse::<EstimatorKind>().unwrap(), EstimatorKind::SeleTimesTwo);
    }
}
