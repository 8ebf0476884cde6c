//! Ascending ranks of confidence scores and the per-sample AURC weights.
//!
//! A rank `r ∈ 1..=n` places a sample among the batch sorted by increasing
//! confidence, so the most confident sample has rank `n`. Three weight
//! estimators map a rank to an estimate of `−ln(1 − G(x))`:
//!
//! - `α̂_r  = H_n − H_{n−r}` (exact expectation over the order statistic),
//! - `α̂′_r = −ln(1 − r/(n+1))` (plugs in the order statistic's mean),
//! - `α̂^se_r = r/n` (the SELE weight).
//!
//! Elementwise `α̂′ ≤ α̂` (Jensen) and `α̂^se ≤ α̂` (each of the `r` terms of
//! `H_n − H_{n−r}` is at least `1/n`).

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::HarmonicTable;

/// How tied scores are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ties broken by input position; ranks form a permutation of `1..=n`.
    #[default]
    Stable,
    /// Members of a tied group share the mean of the weights the group's
    /// ranks would receive, so the estimate does not depend on input order.
    Average,
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::Stable => "stable",
            TiePolicy::Average => "average",
        })
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(TiePolicy::Stable),
            "average" | "avg" => Ok(TiePolicy::Average),
            _ => Err(Error::Usage(format!("unknown tie policy `{s}` (stable|average)"))),
        }
    }
}

/// Result of sorting a batch by confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    ranks: Vec<usize>,
    order: Vec<usize>,
    tie_groups: Vec<Range<usize>>,
    policy: TiePolicy,
}

impl Ranking {
    /// 1-based ascending rank of each input position.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Input positions in ascending score order (`order[r-1]` has rank `r`).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Runs of tied scores, as ranges of 0-based positions into [`order`](Self::order).
    /// Only runs of length ≥ 2 are listed.
    pub fn tie_groups(&self) -> &[Range<usize>] {
        &self.tie_groups
    }

    pub fn policy(&self) -> TiePolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Weights for every input position, honoring the tie policy.
    pub fn weights(&self, kind: WeightKind, table: &HarmonicTable) -> Result<WeightVector> {
        let n = self.len();
        let owned;
        let table = if table.n_max() >= n {
            table
        } else {
            owned = HarmonicTable::new(n);
            &owned
        };
        let mut wv = weights_for_ranks(kind, n, &self.ranks, Some(table))?;
        if self.policy == TiePolicy::Average {
            for group in &self.tie_groups {
                let mean = group
                    .clone()
                    .map(|pos| kind.weight(n, pos + 1, Some(table)))
                    .sum::<f64>()
                    / group.len() as f64;
                for &i in &self.order[group.clone()] {
                    wv.weights[i] = mean;
                }
            }
        }
        Ok(wv)
    }
}

/// Rank `scores` in ascending order.
///
/// Ties are always ordered by input position; under
/// [`TiePolicy::Average`] the tied runs are recorded so downstream weights
/// can be averaged over each run.
pub fn rank_ascending(scores: &[f64], policy: TiePolicy) -> Result<Ranking> {
    if scores.is_empty() {
        return Err(Error::invalid("cannot rank an empty score vector"));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::invalid(format!(
            "score at position {i} is not finite ({})",
            scores[i]
        )));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort; finite values so partial_cmp is total (and -0 == 0)
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut ranks = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    let mut tie_groups = Vec::new();
    let mut start = 0;
    for pos in 1..=n {
        if pos == n || scores[order[pos]] != scores[order[start]] {
            if pos - start > 1 {
                tie_groups.push(start..pos);
            }
            start = pos;
        }
    }
    Ok(Ranking {
        ranks,
        order,
        tie_groups,
        policy,
    })
}

/// Which rank-to-weight map to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `H_n − H_{n−r}`
    AlphaHat,
    /// `−ln(1 − r/(n+1))`
    AlphaPrime,
    /// `r/n`
    Sele,
}

impl WeightKind {
    pub const ALL: [WeightKind; 3] = [WeightKind::AlphaHat, WeightKind::AlphaPrime, WeightKind::Sele];

    /// Weight of rank `r` in a batch of `n`. `table` must cover `n` when
    /// given; `AlphaHat` falls back to direct summation otherwise.
    #[inline]
    pub fn weight(self, n: usize, r: usize, table: Option<&HarmonicTable>) -> f64 {
        match self {
            WeightKind::AlphaHat => match table {
                Some(t) => t.diff(n, n - r),
                None => ((n - r + 1)..=n).rev().map(|k| 1.0 / k as f64).sum(),
            },
            WeightKind::AlphaPrime => -(-(r as f64) / (n as f64 + 1.0)).ln_1p(),
            WeightKind::Sele => r as f64 / n as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::AlphaHat => "alpha_hat",
            WeightKind::AlphaPrime => "alpha_prime",
            WeightKind::Sele => "sele",
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" | "alpha_hat" | "alpha-hat" => Ok(WeightKind::AlphaHat),
            "alpha-prime" | "alpha_prime" => Ok(WeightKind::AlphaPrime),
            "sele" => Ok(WeightKind::Sele),
            _ => Err(Error::Usage(format!(
                "unknown weight kind `{s}` (alpha|alpha-prime|sele)"
            ))),
        }
    }
}

/// Per-sample weights of one kind, aligned with the input positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub kind: WeightKind,
    pub n: usize,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn mean(&self) -> f64 {
        self.weights.iter().sum::<f64>() / self.n as f64
    }

    /// `(1/n) Σ w_i ℓ_i`.
    pub fn weighted_mean(&self, losses: &[f64]) -> f64 {
        debug_assert_eq!(losses.len(), self.n);
        self.weights
            .iter()
            .zip(losses)
            .map(|(w, l)| w * l)
            .sum::<f64>()
            / self.n as f64
    }
}

/// Weights for an explicit rank vector. Ranks must lie in `1..=n` and
/// `ranks.len()` must equal `n`.
pub fn weights_for_ranks(
    kind: WeightKind,
    n: usize,
    ranks: &[usize],
    table: Option<&HarmonicTable>,
) -> Result<WeightVector> {
    if ranks.len() != n {
        return Err(Error::invalid(format!(
            "rank vector has {} entries, expected n = {n}",
            ranks.len()
        )));
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > n) {
        return Err(Error::domain(format!("rank {r} outside 1..={n}")));
    }
    let owned;
    let table = match (kind, table) {
        (WeightKind::AlphaHat, Some(t)) if t.n_max() >= n => Some(t),
        (WeightKind::AlphaHat, _) => {
            owned = HarmonicTable::new(n);
            Some(&owned)
        }
        (_, t) => t,
    };
    let weights = ranks.iter().map(|&r| kind.weight(n, r, table)).collect();
    Ok(WeightVector { kind, n, weights })
}

/// `α̂_i = H_n − H_{n−r_i}`.
pub fn alpha_hat_weights(n: usize, ranks: &[usize]) -> Result<WeightVector> {
    weights_for_ranks(WeightKind::AlphaHat, n, ranks, None)
}

/// `α̂′_i = −ln(1 − r_i/(n+1))`.
pub fn alpha_prime_weights(n: usize, ranks: &[usize]) -> Result<WeightVector> {
    weights_for_ranks(WeightKind::AlphaPrime, n, ranks, None)
}

/// `α̂^se_i = r_i/n`.
pub fn sele_weights(n: usize, ranks: &[usize]) -> Result<WeightVector> {
    weights_for_ranks(WeightKind::Sele, n, ranks, None)
}

/// A scored batch with its losses and ranking.
#[derive(Debug, Clone)]
pub struct RankedBatch {
    scores: Vec<f64>,
    losses: Vec<f64>,
    ranking: Ranking,
}

impl RankedBatch {
    pub fn new(scores: Vec<f64>, losses: Vec<f64>, policy: TiePolicy) -> Result<Self> {
        validate_losses(&losses, scores.len())?;
        let ranking = rank_ascending(&scores, policy)?;
        Ok(RankedBatch {
            scores,
            losses,
            ranking,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn ranks(&self) -> &[usize] {
        self.ranking.ranks()
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.ranking.policy()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `(1/n) Σ w_i ℓ_i` for the given weight kind.
    pub fn weighted_risk(&self, kind: WeightKind, table: &HarmonicTable) -> Result<f64> {
        Ok(self.ranking.weights(kind, table)?.weighted_mean(&self.losses))
    }
}

pub(crate) fn validate_losses(losses: &[f64], n_scores: usize) -> Result<()> {
    if losses.len() != n_scores {
        return Err(Error::invalid(format!(
            "{} losses for {} scores",
            losses.len(),
            n_scores
        )));
    }
    if losses.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if let Some(i) = losses.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::invalid(format!(
            "loss at position {i} must be finite and non-negative, got {}",
            losses[i]
        )));
    }
    Ok(())
}
