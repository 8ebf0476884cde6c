//! Bias and MSE of the rank-based weight estimators, in closed form and by
//! simulation.
//!
//! Two conditioning schemes appear here and must not be mixed up:
//!
//! - **fixed percentile** `β`: a sample at population percentile `β` joins
//!   `n − 1` fresh i.i.d. draws, so its rank is `r = 1 + Bin(n−1, β)`. The
//!   bias functions average the weight over that binomial rank.
//! - **fixed rank** `r`: the sample's percentile is the `r`-th uniform order
//!   statistic, `β ~ Beta(r, n+1−r)`. The MSE functions average over that Beta
//!   law; this is where `ψ′(n+1−r) − ψ′(n+1)` comes from.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::WeightKind;
use crate::sampling::{BetaSampler, RngHandle};
use crate::special::{log_binomial_pmf, trigamma, HarmonicTable};

// Above this batch size binomial terms below 1e-18 of the mode are skipped.
const TRUNCATE_ABOVE_N: usize = 10_000;
const LN_TRUNCATION: f64 = -41.446_531_673_892_82; // ln(1e-18)

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("batch size n must be at least 1"));
    }
    Ok(())
}

/// Percentiles are accepted on `[0, 1)`; `β = 0` is the limit in which the
/// sample is ranked first with certainty.
fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain(format!("percentile β = {beta} outside [0, 1)")));
    }
    Ok(())
}

fn check_rank(n: usize, rank: usize) -> Result<()> {
    check_n(n)?;
    if rank == 0 || rank > n {
        return Err(Error::domain(format!("rank {rank} outside 1..={n}")));
    }
    Ok(())
}

/// `E[f(r)]` for `r − 1 ~ Bin(n−1, β)`, summed in log space with a max shift.
fn binomial_rank_expectation(n: usize, beta: f64, f: impl Fn(usize) -> f64) -> Result<f64> {
    check_n(n)?;
    check_beta(beta)?;
    if beta == 0.0 || n == 1 {
        return Ok(f(1));
    }
    let trials = (n - 1) as u64;
    let log_pmf: Vec<f64> = (0..=trials)
        .map(|i| log_binomial_pmf(i, trials, beta))
        .collect::<Result<_>>()?;
    let max = log_pmf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = if n > TRUNCATE_ABOVE_N {
        max + LN_TRUNCATION
    } else {
        f64::NEG_INFINITY
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &lp) in log_pmf.iter().enumerate() {
        if lp < cutoff {
            continue;
        }
        let w = (lp - max).exp();
        num += w * f(i + 1);
        den += w;
    }
    Ok(num / den)
}

/// Expected weight of a sample at percentile `β` in a batch of `n`.
pub fn expected_weight(kind: WeightKind, n: usize, beta: f64) -> Result<f64> {
    let table = match kind {
        WeightKind::AlphaHat => Some(HarmonicTable::new(n)),
        _ => None,
    };
    binomial_rank_expectation(n, beta, |r| kind.weight(n, r, table.as_ref()))
}

/// `E[ŵ | β] − (−ln(1−β))` for any weight kind.
pub fn bias(kind: WeightKind, n: usize, beta: f64) -> Result<f64> {
    Ok(expected_weight(kind, n, beta)? + (-beta).ln_1p())
}

/// Bias of `α̂ = H_n − H_{n−r}` at percentile `β`:
/// `H_n − Σ_i H_{n−i} C(n−1,i−1) β^{i−1}(1−β)^{n−i} + ln(1−β)`.
pub fn bias_alpha_hat(n: usize, beta: f64) -> Result<f64> {
    bias(WeightKind::AlphaHat, n, beta)
}

/// Bias of `α̂′ = −ln(1 − r/(n+1))` at percentile `β`.
pub fn bias_alpha_prime(n: usize, beta: f64) -> Result<f64> {
    bias(WeightKind::AlphaPrime, n, beta)
}

/// Bias of the SELE weight `r/n`, using `E[r] = 1 + (n−1)β`:
/// `(1 + (n−1)β)/n + ln(1−β)`.
pub fn bias_sele(n: usize, beta: f64) -> Result<f64> {
    check_n(n)?;
    check_beta(beta)?;
    let nf = n as f64;
    Ok((1.0 + (nf - 1.0) * beta) / nf + (-beta).ln_1p())
}

/// The SELE bias as the literal binomial sum (cross-check of [`bias_sele`]).
pub fn bias_sele_sum(n: usize, beta: f64) -> Result<f64> {
    bias(WeightKind::Sele, n, beta)
}

/// `ψ′(n+1−r) − ψ′(n+1)`: MSE of `α̂` at rank `r`, with `β ~ Beta(r, n+1−r)`.
pub fn mse_alpha_hat(n: usize, rank: usize) -> Result<f64> {
    check_rank(n, rank)?;
    Ok(trigamma((n + 1 - rank) as f64)? - trigamma((n + 1) as f64)?)
}

/// `Σ_{k=n+1−r}^{n} 1/k²`, the telescoped form of [`mse_alpha_hat`].
pub fn mse_alpha_hat_telescoped(n: usize, rank: usize) -> Result<f64> {
    check_rank(n, rank)?;
    Ok((n + 1 - rank..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum())
}

/// MSE of an arbitrary rank-`r` weight `w` against `−ln(1−β)`,
/// `β ~ Beta(r, n+1−r)`: `ψ′(n+1−r) − ψ′(n+1) + (w − (H_n − H_{n−r}))²`.
fn mse_of_fixed_weight(n: usize, rank: usize, w: f64) -> Result<f64> {
    let var = mse_alpha_hat(n, rank)?;
    let hat = WeightKind::AlphaHat.weight(n, rank, None);
    Ok(var + (w - hat).powi(2))
}

/// MSE of `α̂′` at rank `r`: `ψ′(n+1−r) − ψ′(n+1) + Q²`,
/// `Q = ln(1 − r/(n+1)) + H_n − H_{n−r}`.
pub fn mse_alpha_prime(n: usize, rank: usize) -> Result<f64> {
    check_rank(n, rank)?;
    mse_of_fixed_weight(n, rank, WeightKind::AlphaPrime.weight(n, rank, None))
}

/// MSE at rank `r` for any weight kind (SELE included).
pub fn mse_at_rank(kind: WeightKind, n: usize, rank: usize) -> Result<f64> {
    match kind {
        WeightKind::AlphaHat => mse_alpha_hat(n, rank),
        WeightKind::AlphaPrime => mse_alpha_prime(n, rank),
        WeightKind::Sele => {
            check_rank(n, rank)?;
            mse_of_fixed_weight(n, rank, WeightKind::Sele.weight(n, rank, None))
        }
    }
}

/// `E[(ŵ(r) + ln(1−β))²]` with `r − 1 ~ Bin(n−1, β)`: the fixed-percentile
/// MSE that [`mc_weight_stats`] estimates. Not the same quantity as
/// [`mse_at_rank`].
pub fn mse_at_percentile(kind: WeightKind, n: usize, beta: f64) -> Result<f64> {
    let table = match kind {
        WeightKind::AlphaHat => Some(HarmonicTable::new(n)),
        _ => None,
    };
    let target = -(-beta).ln_1p();
    binomial_rank_expectation(n, beta, |r| (kind.weight(n, r, table.as_ref()) - target).powi(2))
}

/// Rate envelope `β / (n(1−β) + 1)` for the MSE of `α̂` and `α̂′`.
pub fn mse_bound(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let nf = n as f64;
    Ok(beta / (nf * (1.0 - beta) + 1.0))
}

/// `(n+1) ln(n+1) / n² − 1/n`, the integral of the envelope over `β ∈ (0,1)`.
pub fn avg_mse_closed_form(n: usize) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    Ok((nf + 1.0) * (nf + 1.0).ln() / (nf * nf) - 1.0 / nf)
}

/// `(1/n) Σ_r MSE(α̂_r)`, summed rank by rank.
pub fn avg_mse_direct(n: usize) -> Result<f64> {
    check_n(n)?;
    let mut total = 0.0;
    for r in 1..=n {
        total += mse_alpha_hat(n, r)?;
    }
    Ok(total / n as f64)
}

/// Rank whose expected percentile `r/(n+1)` is nearest to `β`, clamped to `1..=n`.
pub fn rank_for_percentile(n: usize, beta: f64) -> usize {
    let r = (beta * (n as f64 + 1.0)).round() as usize;
    r.clamp(1, n.max(1))
}

/// Mean percentile of rank `r`: `r/(n+1)`.
pub fn percentile_of_rank(n: usize, rank: usize) -> f64 {
    rank as f64 / (n as f64 + 1.0)
}

/// `β ∈ {0.05, 0.10, ..., 0.95}`.
pub fn beta_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// Running mean and variance (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Standard error of the mean; 0 for a single observation.
    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// Simulated bias and fixed-percentile MSE of a weight estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McWeightStats {
    pub bias_est: f64,
    pub mse_est: f64,
    pub stderr_bias: f64,
    pub stderr_mse: f64,
    pub reps: usize,
}

/// Draw `r = 1 + Bin(n−1, β)` `reps` times and average `ŵ(r) − α` and its
/// square, `α = −ln(1−β)`.
pub fn mc_weight_stats(
    n: usize,
    beta: f64,
    kind: WeightKind,
    reps: usize,
    rng: &mut RngHandle,
) -> Result<McWeightStats> {
    check_n(n)?;
    check_beta(beta)?;
    if reps == 0 {
        return Err(Error::domain("Monte Carlo needs at least one replicate"));
    }
    let binom = Binomial::new((n - 1) as u64, beta).map_err(|e| Error::domain(e.to_string()))?;
    let table = HarmonicTable::new(n);
    let target = -(-beta).ln_1p();
    let mut err = Moments::default();
    let mut sq = Moments::default();
    for _ in 0..reps {
        let r = 1 + binom.sample(rng) as usize;
        let e = kind.weight(n, r, Some(&table)) - target;
        err.push(e);
        sq.push(e * e);
    }
    Ok(McWeightStats {
        bias_est: err.mean,
        mse_est: sq.mean,
        stderr_bias: err.stderr(),
        stderr_mse: sq.stderr(),
        reps,
    })
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Simulated MSE at fixed rank: draw `β ~ Beta(r, n+1−r)` and average
/// `(ŵ(r) + ln(1−β))²`.
pub fn mc_rank_mse(
    n: usize,
    rank: usize,
    kind: WeightKind,
    reps: usize,
    rng: &mut RngHandle,
) -> Result<McEstimate> {
    check_rank(n, rank)?;
    if reps == 0 {
        return Err(Error::domain("Monte Carlo needs at least one replicate"));
    }
    let sampler = BetaSampler::new(rank as f64, (n + 1 - rank) as f64)?;
    let w = kind.weight(n, rank, None);
    let mut m = Moments::default();
    for _ in 0..reps {
        let beta = sampler.sample(rng);
        m.push((w + (-beta).ln_1p()).powi(2));
    }
    Ok(McEstimate {
        mean: m.mean,
        stderr: m.stderr(),
        reps,
    })
}

/// Simulated `E[−ln(1−β)]` for `β ~ Beta(r, n+1−r)`, drawn as the `r`-th of
/// `n` sorted uniforms. Its limit is `α̂_r = H_n − H_{n−r}`.
pub fn mc_order_statistic_weight<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    reps: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    check_rank(n, rank)?;
    let mut m = Moments::default();
    let mut buf = vec![0.0; n];
    for _ in 0..reps {
        for v in buf.iter_mut() {
            *v = rng.sample(rand_distr::Open01);
        }
        buf.select_nth_unstable_by(rank - 1, f64::total_cmp);
        m.push(-(-buf[rank - 1]).ln_1p());
    }
    Ok(McEstimate {
        mean: m.mean,
        stderr: m.stderr(),
        reps,
    })
}

/// What a [`BiasMseCurve`] tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    BiasAlphaHat,
    BiasAlphaPrime,
    BiasSele,
    MseAlphaHat,
    MseAlphaPrime,
    MseBound,
    AvgMse,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::BiasAlphaHat => "bias_alpha_hat",
            Quantity::BiasAlphaPrime => "bias_alpha_prime",
            Quantity::BiasSele => "bias_sele",
            Quantity::MseAlphaHat => "mse_alpha_hat",
            Quantity::MseAlphaPrime => "mse_alpha_prime",
            Quantity::MseBound => "mse_bound",
            Quantity::AvgMse => "avg_mse",
        }
    }

    pub fn bias_of(kind: WeightKind) -> Self {
        match kind {
            WeightKind::AlphaHat => Quantity::BiasAlphaHat,
            WeightKind::AlphaPrime => Quantity::BiasAlphaPrime,
            WeightKind::Sele => Quantity::BiasSele,
        }
    }

    fn id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Quantity::BiasAlphaHat,
            Quantity::BiasAlphaPrime,
            Quantity::BiasSele,
            Quantity::MseAlphaHat,
            Quantity::MseAlphaPrime,
            Quantity::MseBound,
            Quantity::AvgMse,
        ]
        .into_iter()
        .find(|q| q.name() == s)
        .ok_or_else(|| Error::Usage(format!("unknown quantity `{s}`")))
    }
}

/// One grid point. `x` is a percentile for bias/bound curves, a rank for
/// MSE curves and a batch size for the average-MSE curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub closed_form: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_reps: Option<usize>,
}

impl CurvePoint {
    fn exact(x: f64, closed_form: f64) -> Self {
        CurvePoint {
            x,
            closed_form,
            mc_estimate: None,
            mc_stderr: None,
            mc_reps: None,
        }
    }

    /// `|closed_form − mc| ≤ k·stderr`; `None` without Monte Carlo data.
    pub fn agrees_within(&self, k: f64) -> Option<bool> {
        let (m, s) = (self.mc_estimate?, self.mc_stderr?);
        Some((self.closed_form - m).abs() <= k * s)
    }
}

/// A tabulated bias or MSE curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasMseCurve {
    pub quantity: Quantity,
    /// Batch size; `None` for [`Quantity::AvgMse`], whose `x` is the batch size.
    pub n: Option<usize>,
    pub points: Vec<CurvePoint>,
}

impl BiasMseCurve {
    pub fn has_mc(&self) -> bool {
        self.points.iter().any(|p| p.mc_estimate.is_some())
    }

    /// Fraction of points whose Monte Carlo estimate lies within `k` standard errors.
    pub fn agreement_rate(&self, k: f64) -> Option<f64> {
        let checks: Vec<bool> = self.points.iter().filter_map(|p| p.agrees_within(k)).collect();
        if checks.is_empty() {
            return None;
        }
        Some(checks.iter().filter(|&&ok| ok).count() as f64 / checks.len() as f64)
    }
}

/// Monte Carlo settings for curve builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
}

/// Closed-form bias of `kind` over `betas`, optionally with a simulated
/// column. Each point draws from its own stream, so the curve is identical
/// for any thread count.
pub fn bias_curve(
    kind: WeightKind,
    n: usize,
    betas: &[f64],
    mc: Option<McConfig>,
) -> Result<BiasMseCurve> {
    let quantity = Quantity::bias_of(kind);
    let points = betas
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| {
            let closed = match kind {
                WeightKind::Sele => bias_sele(n, beta)?,
                _ => bias(kind, n, beta)?,
            };
            let mut p = CurvePoint::exact(beta, closed);
            if let Some(cfg) = mc {
                let mut rng = RngHandle::derive(cfg.seed, &[quantity.id(), n as u64, i as u64]);
                let s = mc_weight_stats(n, beta, kind, cfg.reps, &mut rng)?;
                p.mc_estimate = Some(s.bias_est);
                p.mc_stderr = Some(s.stderr_bias);
                p.mc_reps = Some(cfg.reps);
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BiasMseCurve {
        quantity,
        n: Some(n),
        points,
    })
}

/// Closed-form MSE at each rank (`AlphaHat` or `AlphaPrime`), optionally
/// with a Beta-sampling Monte Carlo column.
pub fn mse_curve(
    kind: WeightKind,
    n: usize,
    ranks: &[usize],
    mc: Option<McConfig>,
) -> Result<BiasMseCurve> {
    let quantity = match kind {
        WeightKind::AlphaHat => Quantity::MseAlphaHat,
        WeightKind::AlphaPrime => Quantity::MseAlphaPrime,
        WeightKind::Sele => {
            return Err(Error::Usage("MSE curves are defined for alpha and alpha-prime".into()))
        }
    };
    let points = ranks
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut p = CurvePoint::exact(r as f64, mse_at_rank(kind, n, r)?);
            if let Some(cfg) = mc {
                let mut rng = RngHandle::derive(cfg.seed, &[quantity.id(), n as u64, i as u64]);
                let e = mc_rank_mse(n, r, kind, cfg.reps, &mut rng)?;
                p.mc_estimate = Some(e.mean);
                p.mc_stderr = Some(e.stderr);
                p.mc_reps = Some(cfg.reps);
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BiasMseCurve {
        quantity,
        n: Some(n),
        points,
    })
}

/// `β / (n(1−β)+1)` over `betas`.
pub fn mse_bound_curve(n: usize, betas: &[f64]) -> Result<BiasMseCurve> {
    let points = betas
        .iter()
        .map(|&b| Ok(CurvePoint::exact(b, mse_bound(n, b)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BiasMseCurve {
        quantity: Quantity::MseBound,
        n: Some(n),
        points,
    })
}

/// `(n+1) ln(n+1)/n² − 1/n` over batch sizes; the `mc_estimate` column
/// carries the exact rank average `(1/n) Σ_r MSE(α̂_r)` with zero error.
pub fn avg_mse_curve(ns: &[usize]) -> Result<BiasMseCurve> {
    let points = ns
        .iter()
        .map(|&n| {
            let mut p = CurvePoint::exact(n as f64, avg_mse_closed_form(n)?);
            p.mc_estimate = Some(avg_mse_direct(n)?);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BiasMseCurve {
        quantity: Quantity::AvgMse,
        n: None,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::harmonic_prefix;

    // 40-digit reference values of the binomial sums.
    const FROZEN: [(usize, f64, f64, f64, f64); 6] = [
        (8, 0.05, 0.124_999_999_994_889_94, 0.114_342_435_554_283_59, 0.117_456_705_612_449_47),
        (8, 0.5, 0.124_114_724_201_959_45, 0.050_161_151_938_806_968, -0.130_647_180_559_945_31),
        (8, 0.95, -0.603_030_070_912_621_95, -1.026_724_255_020_908_2, -2.039_482_273_553_991),
        (32, 0.3, 0.031_25, 0.023_988_191_663_033_397, -0.034_799_943_938_732_379),
        (128, 0.9, 0.007_812_398_098_977_281_5, -0.027_919_981_845_266_851, -1.401_803_842_994_045_7),
        (1024, 0.5, 0.000_976_562_5, 0.000_487_565_993_236_536_22, -0.192_658_899_309_945_31),
    ];

    #[test]
    fn bias_against_frozen_references() {
        for (n, b, hat, prime, sele) in FROZEN {
            assert!((bias_alpha_hat(n, b).unwrap() - hat).abs() < 1e-12, "hat n={n} b={b}");
            assert!((bias_alpha_prime(n, b).unwrap() - prime).abs() < 1e-12, "prime n={n} b={b}");
            assert!((bias_sele(n, b).unwrap() - sele).abs() < 1e-12, "sele n={n} b={b}");
        }
    }

    #[test]
    fn bias_degenerate_limits() {
        assert!((bias_alpha_hat(8, 0.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((bias_alpha_prime(8, 0.0).unwrap() - (9.0f64 / 8.0).ln()).abs() < 1e-15);
        assert!((bias_sele(8, 0.0).unwrap() - 0.125).abs() < 1e-15);
        // approaching from above
        assert!((bias_alpha_hat(8, 1e-9).unwrap() - 0.125).abs() < 1e-7);
        assert!((bias_sele(8, 0.9).unwrap() + 1.390_085_092_994_045_7).abs() < 1e-12);
        for f in [bias_alpha_hat, bias_alpha_prime, bias_sele] {
            assert!(matches!(f(8, 1.0), Err(Error::Domain(_))));
            assert!(matches!(f(8, -0.1), Err(Error::Domain(_))));
            assert!(matches!(f(0, 0.5), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn sele_literal_sum_matches_simplification() {
        for n in [1, 2, 3, 8, 50, 333, 2000] {
            for b in beta_grid().into_iter().chain([0.0, 0.001, 0.999]) {
                let a = bias_sele(n, b).unwrap();
                let s = bias_sele_sum(n, b).unwrap();
                assert!((a - s).abs() < 1e-10, "n={n} b={b}");
            }
        }
    }

    #[test]
    fn large_n_truncated_sum() {
        // E[H_n − H_{n−r}] ≈ −ln(1−β) for large n; bias is small and positive at β = 0.5
        let b = bias_alpha_hat(100_000, 0.5).unwrap();
        assert!(b > 0.0 && b < 1e-4, "{b}");
        let s = bias_sele_sum(20_000, 0.3).unwrap();
        assert!((s - bias_sele(20_000, 0.3).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn mse_examples() {
        assert!((mse_alpha_hat(8, 4).unwrap() - 0.103_810_941_043_083_9).abs() < 1e-13);
        assert!((mse_alpha_hat(1, 1).unwrap() - 1.0).abs() < 1e-13);
        assert!((mse_alpha_prime(1, 1).unwrap() - 1.094_158_652_798_310_8).abs() < 1e-13);
        assert!(matches!(mse_alpha_hat(5, 6), Err(Error::Domain(_))));
        assert!(matches!(mse_alpha_prime(5, 0), Err(Error::Domain(_))));
        for n in 1..200 {
            for r in 1..=n {
                assert!(mse_alpha_prime(n, r).unwrap() >= mse_alpha_hat(n, r).unwrap());
            }
        }
    }

    #[test]
    fn bound_and_average() {
        assert_eq!(mse_bound(10, 0.0).unwrap(), 0.0);
        assert!((mse_bound(10, 0.5).unwrap() - 0.5 / 6.0).abs() < 1e-15);
        let r = mse_bound(2_000_000, 0.3).unwrap() / mse_bound(1_000_000, 0.3).unwrap();
        assert!((r - 0.5).abs() < 1e-6);
        assert!((avg_mse_closed_form(10).unwrap() - 0.163_768_480_007_820_76).abs() < 1e-14);
        assert!((avg_mse_closed_form(1).unwrap() - 0.386_294_361_119_890_6).abs() < 1e-15);
        assert!(avg_mse_closed_form(0).is_err());
    }

    #[test]
    fn average_mse_equals_harmonic_over_n() {
        // Σ_r [ψ′(n+1−r) − ψ′(n+1)] telescopes to H_n
        let t = harmonic_prefix(3000);
        for n in [1usize, 2, 10, 64, 500, 3000] {
            let d = avg_mse_direct(n).unwrap();
            assert!((d - t.get(n) / n as f64).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn rank_percentile_mapping() {
        assert_eq!(rank_for_percentile(8, 0.05), 1);
        assert_eq!(rank_for_percentile(8, 0.5), 5);
        assert_eq!(rank_for_percentile(8, 0.95), 8);
        assert_eq!(rank_for_percentile(128, 0.95), 123);
        assert_eq!(beta_grid().len(), 19);
    }

    #[test]
    fn mc_weight_stats_degenerate_and_agreement() {
        let mut rng = RngHandle::new(5);
        let s = mc_weight_stats(8, 0.0, WeightKind::AlphaHat, 100, &mut rng).unwrap();
        assert_eq!(s.bias_est, 0.125);
        assert_eq!(s.stderr_bias, 0.0);
        let s = mc_weight_stats(8, 0.5, WeightKind::AlphaHat, 200_000, &mut rng).unwrap();
        let exact = bias_alpha_hat(8, 0.5).unwrap();
        assert!((s.bias_est - exact).abs() < 4.0 * s.stderr_bias);
        let m = mse_at_percentile(WeightKind::AlphaHat, 8, 0.5).unwrap();
        assert!((s.mse_est - m).abs() < 4.0 * s.stderr_mse);
        assert!(mc_weight_stats(8, 0.5, WeightKind::Sele, 0, &mut rng).is_err());
    }

    #[test]
    fn rank_mse_oracle_agrees() {
        let mut rng = RngHandle::new(9);
        for kind in [WeightKind::AlphaHat, WeightKind::AlphaPrime, WeightKind::Sele] {
            for (n, r) in [(8, 1), (8, 4), (8, 8), (30, 17)] {
                let e = mc_rank_mse(n, r, kind, 100_000, &mut rng).unwrap();
                let exact = mse_at_rank(kind, n, r).unwrap();
                assert!((e.mean - exact).abs() < 4.0 * e.stderr, "{kind} n={n} r={r}");
            }
        }
    }

    #[test]
    fn order_statistic_average_recovers_alpha_hat() {
        let mut rng = RngHandle::new(21);
        for r in [1, 3, 5] {
            let e = mc_order_statistic_weight(5, r, 100_000, &mut rng).unwrap();
            let want = WeightKind::AlphaHat.weight(5, r, None);
            assert!((e.mean - want).abs() < 4.0 * e.stderr, "r={r}");
        }
    }

    #[test]
    fn curves_are_deterministic() {
        let cfg = Some(McConfig { reps: 2000, seed: 3 });
        let a = bias_curve(WeightKind::AlphaPrime, 16, &beta_grid(), cfg).unwrap();
        let b = bias_curve(WeightKind::AlphaPrime, 16, &beta_grid(), cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.has_mc());
        let plain = bias_curve(WeightKind::AlphaPrime, 16, &beta_grid(), None).unwrap();
        assert!(!plain.has_mc());
        assert!(plain.agreement_rate(4.0).is_none());
        assert!(mse_curve(WeightKind::Sele, 8, &[1], None).is_err());
    }
}
