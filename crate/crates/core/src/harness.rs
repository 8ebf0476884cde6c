//! Synthetic populations with known percentiles, random batch splits and
//! convergence studies of the batch estimators against a population value.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    evaluate, evaluate_ranked, population_aurc, EstimatorKind, PopulationSpec, NAIVE_MAX_N,
};
use crate::ranking::{rank_ascending, TiePolicy, WeightKind};
use crate::sampling::RngHandle;
use crate::scoring::{scores_and_losses, Csf, LogitsRecord, LossKind};
use crate::special::HarmonicTable;

/// How losses are assigned to population percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LossModel {
    /// 0/1 loss with `P(error | β) = 1 − β^γ`.
    BernoulliDecreasing { gamma: f64 },
    /// Loss 1 below percentile `threshold`, 0 at or above it.
    DeterministicThreshold { threshold: f64 },
    /// Losses given in ascending percentile order, one per sample.
    UserTable { losses: Vec<f64> },
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel::BernoulliDecreasing { gamma: 1.0 }
    }
}

impl LossModel {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            LossModel::BernoulliDecreasing { gamma } if !(gamma.is_finite() && *gamma > 0.0) => {
                Err(Error::Usage(format!("bernoulli gamma must be positive, got {gamma}")))
            }
            LossModel::DeterministicThreshold { threshold } if !(0.0..=1.0).contains(threshold) => {
                Err(Error::Usage(format!("threshold must lie in [0, 1], got {threshold}")))
            }
            LossModel::UserTable { losses } => {
                if losses.len() != n {
                    return Err(Error::Usage(format!(
                        "loss table has {} entries for a population of {n}",
                        losses.len()
                    )));
                }
                if let Some(i) = losses.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
                    return Err(Error::Usage(format!("loss table entry {i} is not a finite non-negative number")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Samples with known percentiles. Scores equal the percentiles, so score
/// order and percentile order coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPopulation {
    model: LossModel,
    percentiles: Vec<f64>,
    losses: Vec<f64>,
}

impl SyntheticPopulation {
    pub fn model(&self) -> &LossModel {
        &self.model
    }

    /// Ascending, distinct, inside (0, 1).
    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }

    pub fn scores(&self) -> &[f64] {
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

    pub fn spec(&self) -> PopulationSpec {
        PopulationSpec::new(self.percentiles.clone(), self.losses.clone())
            .expect("generated percentiles are distinct and inside (0, 1)")
    }

    /// `mean −ln(1−β_i) ℓ_i` with the true percentiles.
    pub fn population_aurc(&self) -> f64 {
        population_aurc(&self.spec())
    }
}

/// `N` samples on a stratified jittered grid `β_i = (i + u_i)/N`, losses
/// drawn from `model`.
pub fn generate_population(
    model: &LossModel,
    size: usize,
    rng: &mut RngHandle,
) -> Result<SyntheticPopulation> {
    if size < 2 {
        return Err(Error::Usage(format!("population size must be at least 2, got {size}")));
    }
    model.validate(size)?;
    let nf = size as f64;
    let percentiles: Vec<f64> = (0..size)
        .map(|i| {
            let u: f64 = rng.sample(Open01);
            ((i as f64 + u) / nf).min(1.0 - f64::EPSILON / 2.0)
        })
        .collect();
    let losses = match model {
        LossModel::BernoulliDecreasing { gamma } => percentiles
            .iter()
            .map(|&b| {
                let u: f64 = rng.random();
                if u < 1.0 - b.powf(*gamma) { 1.0 } else { 0.0 }
            })
            .collect(),
        LossModel::DeterministicThreshold { threshold } => percentiles
            .iter()
            .map(|&b| if b < *threshold { 1.0 } else { 0.0 })
            .collect(),
        LossModel::UserTable { losses } => losses.clone(),
    };
    Ok(SyntheticPopulation {
        model: model.clone(),
        percentiles,
        losses,
    })
}

/// Shuffle `0..len` and cut it into `len / batch_size` disjoint batches of
/// indices; the remainder is dropped.
pub fn batch_split(len: usize, batch_size: usize, rng: &mut RngHandle) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Usage("batch size must be positive".into()));
    }
    if batch_size > len {
        return Err(Error::Usage(format!(
            "batch size {batch_size} exceeds the {len} available samples"
        )));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(rng);
    Ok(idx.chunks_exact(batch_size).map(<[usize]>::to_vec).collect())
}

/// Where a study's reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `mean −ln(1−β) ℓ` over a synthetic population with true percentiles.
    TruePercentiles,
    /// Plug-in `α̂` over every sample of a data file.
    EmpiricalRanks,
}

/// Scores, losses and the reference value batch estimates are compared with.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyData {
    pub scores: Vec<f64>,
    pub losses: Vec<f64>,
    pub reference: f64,
    pub reference_kind: ReferenceKind,
}

impl StudyData {
    pub fn from_population(pop: &SyntheticPopulation) -> Self {
        StudyData {
            scores: pop.scores().to_vec(),
            losses: pop.losses().to_vec(),
            reference: pop.population_aurc(),
            reference_kind: ReferenceKind::TruePercentiles,
        }
    }

    pub fn from_records(
        records: &[LogitsRecord],
        csf: Csf,
        loss: LossKind,
        tie_policy: TiePolicy,
    ) -> Result<Self> {
        let (scores, losses) = scores_and_losses(records, csf, loss);
        let reference = evaluate(&losses, &scores, &[EstimatorKind::PluginAlphaHat], tie_policy)?[0].value;
        Ok(StudyData {
            scores,
            losses,
            reference,
            reference_kind: ReferenceKind::EmpiricalRanks,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Batch sizes `8, 16, ..., 1024`.
pub fn default_sizes() -> Vec<usize> {
    (3..=10).map(|k| 1usize << k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub sizes: Vec<usize>,
    pub estimators: Vec<EstimatorKind>,
    /// Independent random splits per batch size.
    pub reps: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            sizes: default_sizes(),
            estimators: vec![
                EstimatorKind::PluginAlphaHat,
                EstimatorKind::PluginAlphaPrime,
                EstimatorKind::Sele,
                EstimatorKind::SeleTimesTwo,
            ],
            reps: 5,
            seed: 42,
            tie_policy: TiePolicy::Stable,
        }
    }
}

/// Summary over every batch of every replicate at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub size: usize,
    pub estimator: EstimatorKind,
    pub mean: f64,
    /// Standard deviation of the batch estimates.
    pub std: f64,
    /// `mean − reference`.
    pub gap: f64,
    pub mae: f64,
    pub mse: f64,
    pub batches: usize,
}

impl ConvergenceRow {
    /// Standard error of `mean`.
    pub fn stderr(&self) -> f64 {
        self.std / (self.batches as f64).sqrt()
    }
}

/// Summary of a single replicate (one random split) at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub size: usize,
    pub replicate: usize,
    pub estimator: EstimatorKind,
    pub mean: f64,
    pub mae: f64,
    pub batches: usize,
}

/// Least-squares fit of `ln MAE` on `ln √(ln n / n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub estimator: EstimatorKind,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Minimum number of batch sizes for a rate fit.
pub const MIN_RATE_FIT_SIZES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub reference: f64,
    pub reference_kind: ReferenceKind,
    pub population_size: usize,
    pub config: ConvergenceConfig,
    pub rows: Vec<ConvergenceRow>,
    pub replicates: Vec<ReplicateRow>,
    pub rate_fits: Vec<RateFit>,
}

impl ConvergenceTable {
    pub fn row(&self, size: usize, estimator: EstimatorKind) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.size == size && r.estimator == estimator)
    }

    /// Rows of one estimator in ascending size order.
    pub fn column(&self, estimator: EstimatorKind) -> Vec<&ConvergenceRow> {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| r.estimator == estimator).collect();
        rows.sort_by_key(|r| r.size);
        rows
    }

    /// Number of consecutive sizes at which the MAE goes up.
    pub fn mae_inversions(&self, estimator: EstimatorKind) -> usize {
        self.column(estimator)
            .windows(2)
            .filter(|w| w[1].mae > w[0].mae)
            .count()
    }

    pub fn rate_fit(&self, estimator: EstimatorKind) -> Option<&RateFit> {
        self.rate_fits.iter().find(|f| f.estimator == estimator)
    }
}

struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn new() -> Self {
        Neumaier { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.c
    }
}

fn compensated_mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut acc = Neumaier::new();
    let mut n = 0;
    for x in xs {
        acc.add(x);
        n += 1;
    }
    (acc.total() / n.max(1) as f64, n)
}

fn fit_rate(estimator: EstimatorKind, rows: &[&ConvergenceRow]) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.size >= 2 && r.mae > 0.0)
        .map(|r| {
            let n = r.size as f64;
            ((n.ln() / n).sqrt().ln(), r.mae.ln())
        })
        .collect();
    if pts.len() < MIN_RATE_FIT_SIZES {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(RateFit {
        estimator,
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: pts.len(),
    })
}

/// Estimates of every configured estimator on every batch of one split, in
/// batch order.
fn split_estimates(
    data: &StudyData,
    batches: &[Vec<usize>],
    config: &ConvergenceConfig,
    table: &HarmonicTable,
) -> Result<Vec<Vec<f64>>> {
    batches
        .par_iter()
        .map(|idx| {
            let scores: Vec<f64> = idx.iter().map(|&i| data.scores[i]).collect();
            let losses: Vec<f64> = idx.iter().map(|&i| data.losses[i]).collect();
            let ranking = rank_ascending(&scores, config.tie_policy)?;
            config
                .estimators
                .iter()
                .map(|&k| evaluate_ranked(k, &ranking, &losses, &scores, table))
                .collect()
        })
        .collect()
}

/// Split the data at every configured size `reps` times and summarize each
/// estimator against `data.reference`.
///
/// Split `(size, rep)` draws from its own stream, so a run with fewer reps
/// reproduces the leading replicates of a longer run, and results do not
/// depend on the thread count.
pub fn convergence_study(data: &StudyData, config: &ConvergenceConfig) -> Result<ConvergenceTable> {
    if config.reps == 0 {
        return Err(Error::Usage("reps must be at least 1".into()));
    }
    if config.estimators.is_empty() || config.sizes.is_empty() {
        return Err(Error::Usage("need at least one estimator and one batch size".into()));
    }
    if config.estimators.contains(&EstimatorKind::NaiveEmpirical) {
        if let Some(&s) = config.sizes.iter().find(|&&s| s > NAIVE_MAX_N) {
            return Err(Error::Usage(format!("naive estimator is capped at n ≤ {NAIVE_MAX_N}, got size {s}")));
        }
    }
    crate::ranking::validate_losses(&data.losses, data.scores.len())?;
    let max_size = config.sizes.iter().copied().max().unwrap_or(0);
    let table = HarmonicTable::new(max_size);
    let reference = data.reference;

    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for &size in &config.sizes {
        let mut per_rep: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.reps);
        for rep in 0..config.reps {
            let mut rng = RngHandle::derive(config.seed, &[size as u64, rep as u64]);
            let batches = batch_split(data.len(), size, &mut rng)?;
            per_rep.push(split_estimates(data, &batches, config, &table)?);
        }
        for (e, &estimator) in config.estimators.iter().enumerate() {
            for (rep, est) in per_rep.iter().enumerate() {
                let (mean, batches) = compensated_mean(est.iter().map(|b| b[e]));
                let (mae, _) = compensated_mean(est.iter().map(|b| (b[e] - reference).abs()));
                replicates.push(ReplicateRow {
                    size,
                    replicate: rep,
                    estimator,
                    mean,
                    mae,
                    batches,
                });
            }
            let all = || per_rep.iter().flatten().map(|b| b[e]);
            let (mean, batches) = compensated_mean(all());
            let (mae, _) = compensated_mean(all().map(|v| (v - reference).abs()));
            let (mse, _) = compensated_mean(all().map(|v| (v - reference).powi(2)));
            let ss = {
                let mut acc = Neumaier::new();
                all().for_each(|v| acc.add((v - mean).powi(2)));
                acc.total()
            };
            let std = if batches > 1 { (ss / (batches - 1) as f64).sqrt() } else { 0.0 };
            rows.push(ConvergenceRow {
                size,
                estimator,
                mean,
                std,
                gap: mean - reference,
                mae,
                mse,
                batches,
            });
        }
    }

    let mut table = ConvergenceTable {
        reference,
        reference_kind: data.reference_kind,
        population_size: data.len(),
        config: config.clone(),
        rows,
        replicates,
        rate_fits: Vec::new(),
    };
    table.rate_fits = config
        .estimators
        .iter()
        .filter_map(|&e| fit_rate(e, &table.column(e)))
        .collect();
    Ok(table)
}

/// The five-point batch on which the plug-in estimate exceeds twice the SELE score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub losses: Vec<f64>,
    pub scores: Vec<f64>,
    /// `α̂` at the top rank, `H_5 − H_0`.
    pub top_weight: f64,
    pub plugin_alpha_hat: f64,
    pub sele: f64,
    pub sele_times_two: f64,
    /// `plugin_alpha_hat > sele_times_two`.
    pub holds: bool,
    /// `plugin_alpha_hat / sele_times_two`; `None` when both are zero.
    pub ratio: Option<f64>,
}

/// Losses `0, 0, 0, 0, L` with `L` on the most confident sample.
pub fn counterexample_demo(top_loss: f64) -> Result<CounterexampleReport> {
    if !(top_loss.is_finite() && top_loss >= 0.0) {
        return Err(Error::domain(format!("loss must be finite and non-negative, got {top_loss}")));
    }
    let losses = vec![0.0, 0.0, 0.0, 0.0, top_loss];
    let scores = vec![0.1, 0.2, 0.3, 0.4, 0.5];
    let reports = evaluate(
        &losses,
        &scores,
        &[
            EstimatorKind::PluginAlphaHat,
            EstimatorKind::Sele,
            EstimatorKind::SeleTimesTwo,
        ],
        TiePolicy::Stable,
    )?;
    let (hat, sele, sele2) = (reports[0].value, reports[1].value, reports[2].value);
    Ok(CounterexampleReport {
        losses,
        scores,
        top_weight: WeightKind::AlphaHat.weight(5, 5, None),
        plugin_alpha_hat: hat,
        sele,
        sele_times_two: sele2,
        holds: hat > sele2,
        ratio: (sele2 > 0.0).then(|| hat / sele2),
    })
}

/// The rank-based plug-in estimate and the true-percentile value on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    /// Plug-in `α̂` using empirical ranks.
    pub empirical: f64,
    /// `mean −ln(1−β) ℓ` using the true percentiles.
    pub population: f64,
    pub abs_gap: f64,
    /// `abs_gap / |population|`; 0 when both values are 0.
    pub rel_gap: f64,
}

pub fn equivalence_check(pop: &SyntheticPopulation) -> Result<EquivalenceReport> {
    let empirical = evaluate(
        pop.losses(),
        pop.scores(),
        &[EstimatorKind::PluginAlphaHat],
        TiePolicy::Stable,
    )?[0]
        .value;
    let population = pop.population_aurc();
    let abs_gap = (empirical - population).abs();
    let rel_gap = if abs_gap == 0.0 { 0.0 } else { abs_gap / population.abs() };
    Ok(EquivalenceReport {
        n: pop.len(),
        empirical,
        population,
        abs_gap,
        rel_gap,
    })
}

/// Random logits: standard normal noise plus `signal` on the true class.
pub fn synthetic_logits(n: usize, k: usize, signal: f64, rng: &mut RngHandle) -> Result<Vec<LogitsRecord>> {
    if k < 2 {
        return Err(Error::Usage(format!("need at least 2 classes, got {k}")));
    }
    if !signal.is_finite() {
        return Err(Error::Usage("signal must be finite".into()));
    }
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((0..n)
        .map(|_| {
            let label = rng.random_range(0..k);
            let mut logits: Vec<f64> = (0..k).map(|_| noise.sample(rng)).collect();
            logits[label] += signal;
            LogitsRecord { logits, label }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli(n: usize, seed: u64) -> SyntheticPopulation {
        generate_population(&LossModel::default(), n, &mut RngHandle::new(seed)).unwrap()
    }

    #[test]
    fn population_invariants() {
        let p = bernoulli(10_000, 1);
        assert!(p.percentiles().windows(2).all(|w| w[0] < w[1]));
        assert!(p.percentiles().iter().all(|&b| b > 0.0 && b < 1.0));
        assert!(p.population_aurc().is_finite());
        assert!(generate_population(&LossModel::default(), 1, &mut RngHandle::new(0)).is_err());
        let bad = LossModel::BernoulliDecreasing { gamma: -1.0 };
        assert!(matches!(generate_population(&bad, 10, &mut RngHandle::new(0)), Err(Error::Usage(_))));
    }

    #[test]
    fn population_value_is_seed_stable() {
        // exact value for γ = 1 is ∫ −ln(1−β)(1−β) dβ = 1/4
        let a = bernoulli(100_000, 1).population_aurc();
        let b = bernoulli(100_000, 2).population_aurc();
        assert!((a - b).abs() / a < 0.01);
        assert!((a - 0.25).abs() < 0.01);
    }

    #[test]
    fn constant_loss_populations() {
        let n = 50_000;
        let zero = LossModel::UserTable { losses: vec![0.0; n] };
        let p = generate_population(&zero, n, &mut RngHandle::new(4)).unwrap();
        assert_eq!(p.population_aurc(), 0.0);
        let mut prev = f64::INFINITY;
        for n in [10, 1000, 100_000] {
            let one = LossModel::UserTable { losses: vec![1.0; n] };
            let p = generate_population(&one, n, &mut RngHandle::new(4)).unwrap();
            let gap = (p.population_aurc() - 1.0).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn threshold_model() {
        let m = LossModel::DeterministicThreshold { threshold: 0.5 };
        let p = generate_population(&m, 1000, &mut RngHandle::new(2)).unwrap();
        for (&b, &l) in p.percentiles().iter().zip(p.losses()) {
            assert_eq!(l, if b < 0.5 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn splits() {
        let mut rng = RngHandle::new(8);
        let b = batch_split(100, 32, &mut rng).unwrap();
        assert_eq!(b.len(), 3);
        let mut seen: Vec<usize> = b.concat();
        assert_eq!(seen.len(), 96);
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 96);
        assert_eq!(batch_split(10, 10, &mut rng).unwrap().len(), 1);
        assert!(matches!(batch_split(10, 0, &mut rng), Err(Error::Usage(_))));
        assert!(batch_split(10, 11, &mut rng).is_err());
    }

    #[test]
    fn counterexample() {
        let r = counterexample_demo(1.0).unwrap();
        assert!((r.top_weight - 2.283_333_333_333_333).abs() < 1e-12);
        assert!((r.plugin_alpha_hat - 0.456_666_666_666_666_7).abs() < 1e-12);
        assert!((r.sele_times_two - 0.4).abs() < 1e-15);
        assert!(r.holds);
        let z = counterexample_demo(0.0).unwrap();
        assert_eq!((z.plugin_alpha_hat, z.sele_times_two, z.holds, z.ratio), (0.0, 0.0, false, None));
        for l in [0.01, 3.0, 250.0] {
            let r = counterexample_demo(l).unwrap();
            assert!((r.ratio.unwrap() - 2.283_333_333_333_333 / 2.0).abs() < 1e-12);
        }
        assert!(counterexample_demo(-1.0).is_err());
    }

    #[test]
    fn equivalence_gap_shrinks() {
        let median_gap = |n: usize| {
            let mut g: Vec<f64> = (0..5)
                .map(|s| equivalence_check(&bernoulli(n, 100 + s)).unwrap().abs_gap)
                .collect();
            g.sort_by(f64::total_cmp);
            g[2]
        };
        let (a, b, c) = (median_gap(10), median_gap(1000), median_gap(100_000));
        assert!(a > b && b > c, "{a} {b} {c}");
        let ones = generate_population(
            &LossModel::UserTable { losses: vec![1.0; 10_000] },
            10_000,
            &mut RngHandle::new(1),
        )
        .unwrap();
        let r = equivalence_check(&ones).unwrap();
        assert!((r.empirical - 1.0).abs() < 1e-12);
        assert!((r.population - 1.0).abs() < 1e-3);
    }

    #[test]
    fn study_is_deterministic_and_ordered() {
        let data = StudyData::from_population(&bernoulli(4096, 3));
        let config = ConvergenceConfig {
            sizes: vec![8, 16, 32, 64, 128, 256],
            reps: 3,
            ..ConvergenceConfig::default()
        };
        let a = convergence_study(&data, &config).unwrap();
        let b = convergence_study(&data, &config).unwrap();
        assert_eq!(a, b);
        for &s in &config.sizes {
            let hat = a.row(s, EstimatorKind::PluginAlphaHat).unwrap();
            let prime = a.row(s, EstimatorKind::PluginAlphaPrime).unwrap();
            assert!(prime.mean <= hat.mean);
            assert_eq!(hat.batches, 3 * (4096 / s));
        }
        assert!(a.rate_fit(EstimatorKind::PluginAlphaHat).is_some());

        let one = ConvergenceConfig { reps: 1, ..config.clone() };
        let t1 = convergence_study(&data, &one).unwrap();
        for r in &t1.replicates {
            let full = a
                .replicates
                .iter()
                .find(|q| q.size == r.size && q.estimator == r.estimator && q.replicate == 0)
                .unwrap();
            assert_eq!(r, full);
        }
    }

    #[test]
    fn study_input_errors() {
        let data = StudyData::from_population(&bernoulli(100, 3));
        let mut config = ConvergenceConfig { sizes: vec![8, 200], ..ConvergenceConfig::default() };
        assert!(convergence_study(&data, &config).is_err());
        config.sizes = vec![8];
        config.reps = 0;
        assert!(convergence_study(&data, &config).is_err());
    }

    #[test]
    fn logits_generator() {
        let recs = synthetic_logits(500, 4, 2.0, &mut RngHandle::new(1)).unwrap();
        assert_eq!(recs.len(), 500);
        assert!(recs.iter().all(|r| r.validate().is_ok() && r.logits.len() == 4));
        assert!(synthetic_logits(5, 1, 0.0, &mut RngHandle::new(1)).is_err());
    }
}
