//! The `aurc` command line.
//!
//! Exit codes: 0 success, 1 internal failure (or, for `counterexample`, the
//! inequality not holding), 2 bad usage or invalid input.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{evaluate, EstimatorKind, EstimatorReport};
use crate::harness::{
    convergence_study, counterexample_demo, default_sizes, generate_population, ConvergenceConfig, LossModel,
    StudyData,
};
use crate::io::{load_dataset, render_report, DataFormat, DatasetReader, Provenance, Report, ReportFormat};
use crate::ranking::{TiePolicy, WeightKind};
use crate::sampling::RngHandle;
use crate::scoring::{Csf, CsfKind, LossKind};
use crate::theory::{
    avg_mse_curve, beta_grid, bias_curve, mse_bound_curve, mse_curve, rank_for_percentile, BiasMseCurve, McConfig,
};

fn parse<T: FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "aurc", version, about = "Finite-sample AURC estimators and their bias/MSE theory")]
pub struct Cli {
    /// Worker threads (0 = all available cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Report format: csv or json (default: from the output extension, else csv).
    #[arg(long, global = true, value_parser = parse::<ReportFormat>)]
    pub out_format: Option<ReportFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate estimators on a logits+labels file.
    Evaluate(EvaluateArgs),
    /// Bias of the weight estimators as a function of the percentile.
    Bias(BiasArgs),
    /// MSE of the weight estimators, its envelope and its average.
    Mse(MseArgs),
    /// Batch-size sweep of estimator error against a reference value.
    Converge(ConvergeArgs),
    /// The five-point batch where the plug-in estimate exceeds twice SELE.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoringArgs {
    /// Loss: zero_one (01) or cross_entropy (ce).
    #[arg(long, default_value = "zero_one", value_parser = parse::<LossKind>)]
    pub loss: LossKind,

    /// Confidence score: msp, max-logit, softmax-margin, neg-entropy, max-logit-pnorm, neg-gini.
    #[arg(long, default_value = "msp", value_parser = parse::<CsfKind>)]
    pub csf: CsfKind,

    /// Norm order for max-logit-pnorm.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,

    /// Tie policy for equal scores: stable or average.
    #[arg(long, default_value = "stable", value_parser = parse::<TiePolicy>)]
    pub tie: TiePolicy,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    /// Dataset file (.jsonl or .csv).
    #[arg(long, short)]
    pub input: PathBuf,

    /// Dataset format, overriding the extension.
    #[arg(long, value_parser = parse::<DataFormat>)]
    pub format: Option<DataFormat>,

    #[command(flatten)]
    pub scoring: ScoringArgs,

    /// Estimators: naive, alpha, alpha-prime, sele, sele2.
    #[arg(long, alias = "estimators", value_delimiter = ',', default_value = "alpha,alpha-prime,sele,sele2", value_parser = parse::<EstimatorKind>)]
    pub weights: Vec<EstimatorKind>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BiasArgs {
    /// Batch sizes.
    #[arg(long, short, value_delimiter = ',', default_values_t = default_sizes())]
    pub n: Vec<usize>,

    /// Percentiles in [0, 1) (default 0.05, 0.10, ..., 0.95).
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,

    /// Weight kinds: alpha, alpha-prime, sele.
    #[arg(long, value_delimiter = ',', default_value = "alpha,alpha-prime,sele", value_parser = parse::<WeightKind>)]
    pub weights: Vec<WeightKind>,

    /// Monte Carlo replicates per grid point (0 = closed form only).
    #[arg(long, default_value_t = 0)]
    pub mc: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MseArgs {
    /// Batch sizes.
    #[arg(long, short, value_delimiter = ',', default_values_t = default_sizes())]
    pub n: Vec<usize>,

    /// Percentiles for the envelope; MSE ranks default to the nearest `r/(n+1)`.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,

    /// Explicit ranks for the MSE curves.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Vec<usize>,

    /// Monte Carlo replicates per grid point (0 = closed form only).
    #[arg(long, default_value_t = 0)]
    pub mc: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    /// Dataset file; without it a synthetic population is generated.
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    #[arg(long, value_parser = parse::<DataFormat>)]
    pub format: Option<DataFormat>,

    #[command(flatten)]
    pub scoring: ScoringArgs,

    /// Synthetic population size.
    #[arg(long, default_value_t = 1 << 17)]
    pub population: usize,

    /// Synthetic error probability `1 − β^γ`.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Use deterministic losses (1 below this percentile) instead.
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Batch sizes.
    #[arg(long, value_delimiter = ',', default_values_t = default_sizes())]
    pub sizes: Vec<usize>,

    /// Estimators: naive, alpha, alpha-prime, sele, sele2.
    #[arg(long, alias = "weights", value_delimiter = ',', default_value = "alpha,alpha-prime,sele,sele2", value_parser = parse::<EstimatorKind>)]
    pub estimators: Vec<EstimatorKind>,

    /// Random splits per batch size.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    /// Loss of the most confident sample.
    #[arg(long, default_value_t = 1.0)]
    pub top_loss: f64,
}

enum Failure {
    Input(Error),
    Internal(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = std::result::Result<i32, Failure>;

struct Sink {
    output: Option<PathBuf>,
    format: ReportFormat,
}

impl Sink {
    fn emit<R: Report + ?Sized>(&self, report: &R, provenance: &Provenance) -> CmdResult {
        let text = render_report(report, self.format, provenance).map_err(Failure::Internal)?;
        match &self.output {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Internal(Error::io(p, e)))?,
            None => print!("{text}"),
        }
        Ok(0)
    }
}

fn dataset_format(path: &Path, given: Option<DataFormat>) -> Result<DataFormat> {
    given.map_or_else(|| DataFormat::from_path(path), Ok)
}

fn cmd_evaluate(args: &EvaluateArgs, sink: &Sink) -> CmdResult {
    let s = &args.scoring;
    let csf = Csf::new(s.csf, s.p)?;
    let format = dataset_format(&args.input, args.format)?;
    let mut scores = Vec::new();
    let mut losses = Vec::new();
    for rec in DatasetReader::open(&args.input, format)? {
        let rec = rec?;
        scores.push(csf.score(&rec));
        losses.push(s.loss.loss(&rec));
    }
    if scores.is_empty() {
        return Err(Error::invalid(format!("{}: no records", args.input.display())).into());
    }
    let reports: Vec<EstimatorReport> = evaluate(&losses, &scores, &args.weights, s.tie)?
        .into_iter()
        .map(|r| r.with_loss(s.loss).with_csf(s.csf))
        .collect();
    sink.emit(&reports, &Provenance::new(None, args)?)
}

fn betas_or_default(betas: &[f64]) -> Vec<f64> {
    if betas.is_empty() {
        beta_grid()
    } else {
        betas.to_vec()
    }
}

fn cmd_bias(args: &BiasArgs, sink: &Sink) -> CmdResult {
    let betas = betas_or_default(&args.beta);
    let mc = (args.mc > 0).then_some(McConfig {
        reps: args.mc,
        seed: args.seed,
    });
    let mut curves: Vec<BiasMseCurve> = Vec::new();
    for &n in &args.n {
        for &kind in &args.weights {
            curves.push(bias_curve(kind, n, &betas, mc)?);
        }
    }
    sink.emit(&curves, &Provenance::new(Some(args.seed), args)?)
}

fn cmd_mse(args: &MseArgs, sink: &Sink) -> CmdResult {
    let betas = betas_or_default(&args.beta);
    let mc = (args.mc > 0).then_some(McConfig {
        reps: args.mc,
        seed: args.seed,
    });
    let mut curves: Vec<BiasMseCurve> = Vec::new();
    for &n in &args.n {
        let ranks = if args.ranks.is_empty() {
            let mut r: Vec<usize> = betas.iter().map(|&b| rank_for_percentile(n, b)).collect();
            r.dedup();
            r
        } else {
            args.ranks.clone()
        };
        curves.push(mse_curve(WeightKind::AlphaHat, n, &ranks, mc)?);
        curves.push(mse_curve(WeightKind::AlphaPrime, n, &ranks, mc)?);
        curves.push(mse_bound_curve(n, &betas)?);
    }
    curves.push(avg_mse_curve(&args.n)?);
    sink.emit(&curves, &Provenance::new(Some(args.seed), args)?)
}

fn cmd_converge(args: &ConvergeArgs, sink: &Sink) -> CmdResult {
    let s = &args.scoring;
    let data = match &args.input {
        Some(path) => {
            let format = dataset_format(path, args.format)?;
            let file = load_dataset(path, format)?;
            StudyData::from_records(&file.records, Csf::new(s.csf, s.p)?, s.loss, s.tie)?
        }
        None => {
            let model = match args.threshold {
                Some(threshold) => LossModel::DeterministicThreshold { threshold },
                None => LossModel::BernoulliDecreasing { gamma: args.gamma },
            };
            let pop = generate_population(&model, args.population, &mut RngHandle::new(args.seed))?;
            StudyData::from_population(&pop)
        }
    };
    let config = ConvergenceConfig {
        sizes: args.sizes.clone(),
        estimators: args.estimators.clone(),
        reps: args.reps,
        seed: args.seed,
        tie_policy: s.tie,
    };
    let table = convergence_study(&data, &config)?;
    for fit in &table.rate_fits {
        eprintln!(
            "rate fit {}: slope {:.4} (R² {:.3}, {} sizes)",
            fit.estimator, fit.slope, fit.r_squared, fit.points
        );
    }
    sink.emit(&table, &Provenance::new(Some(args.seed), args)?)
}

fn cmd_counterexample(args: &CounterexampleArgs, sink: &Sink) -> CmdResult {
    let r = counterexample_demo(args.top_loss)?;
    let verdict = if r.holds { "holds" } else { "does not hold" };
    eprintln!(
        "plugin_alpha_hat = {:.6}, 2 x SELE = {:.6}: plugin > 2 x SELE {verdict}",
        r.plugin_alpha_hat, r.sele_times_two
    );
    sink.emit(&r, &Provenance::new(None, args)?)?;
    Ok(if r.holds { 0 } else { 1 })
}

fn dispatch(cli: &Cli) -> CmdResult {
    let format = cli.out_format.unwrap_or_else(|| match &cli.output {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => ReportFormat::Json,
        _ => ReportFormat::Csv,
    });
    let sink = Sink {
        output: cli.output.clone(),
        format,
    };
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, &sink),
        Command::Bias(a) => cmd_bias(a, &sink),
        Command::Mse(a) => cmd_mse(a, &sink),
        Command::Converge(a) => cmd_converge(a, &sink),
        Command::Counterexample(a) => cmd_counterexample(a, &sink),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
