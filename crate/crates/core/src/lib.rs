//! Finite-sample estimation of the area under the risk-coverage curve (AURC).
//!
//! The population AURC of a selective classifier can be written as a
//! reweighted risk `E[α(x) ℓ(f(x), y)]` with `α(x) = −ln(1 − G(x))`, where
//! `G` is the CDF of the confidence score. On a finite batch the weight is
//! estimated from the sample rank `r` of each observation:
//!
//! | weight | formula | module |
//! |--------|---------|--------|
//! | `α̂`  | `H_n − H_{n−r}` | [`ranking`] |
//! | `α̂′` | `−ln(1 − r/(n+1))` | [`ranking`] |
//! | SELE  | `r / n` | [`ranking`] |
//!
//! The plug-in estimator `(1/n) Σ ŵ_i ℓ_i` with `α̂` weights equals the
//! classical empirical AURC exactly and costs `O(n ln n)`.
//!
//! Modules:
//!
//! - [`special`]: harmonic numbers, digamma, trigamma, log binomial pmf.
//! - [`sampling`]: seeded RNG streams, Beta and uniform order-statistic samplers.
//! - [`ranking`]: ascending ranks with tie policies, the three weight vectors.
//! - [`scoring`]: softmax, 0/1 and cross-entropy losses, confidence score functions.
//! - [`estimators`]: naive and plug-in AURC, SELE, population AURC, risk-coverage curve.
//! - [`theory`]: closed-form bias/MSE of the weight estimators and their Monte Carlo oracles.
//! - [`harness`]: synthetic populations, batch splitting, convergence studies.
//! - [`io`]: logits+labels datasets (JSONL/CSV) and report writers.
//! - [`cli`]: the `aurc` command-line front end.
//!
//! Runnable walkthroughs live in `examples/`; see the README for the list.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod ranking;
pub mod sampling;
pub mod scoring;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{EstimatorKind, EstimatorReport};
pub use ranking::{TiePolicy, WeightKind, WeightVector};
pub use sampling::RngHandle;
pub use scoring::{CsfKind, LogitsRecord, LossKind};
pub use special::HarmonicTable;
