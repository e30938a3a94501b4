//! Estimation of win probabilities from benchmark rankings.
//!
//! Given a table of how `m` algorithms ranked across `n` datasets, this
//! crate estimates the probability that each algorithm tops a future,
//! unseen dataset. The central estimator is a weighted combination of
//! rank counts, `p_hat = (1/n) sum_j w_j r^(j)`, generalizing plain win
//! counting (`w = (1, 0, ...)`). Weights come from either:
//!
//! - worst-case analysis ([`minimax`]): fixed weights minimizing an upper
//!   bound on the expected total-variation error, or
//! - leave-one-out selection ([`estimators`]): weights minimizing the
//!   average held-out KL or TV loss on the data at hand.
//!
//! Alongside sit the standard comparison methods ([`baselines`]), a seeded
//! synthetic experiment harness ([`synthetic`]), k-fold validation
//! ([`validation`]), and CSV ingestion ([`ingest`]).

pub mod baselines;
pub mod divergence;
mod error;
pub mod estimators;
pub mod ingest;
pub mod methods;
pub mod minimax;
pub mod ranking;
pub mod synthetic;
pub mod validation;

pub use divergence::Divergence;
pub use error::{Error, ParseError, Result};
pub use estimators::PROB_FLOOR;
pub use methods::Method;
pub use ranking::{BenchmarkSample, ProbVector, RankCountMatrix, RankingObservation, WeightVector};
