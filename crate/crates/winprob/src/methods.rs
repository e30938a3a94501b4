//! A uniform interface over every win-probability method, used by the
//! cross-validation protocol and the CLI report pipeline.

use serde::Serialize;

use crate::baselines::{
    average_rank, borda, good_turing_win_prob, plackett_luce_fit, plackett_luce_fit_regularized,
};
use crate::error::{Error, Result};
use crate::estimators::{fit_loo_weights, mle_win_prob, weighted_estimate};
use crate::divergence::Divergence;
use crate::ranking::{BenchmarkSample, ProbVector};

const PL_MAX_ITER: usize = 2000;
const PL_TOL: f64 = 1e-10;

/// The estimation methods a report or cross-validation run can compare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    /// Constant uniform prediction; a calibration reference.
    Uniform,
    /// Win counting.
    Mle,
    /// Rank-count weights selected by leave-one-out KL loss.
    LooKl { k: usize },
    /// Rank-count weights selected by leave-one-out TV loss.
    LooTv { k: usize },
    Borda,
    /// Mean attained rank; orders algorithms but estimates no probability.
    AverageRank,
    PlackettLuce { pseudo_count: Option<f64> },
    GoodTuring,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Uniform => "uniform".to_string(),
            Method::Mle => "mle".to_string(),
            Method::LooKl { k } => format!("loo_kl_k{k}"),
            Method::LooTv { k } => format!("loo_tv_k{k}"),
            Method::Borda => "borda".to_string(),
            Method::AverageRank => "average_rank".to_string(),
            Method::PlackettLuce { .. } => "plackett_luce".to_string(),
            Method::GoodTuring => "good_turing".to_string(),
        }
    }

    /// Win-probability estimate on `sample`; errors for methods that only
    /// rank (average rank) or whose preconditions fail.
    pub fn win_prob(&self, sample: &BenchmarkSample) -> Result<ProbVector> {
        Ok(self.run(sample)?.win_prob.ok_or_else(|| {
            Error::NoProbabilityEstimate(self.label())
        })?)
    }

    /// Full fit: probabilities plus whatever the method exposes (weights,
    /// raw scores, mean ranks).
    pub fn run(&self, sample: &BenchmarkSample) -> Result<MethodOutput> {
        let label = self.label();
        let out = match self {
            Method::Uniform => MethodOutput {
                label,
                win_prob: Some(ProbVector::uniform(sample.m())),
                weights: None,
                scores: None,
            },
            Method::Mle => MethodOutput {
                label,
                win_prob: Some(mle_win_prob(&sample.rank_counts())),
                weights: None,
                scores: None,
            },
            Method::LooKl { k } | Method::LooTv { k } => {
                let kind = match self {
                    Method::LooKl { .. } => Divergence::Kl,
                    _ => Divergence::Tv,
                };
                let fit = fit_loo_weights(sample, *k, kind)?;
                let p = weighted_estimate(&sample.rank_counts(), &fit.weights)?;
                MethodOutput {
                    label,
                    win_prob: Some(p),
                    weights: Some(fit.weights.weights().to_vec()),
                    scores: None,
                }
            }
            Method::Borda => {
                let (scores, prob) = borda(sample);
                MethodOutput {
                    label,
                    win_prob: Some(prob),
                    weights: None,
                    scores: Some(scores),
                }
            }
            Method::AverageRank => MethodOutput {
                label,
                win_prob: None,
                scores: Some(average_rank(sample)),
                weights: None,
            },
            Method::PlackettLuce { pseudo_count } => {
                let fit = match pseudo_count {
                    Some(pseudo) => {
                        plackett_luce_fit_regularized(sample, PL_MAX_ITER, PL_TOL, *pseudo)?
                    }
                    None => plackett_luce_fit(sample, PL_MAX_ITER, PL_TOL)?,
                };
                MethodOutput {
                    label,
                    win_prob: Some(fit.alpha),
                    weights: None,
                    scores: None,
                }
            }
            Method::GoodTuring => MethodOutput {
                label,
                win_prob: Some(good_turing_win_prob(sample)?),
                weights: None,
                scores: None,
            },
        };
        Ok(out)
    }
}

/// What a fitted method reports.
#[derive(Debug, Clone, Serialize)]
pub struct MethodOutput {
    pub label: String,
    pub win_prob: Option<ProbVector>,
    /// Rank weights, for the weighted rank-count fits.
    pub weights: Option<Vec<f64>>,
    /// Raw scores: Borda totals or mean ranks.
    pub scores: Option<Vec<f64>>,
}
