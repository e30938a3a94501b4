//! Distributions over the `m!` ranking alphabet, seeded sampling, the
//! oracle weight selector, and Monte Carlo risk experiments.
//!
//! A [`RankingDistribution`] pairs a probability mass function over alphabet
//! indices with a seeded random bijection onto permutations, so which
//! ranking gets which probability is itself reproducible. All randomness is
//! derived from explicit seeds; replicas and parallel runs give identical
//! results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::baselines::{factorial, good_turing_win_prob, MAX_ENUMERABLE_M};
use crate::divergence::{kl_divergence_floored, total_variation, Divergence};
use crate::error::{Error, Result};
use crate::estimators::{
    fit_loo_weights, mle_win_prob, simplex_minimize, weighted_estimate, PROB_FLOOR,
};
use crate::minimax::{optimal_top_k_weights, two_rank_weight};
use crate::ranking::{BenchmarkSample, ProbVector, RankingObservation, WeightVector};

/// Distribution families over the ranking alphabet. `u` runs over
/// `1..=M` where `M = m!`; unbounded families are truncated to `M` and
/// renormalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    /// `P(u) ∝ u^{-s}`.
    Zipf { s: f64 },
    /// `P(u) ∝ (1 - alpha)^{u-1} alpha`.
    Geometric { alpha: f64 },
    /// `P(u) ∝ C(u + l - 1, u) r^u (1 - r)^l`.
    NegativeBinomial { l: f64, r: f64 },
    /// Beta-binomial on `u - 1` trials-of-`M - 1` successes.
    BetaBinomial { alpha: f64, beta: f64 },
    Uniform,
    /// The first half of the alphabet is twice as likely as the rest.
    Step,
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Zipf { s } => format!("zipf(s={s})"),
            Family::Geometric { alpha } => format!("geometric(alpha={alpha})"),
            Family::NegativeBinomial { l, r } => format!("negative_binomial(l={l},r={r})"),
            Family::BetaBinomial { alpha, beta } => {
                format!("beta_binomial(alpha={alpha},beta={beta})")
            }
            Family::Uniform => "uniform".to_string(),
            Family::Step => "step".to_string(),
        }
    }
}

/// Probability mass function of `family` over `1..=alphabet`.
pub fn family_pmf(family: Family, alphabet: usize) -> Result<ProbVector> {
    if alphabet < 2 {
        return Err(Error::InvalidParams(format!(
            "alphabet must have at least 2 outcomes, got {alphabet}"
        )));
    }
    let m = alphabet;
    let log_mass: Vec<f64> = match family {
        Family::Zipf { s } => {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParams(format!("zipf requires s > 0, got {s}")));
            }
            (1..=m).map(|u| -s * (u as f64).ln()).collect()
        }
        Family::Geometric { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "geometric requires 0 < alpha < 1, got {alpha}"
                )));
            }
            (1..=m)
                .map(|u| (u as f64 - 1.0) * (1.0 - alpha).ln() + alpha.ln())
                .collect()
        }
        Family::NegativeBinomial { l, r } => {
            if !(l >= 1.0 && l.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "negative binomial requires l >= 1, got {l}"
                )));
            }
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "negative binomial requires 0 < r < 1, got {r}"
                )));
            }
            (1..=m)
                .map(|u| {
                    let u = u as f64;
                    ln_gamma(u + l) - ln_gamma(u + 1.0) - ln_gamma(l)
                        + u * r.ln()
                        + l * (1.0 - r).ln()
                })
                .collect()
        }
        Family::BetaBinomial { alpha, beta } => {
            if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "beta-binomial requires alpha, beta > 0, got {alpha}, {beta}"
                )));
            }
            let trials = (m - 1) as f64;
            let ln_beta = |a: f64, b: f64| ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
            (0..m)
                .map(|x| {
                    let x = x as f64;
                    ln_gamma(trials + 1.0) - ln_gamma(x + 1.0) - ln_gamma(trials - x + 1.0)
                        + ln_beta(x + alpha, trials - x + beta)
                        - ln_beta(alpha, beta)
                })
                .collect()
        }
        Family::Uniform => vec![0.0; m],
        Family::Step => (1..=m)
            .map(|u| if u <= m / 2 { 0.0 } else { (0.5f64).ln() })
            .collect(),
    };
    let peak = log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut mass: Vec<f64> = log_mass.iter().map(|&lp| (lp - peak).exp()).collect();
    let total: f64 = mass.iter().sum();
    for v in &mut mass {
        *v /= total;
    }
    ProbVector::new(mass)
}

/// Decodes a lexicographic permutation index into a full ranking of `m`
/// algorithms (factorial number system). Index 0 is the identity.
pub fn permutation_by_index(index: u64, m: usize) -> Result<RankingObservation> {
    let count = factorial(m);
    if index >= count {
        return Err(Error::PermutationIndexOutOfRange { index, m, count });
    }
    let mut available: Vec<usize> = (0..m).collect();
    let mut rem = index;
    let mut out = Vec::with_capacity(m);
    for pos in 0..m {
        let block = factorial(m - 1 - pos);
        let digit = (rem / block) as usize;
        rem %= block;
        out.push(available.remove(digit));
    }
    RankingObservation::new(out)
}

/// Inverse of [`permutation_by_index`]: the observation must be a full
/// permutation of `0..depth`.
pub fn permutation_index(obs: &RankingObservation) -> Result<u64> {
    let m = obs.depth();
    let perm = obs.ranked();
    if let Some(&bad) = perm.iter().find(|&&x| x >= m) {
        return Err(Error::IndexOutOfRange { index: bad, m });
    }
    let mut index = 0u64;
    for pos in 0..m {
        let smaller_later = perm[pos + 1..].iter().filter(|&&x| x < perm[pos]).count() as u64;
        index += smaller_later * factorial(m - 1 - pos);
    }
    Ok(index)
}

/// A distribution over full rankings of `m` algorithms: a pmf over alphabet
/// indices plus a seeded bijection assigning each index to a permutation.
#[derive(Debug, Clone)]
pub struct RankingDistribution {
    m: usize,
    label: String,
    assignment_seed: u64,
    pmf: ProbVector,
    /// `assignment[u]` is the permutation index of alphabet outcome `u`.
    assignment: Vec<u32>,
    /// Decoded permutation per alphabet outcome.
    rankings: Vec<Vec<usize>>,
    cumulative: Vec<f64>,
    true_win: ProbVector,
}

impl RankingDistribution {
    pub fn new(m: usize, family: Family, assignment_seed: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewAlgorithms { m });
        }
        if m > MAX_ENUMERABLE_M {
            return Err(Error::AlphabetTooLarge {
                m,
                max: MAX_ENUMERABLE_M,
            });
        }
        let pmf = family_pmf(family, factorial(m) as usize)?;
        Self::from_pmf(m, pmf, assignment_seed, family.label())
    }

    /// Builds a distribution from an explicit pmf over the `m!` outcomes.
    pub fn from_pmf(
        m: usize,
        pmf: ProbVector,
        assignment_seed: u64,
        label: String,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewAlgorithms { m });
        }
        if m > MAX_ENUMERABLE_M {
            return Err(Error::AlphabetTooLarge {
                m,
                max: MAX_ENUMERABLE_M,
            });
        }
        let alphabet = factorial(m) as usize;
        if pmf.len() != alphabet {
            return Err(Error::LengthMismatch {
                left: pmf.len(),
                right: alphabet,
            });
        }

        let mut assignment: Vec<u32> = (0..alphabet as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(assignment_seed);
        assignment.shuffle(&mut rng);

        let rankings: Vec<Vec<usize>> = assignment
            .iter()
            .map(|&perm_idx| {
                permutation_by_index(perm_idx as u64, m)
                    .expect("indices stay within m!")
                    .ranked()
                    .to_vec()
            })
            .collect();

        let mut cumulative = Vec::with_capacity(alphabet);
        let mut acc = 0.0;
        for &p in pmf.values() {
            acc += p;
            cumulative.push(acc);
        }
        // Make the final bucket catch every draw despite rounding.
        *cumulative.last_mut().expect("alphabet >= 2") = 1.0;

        let mut win = vec![0.0; m];
        for (u, ranking) in rankings.iter().enumerate() {
            win[ranking[0]] += pmf.get(u);
        }
        let total: f64 = win.iter().sum();
        for v in &mut win {
            *v /= total;
        }
        let true_win = ProbVector::new(win)?;

        Ok(Self {
            m,
            label,
            assignment_seed,
            pmf,
            assignment,
            rankings,
            cumulative,
            true_win,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn assignment_seed(&self) -> u64 {
        self.assignment_seed
    }

    pub fn pmf(&self) -> &ProbVector {
        &self.pmf
    }

    /// Permutation index assigned to alphabet outcome `u` (0-based).
    pub fn assigned_permutation(&self, u: usize) -> u32 {
        self.assignment[u]
    }

    /// Probability that each algorithm is ranked first under the
    /// distribution: the pmf mass of its winner class.
    pub fn true_win_prob(&self) -> &ProbVector {
        &self.true_win
    }

    /// Draws `n` i.i.d. full rankings by inverse CDF over the alphabet.
    pub fn sample(&self, n: usize, sample_seed: u64) -> BenchmarkSample {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let names = (0..self.m).map(|i| format!("alg{i}")).collect();
        let observations = (0..n)
            .map(|_| {
                let u = self.draw_outcome(&mut rng);
                RankingObservation::new(self.rankings[u].clone())
                    .expect("stored rankings are valid")
            })
            .collect();
        BenchmarkSample::new(names, observations).expect("synthetic samples are well-formed")
    }

    fn draw_outcome(&self, rng: &mut ChaCha8Rng) -> usize {
        let x: f64 = rng.random();
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }

    /// Rank-count matrix of `n` fresh draws, without building a sample.
    fn draw_counts(&self, n: usize, sample_seed: u64) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let mut counts = vec![vec![0u32; self.m]; self.m];
        for _ in 0..n {
            let u = self.draw_outcome(&mut rng);
            for (pos, &alg) in self.rankings[u].iter().enumerate() {
                counts[alg][pos] += 1;
            }
        }
        counts
    }
}

/// Deterministic seed derivation: a SplitMix64 chain over the master seed
/// and a list of stream tags. Identical inputs give identical seeds
/// regardless of execution order, which keeps parallel and serial runs
/// byte-for-byte equal.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    fn splitmix64(x: u64) -> u64 {
        let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut state = splitmix64(master);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t.wrapping_add(0xA076_1D64_78BD_642F)));
    }
    state
}

const SAMPLE_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 2;

/// Weights minimizing the Monte Carlo estimate of the true expected
/// divergence `E D(p, p_hat^w)`, available only when the true `p` is known.
///
/// The same `replicas` samples of size `n` are reused for every candidate
/// weight vector (common random numbers), and the candidate set is the same
/// monotone grid the leave-one-out fit searches.
pub fn oracle_weights(
    dist: &RankingDistribution,
    n: usize,
    k: usize,
    kind: Divergence,
    replicas: usize,
    seed: u64,
) -> Result<WeightVector> {
    if replicas < 1 {
        return Err(Error::InvalidParams(format!(
            "oracle needs at least one replica, got {replicas}"
        )));
    }
    let m = dist.m();
    if k < 1 || k > m {
        return Err(Error::InfeasibleOrder { k, max: m });
    }
    let p_true = dist.true_win_prob().values();
    let count_sets: Vec<Vec<Vec<u32>>> = (0..replicas)
        .map(|r| dist.draw_counts(n, derive_seed(seed, &[ORACLE_STREAM, r as u64])))
        .collect();

    let nf = n as f64;
    let objective = |w: &[f64]| -> f64 {
        let mut total = 0.0;
        let mut phat = vec![0.0; m];
        for counts in &count_sets {
            for (j, pj) in phat.iter_mut().enumerate() {
                *pj = w
                    .iter()
                    .zip(&counts[j])
                    .map(|(wt, &c)| wt * c as f64)
                    .sum::<f64>()
                    / nf;
            }
            total += match kind {
                Divergence::Tv => p_true
                    .iter()
                    .zip(&phat)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>(),
                Divergence::Kl => p_true
                    .iter()
                    .zip(&phat)
                    .filter(|(&a, _)| a > 0.0)
                    .map(|(&a, &b)| a * (a / b.max(PROB_FLOOR)).ln())
                    .sum::<f64>(),
            };
        }
        total / replicas as f64
    };
    let (weights, _, _) = simplex_minimize(objective, k, true)?;
    Ok(weights)
}

/// Estimators compared in the risk experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RiskEstimator {
    /// The true win probabilities; a zero-risk debug reference.
    Truth,
    Mle,
    /// Leave-one-out weight selection refit on every replica.
    Loo { kind: Divergence, k: usize },
    /// The fixed two-rank weights `(w*(n), 1 - w*(n))`.
    TwoRankMinimax,
    /// Worst-case-optimal fixed top-k weights for the given `(m, n)`.
    TopKMinimax { k: usize },
    /// Knows the true distribution; minimizes Monte Carlo expected risk.
    Oracle { k: usize, replicas: usize },
    GoodTuring,
}

impl RiskEstimator {
    pub fn label(&self) -> String {
        match self {
            RiskEstimator::Truth => "truth".to_string(),
            RiskEstimator::Mle => "mle".to_string(),
            RiskEstimator::Loo { kind, k } => format!("loo_{}_k{k}", kind.label()),
            RiskEstimator::TwoRankMinimax => "two_rank_minimax".to_string(),
            RiskEstimator::TopKMinimax { k } => format!("top_k_minimax_k{k}"),
            RiskEstimator::Oracle { k, .. } => format!("oracle_k{k}"),
            RiskEstimator::GoodTuring => "good_turing".to_string(),
        }
    }
}

enum Prepared {
    Truth,
    Mle,
    Loo { kind: Divergence, k: usize },
    Fixed(WeightVector),
    GoodTuring,
}

fn prepare(
    estimator: &RiskEstimator,
    dist: &RankingDistribution,
    n: usize,
    kind: Divergence,
    master_seed: u64,
) -> Result<Prepared> {
    Ok(match *estimator {
        RiskEstimator::Truth => Prepared::Truth,
        RiskEstimator::Mle => Prepared::Mle,
        RiskEstimator::Loo { kind, k } => Prepared::Loo { kind, k },
        RiskEstimator::TwoRankMinimax => {
            let w1 = two_rank_weight(n);
            Prepared::Fixed(WeightVector::new(vec![w1, 1.0 - w1], true)?)
        }
        RiskEstimator::TopKMinimax { k } => {
            Prepared::Fixed(optimal_top_k_weights(dist.m(), n, k)?.0)
        }
        RiskEstimator::Oracle { k, replicas } => Prepared::Fixed(oracle_weights(
            dist,
            n,
            k,
            kind,
            replicas,
            derive_seed(master_seed, &[ORACLE_STREAM, n as u64]),
        )?),
        RiskEstimator::GoodTuring => Prepared::GoodTuring,
    })
}

/// Per-replica divergences for several estimators evaluated on **shared**
/// samples, enabling paired comparisons. `risks[e][r]` is estimator `e`'s
/// divergence on replica `r`; `mean_weights[e]` averages fitted or fixed
/// weights where the estimator has any.
pub struct PairedRisks {
    pub risks: Vec<Vec<f64>>,
    pub mean_weights: Vec<Option<Vec<f64>>>,
}

pub fn paired_replica_risks(
    dist: &RankingDistribution,
    estimators: &[RiskEstimator],
    n: usize,
    replicas: usize,
    kind: Divergence,
    master_seed: u64,
) -> Result<PairedRisks> {
    let prepared: Vec<Prepared> = estimators
        .iter()
        .map(|e| prepare(e, dist, n, kind, master_seed))
        .collect::<Result<_>>()?;
    let p_true = dist.true_win_prob();

    let per_replica: Vec<Result<Vec<(f64, Option<Vec<f64>>)>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let sample = dist.sample(n, derive_seed(master_seed, &[SAMPLE_STREAM, n as u64, r as u64]));
            let counts = sample.rank_counts();
            prepared
                .iter()
                .map(|est| {
                    let (phat, weights) = match est {
                        Prepared::Truth => (p_true.clone(), None),
                        Prepared::Mle => (mle_win_prob(&counts), None),
                        Prepared::Loo { kind, k } => {
                            let fit = fit_loo_weights(&sample, *k, *kind)?;
                            let p = weighted_estimate(&counts, &fit.weights)?;
                            (p, Some(fit.weights.weights().to_vec()))
                        }
                        Prepared::Fixed(w) => (
                            weighted_estimate(&counts, w)?,
                            Some(w.weights().to_vec()),
                        ),
                        Prepared::GoodTuring => (good_turing_win_prob(&sample)?, None),
                    };
                    let risk = match kind {
                        Divergence::Tv => total_variation(p_true, &phat)?,
                        Divergence::Kl => kl_divergence_floored(p_true, &phat, PROB_FLOOR)?,
                    };
                    Ok((risk, weights))
                })
                .collect()
        })
        .collect();

    let mut risks = vec![Vec::with_capacity(replicas); estimators.len()];
    let mut weight_sums: Vec<Option<Vec<f64>>> = vec![None; estimators.len()];
    for outcome in per_replica {
        let row = outcome?;
        for (e, (risk, weights)) in row.into_iter().enumerate() {
            risks[e].push(risk);
            if let Some(w) = weights {
                match &mut weight_sums[e] {
                    Some(acc) => {
                        for (a, b) in acc.iter_mut().zip(&w) {
                            *a += b;
                        }
                    }
                    slot => *slot = Some(w),
                }
            }
        }
    }
    let mean_weights = weight_sums
        .into_iter()
        .map(|ws| ws.map(|w| w.iter().map(|x| x / replicas as f64).collect()))
        .collect();
    Ok(PairedRisks {
        risks,
        mean_weights,
    })
}

/// One aggregated row of a risk experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RiskRow {
    pub estimator: String,
    pub n: usize,
    pub kind: Divergence,
    pub mean_risk: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub mean_weights: Option<Vec<f64>>,
}

/// Mean risks over replicated draws, one row per (estimator, n).
#[derive(Debug, Clone, Serialize)]
pub struct RiskTable {
    pub family: String,
    pub rows: Vec<RiskRow>,
}

impl RiskTable {
    /// Rows as CSV: `family,estimator,n,kind,mean_risk,stderr,replicas`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,estimator,n,kind,mean_risk,stderr,replicas\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.family,
                row.estimator,
                row.n,
                row.kind,
                row.mean_risk,
                row.std_error,
                row.replicas
            ));
        }
        out
    }

    /// Mean fitted weights in long CSV form:
    /// `family,estimator,n,kind,rank,mean_weight`.
    pub fn weights_csv(&self) -> String {
        let mut out = String::from("family,estimator,n,kind,rank,mean_weight\n");
        for row in &self.rows {
            if let Some(weights) = &row.mean_weights {
                for (idx, w) in weights.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        self.family,
                        row.estimator,
                        row.n,
                        row.kind,
                        idx + 1,
                        w
                    ));
                }
            }
        }
        out
    }
}

/// Runs `replicas` seeded draws for every `n` and estimator, reporting mean
/// divergence from the true win probabilities with its standard error.
pub fn risk_experiment(
    dist: &RankingDistribution,
    estimators: &[RiskEstimator],
    n_values: &[usize],
    replicas: usize,
    kind: Divergence,
    master_seed: u64,
) -> Result<RiskTable> {
    let mut rows = Vec::new();
    for &n in n_values {
        let paired = paired_replica_risks(dist, estimators, n, replicas, kind, master_seed)?;
        for (e, estimator) in estimators.iter().enumerate() {
            let risks = &paired.risks[e];
            let mean = risks.iter().sum::<f64>() / replicas as f64;
            let var = if replicas > 1 {
                risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (replicas - 1) as f64
            } else {
                0.0
            };
            rows.push(RiskRow {
                estimator: estimator.label(),
                n,
                kind,
                mean_risk: mean,
                std_error: (var / replicas as f64).sqrt(),
                replicas,
                mean_weights: paired.mean_weights[e].clone(),
            });
        }
    }
    Ok(RiskTable {
        family: dist.label().to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_pmf() {
        let p = family_pmf(Family::Uniform, 720).unwrap();
        for u in 0..720 {
            assert!((p.get(u) - 1.0 / 720.0).abs() < 1e-15);
        }
    }

    #[test]
    fn step_pmf_small_alphabet() {
        let p = family_pmf(Family::Step, 4).unwrap();
        let expect = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (u, e) in expect.iter().enumerate() {
            assert!((p.get(u) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn zipf_pmf_matches_high_precision_reference() {
        // Reference values computed with 50-digit arithmetic.
        let p = family_pmf(Family::Zipf { s: 1.01 }, 720).unwrap();
        let expect = [
            (0, 0.14396606435763033),
            (1, 0.071485809055584008),
            (9, 0.01406889966447960524),
            (99, 0.0013748652410022186764),
            (718, 0.00018748388879718957681),
            (719, 0.00018722089239150780471),
        ];
        for (u, e) in expect {
            assert!(
                ((p.get(u) - e) / e).abs() < 1e-12,
                "u = {}: {} vs {e}",
                u + 1,
                p.get(u)
            );
        }
    }

    #[test]
    fn geometric_pmf_matches_reference() {
        let p = family_pmf(Family::Geometric { alpha: 0.4 }, 6).unwrap();
        let expect = [
            0.419575725027,
            0.251745435016,
            0.15104726101,
            0.0906283566058,
            0.0543770139635,
            0.0326262083781,
        ];
        for (u, e) in expect.iter().enumerate() {
            assert!(((p.get(u) - e) / e).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_binomial_pmf_matches_reference() {
        let p = family_pmf(Family::NegativeBinomial { l: 1.0, r: 0.003 }, 6).unwrap();
        let expect = [0.997, 0.002991, 8.973e-6, 2.6919e-8, 8.0757e-11, 2.42271e-13];
        for (u, e) in expect.iter().enumerate() {
            assert!(((p.get(u) - e) / e).abs() < 1e-5, "u = {u}: {}", p.get(u));
        }
    }

    #[test]
    fn beta_binomial_pmf_matches_reference() {
        let p = family_pmf(
            Family::BetaBinomial {
                alpha: 2.0,
                beta: 2.0,
            },
            6,
        )
        .unwrap();
        let expect = [
            0.107142857143,
            0.178571428571,
            0.214285714286,
            0.214285714286,
            0.178571428571,
            0.107142857143,
        ];
        for (u, e) in expect.iter().enumerate() {
            assert!(((p.get(u) - e) / e).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_family_params_rejected() {
        assert!(family_pmf(Family::Zipf { s: 0.0 }, 6).is_err());
        assert!(family_pmf(Family::Geometric { alpha: 1.0 }, 6).is_err());
        assert!(family_pmf(Family::NegativeBinomial { l: 0.5, r: 0.1 }, 6).is_err());
        assert!(family_pmf(Family::BetaBinomial { alpha: 0.0, beta: 1.0 }, 6).is_err());
    }

    #[test]
    fn permutation_index_zero_is_identity() {
        let p = permutation_by_index(0, 4).unwrap();
        assert_eq!(p.ranked(), &[0, 1, 2, 3]);
    }

    #[test]
    fn permutation_round_trip_m4() {
        for idx in 0..24 {
            let p = permutation_by_index(idx, 4).unwrap();
            assert_eq!(permutation_index(&p).unwrap(), idx);
        }
        assert!(matches!(
            permutation_by_index(24, 4),
            Err(Error::PermutationIndexOutOfRange { index: 24, m: 4, count: 24 })
        ));
    }

    #[test]
    fn last_permutation_is_reversal() {
        let p = permutation_by_index(719, 6).unwrap();
        assert_eq!(p.ranked(), &[5, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn true_win_prob_uniform_family_is_uniform() {
        let dist = RankingDistribution::new(4, Family::Uniform, 11).unwrap();
        let p = dist.true_win_prob();
        for j in 0..4 {
            assert!((p.get(j) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn true_win_prob_two_algorithms() {
        let dist = RankingDistribution::new(2, Family::Geometric { alpha: 0.4 }, 5).unwrap();
        let p = dist.true_win_prob();
        // Class masses follow the assignment of the two outcomes.
        let pmf = dist.pmf();
        let mut expect = [0.0; 2];
        for u in 0..2 {
            let perm = permutation_by_index(dist.assigned_permutation(u) as u64, 2).unwrap();
            expect[perm.winner()] += pmf.get(u);
        }
        assert!((p.get(0) - expect[0]).abs() < 1e-12);
        assert!((p.get(1) - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn true_win_prob_matches_class_sums() {
        // Independent route: per winner class, sum the pmf of the outcomes
        // whose assigned permutation starts with that winner.
        let dist = RankingDistribution::new(3, Family::Zipf { s: 1.01 }, 99).unwrap();
        let mut expect = [0.0; 3];
        for u in 0..6 {
            let perm = permutation_by_index(dist.assigned_permutation(u) as u64, 3).unwrap();
            expect[perm.winner()] += dist.pmf().get(u);
        }
        for j in 0..3 {
            assert!((dist.true_win_prob().get(j) - expect[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let dist = RankingDistribution::new(4, Family::Step, 3).unwrap();
        let a = dist.sample(50, 17);
        let b = dist.sample(50, 17);
        assert_eq!(a, b);
        let c = dist.sample(50, 18);
        assert_ne!(a, c);
    }

    #[test]
    fn point_mass_distribution_yields_identical_observations() {
        let alphabet = factorial(3) as usize;
        let mut mass = vec![0.0; alphabet];
        mass[2] = 1.0;
        let pmf = ProbVector::new(mass).unwrap();
        let dist = RankingDistribution::from_pmf(3, pmf, 9, "point".into()).unwrap();
        let s = dist.sample(20, 4);
        let first = &s.observations()[0];
        assert!(s.observations().iter().all(|o| o == first));
    }

    #[test]
    fn sample_frequencies_match_pmf() {
        let dist = RankingDistribution::new(3, Family::Zipf { s: 1.01 }, 7).unwrap();
        let n = 100_000;
        let s = dist.sample(n, 123);
        let mut winner_freq = [0.0; 3];
        for obs in s.observations() {
            winner_freq[obs.winner()] += 1.0 / n as f64;
        }
        let p = dist.true_win_prob();
        for j in 0..3 {
            let se = (p.get(j) * (1.0 - p.get(j)) / n as f64).sqrt();
            assert!(
                (winner_freq[j] - p.get(j)).abs() < 3.0 * se + 1e-9,
                "winner {j}: {} vs {}",
                winner_freq[j],
                p.get(j)
            );
        }
    }

    #[test]
    fn oracle_prefers_win_counting_under_point_mass() {
        let alphabet = factorial(3) as usize;
        let mut mass = vec![0.0; alphabet];
        mass[4] = 1.0;
        let pmf = ProbVector::new(mass).unwrap();
        let dist = RankingDistribution::from_pmf(3, pmf, 21, "point".into()).unwrap();
        for kind in [Divergence::Kl, Divergence::Tv] {
            let w = oracle_weights(&dist, 10, 3, kind, 50, 5).unwrap();
            assert!((w.weights()[0] - 1.0).abs() < 1e-9, "{kind:?}: {w:?}");
        }
    }

    #[test]
    fn oracle_matches_exact_expectation_at_tiny_n() {
        // With n = 2 the sample space has only 36 outcomes, so the exact
        // expected divergence is a finite sum; its grid minimizer should
        // agree with the Monte Carlo oracle.
        let dist = RankingDistribution::new(3, Family::Step, 31).unwrap();
        let kind = Divergence::Tv;
        let p_true = dist.true_win_prob().values().to_vec();
        let pmf = dist.pmf().clone();
        let alphabet = pmf.len();

        let exact_objective = |w: &[f64]| -> f64 {
            let mut total = 0.0;
            for u1 in 0..alphabet {
                for u2 in 0..alphabet {
                    let prob = pmf.get(u1) * pmf.get(u2);
                    if prob == 0.0 {
                        continue;
                    }
                    let mut counts = vec![[0u32; 3]; 3];
                    for u in [u1, u2] {
                        let perm =
                            permutation_by_index(dist.assigned_permutation(u) as u64, 3).unwrap();
                        for (pos, &alg) in perm.ranked().iter().enumerate() {
                            counts[alg][pos] += 1;
                        }
                    }
                    let mut tv = 0.0;
                    for j in 0..3 {
                        let phat: f64 = w
                            .iter()
                            .zip(&counts[j])
                            .map(|(wt, &c)| wt * c as f64)
                            .sum::<f64>()
                            / 2.0;
                        tv += (p_true[j] - phat).abs();
                    }
                    total += prob * tv;
                }
            }
            total
        };
        let (exact_w, _, _) = simplex_minimize(exact_objective, 3, true).unwrap();
        let mc_w = oracle_weights(&dist, 2, 3, kind, 20_000, 77).unwrap();
        for j in 0..3 {
            assert!(
                (exact_w.weights()[j] - mc_w.weights()[j]).abs() < 0.05,
                "exact {:?} vs mc {:?}",
                exact_w.weights(),
                mc_w.weights()
            );
        }
    }

    #[test]
    fn truth_estimator_has_zero_risk() {
        let dist = RankingDistribution::new(4, Family::Step, 2).unwrap();
        for kind in [Divergence::Kl, Divergence::Tv] {
            let table = risk_experiment(
                &dist,
                &[RiskEstimator::Truth],
                &[3, 10],
                20,
                kind,
                99,
            )
            .unwrap();
            for row in &table.rows {
                assert_eq!(row.mean_risk, 0.0);
                assert_eq!(row.std_error, 0.0);
            }
        }
    }

    #[test]
    fn mle_tv_risk_stays_under_worst_case_bound_and_decreases() {
        let dist = RankingDistribution::new(6, Family::Uniform, 8).unwrap();
        let table = risk_experiment(
            &dist,
            &[RiskEstimator::Mle],
            &[6, 24],
            200,
            Divergence::Tv,
            12345,
        )
        .unwrap();
        let risk_small = table.rows[0].mean_risk;
        let risk_large = table.rows[1].mean_risk;
        assert!(risk_small < 1.0, "sqrt(6/6) bound violated: {risk_small}");
        assert!(risk_large < risk_small);
        assert!(risk_large < (6.0f64 / 24.0).sqrt());
    }

    #[test]
    fn risk_experiment_is_reproducible() {
        let dist = RankingDistribution::new(4, Family::Zipf { s: 1.01 }, 6).unwrap();
        let run = || {
            risk_experiment(
                &dist,
                &[
                    RiskEstimator::Mle,
                    RiskEstimator::Loo {
                        kind: Divergence::Kl,
                        k: 3,
                    },
                ],
                &[8],
                50,
                Divergence::Kl,
                2024,
            )
            .unwrap()
            .to_csv()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn derive_seed_separates_streams() {
        let a = derive_seed(7, &[1, 2]);
        let b = derive_seed(7, &[2, 1]);
        let c = derive_seed(8, &[1, 2]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &[1, 2]));
    }
}
