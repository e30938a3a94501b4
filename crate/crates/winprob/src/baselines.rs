//! Comparison methods: Borda count, average rank, Plackett-Luce fitting,
//! and a Good-Turing aggregate over the ranking alphabet.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ranking::{BenchmarkSample, ProbVector};

/// Largest roster for which the `m!` ranking alphabet is enumerated.
pub const MAX_ENUMERABLE_M: usize = 8;

/// Borda scores and their normalization to a probability vector.
///
/// Rank `j` of `m` earns weight `m - j`. Algorithms missing from a top-K
/// observation each receive the mean of the unassigned weights, which is
/// `(m - K - 1) / 2`, so every observation hands out the same total mass.
pub fn borda(sample: &BenchmarkSample) -> (Vec<f64>, ProbVector) {
    let m = sample.m();
    let mut scores = vec![0.0; m];
    for obs in sample.observations() {
        let k = obs.depth();
        for (pos, &alg) in obs.ranked().iter().enumerate() {
            scores[alg] += (m - 1 - pos) as f64;
        }
        if k < m {
            let leftover: f64 = (k..m).map(|pos| (m - 1 - pos) as f64).sum();
            let fill = leftover / (m - k) as f64;
            let mut listed = vec![false; m];
            for &alg in obs.ranked() {
                listed[alg] = true;
            }
            for (alg, &seen) in listed.iter().enumerate() {
                if !seen {
                    scores[alg] += fill;
                }
            }
        }
    }
    let total: f64 = scores.iter().sum();
    let prob = ProbVector::new(scores.iter().map(|s| s / total).collect())
        .expect("borda scores are nonnegative with positive total for m >= 2");
    (scores, prob)
}

/// Mean rank attained by each algorithm; lower is better.
///
/// Algorithms missing from a top-K observation are assigned the mean of the
/// unassigned ranks, `(K + 1 + m) / 2`.
pub fn average_rank(sample: &BenchmarkSample) -> Vec<f64> {
    let m = sample.m();
    let mut totals = vec![0.0; m];
    for obs in sample.observations() {
        let k = obs.depth();
        let mut listed = vec![false; m];
        for (pos, &alg) in obs.ranked().iter().enumerate() {
            totals[alg] += (pos + 1) as f64;
            listed[alg] = true;
        }
        if k < m {
            let fill = (k + 1 + m) as f64 / 2.0;
            for (alg, &seen) in listed.iter().enumerate() {
                if !seen {
                    totals[alg] += fill;
                }
            }
        }
    }
    let n = sample.n() as f64;
    totals.iter().map(|t| t / n).collect()
}

/// A fitted Plackett-Luce model: positive scores normalized to sum 1, with
/// `alpha_j` read as the probability that algorithm `j` beats the field.
#[derive(Debug, Clone, Serialize)]
pub struct PlackettLuceFit {
    pub alpha: ProbVector,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood after every iteration; non-decreasing for the
    /// unregularized fit.
    pub log_likelihood_trace: Vec<f64>,
}

/// Maximum-likelihood Plackett-Luce fit via minorization-maximization.
///
/// Each observation contributes one stagewise choice per ranked position
/// (dropping the forced last stage of a full ranking). Errors with
/// [`Error::DegenerateSupport`] if some algorithm is never chosen; see
/// [`plackett_luce_fit_regularized`] for that case.
pub fn plackett_luce_fit(
    sample: &BenchmarkSample,
    max_iter: usize,
    tol: f64,
) -> Result<PlackettLuceFit> {
    plackett_luce_fit_impl(sample, max_iter, tol, 0.0)
}

/// Plackett-Luce fit with an additive pseudo-count on each algorithm's
/// choice tally, keeping scores positive when the data's support is partial.
pub fn plackett_luce_fit_regularized(
    sample: &BenchmarkSample,
    max_iter: usize,
    tol: f64,
    pseudo_count: f64,
) -> Result<PlackettLuceFit> {
    if pseudo_count < 0.0 {
        return Err(Error::InvalidParams(format!(
            "pseudo-count must be nonnegative, got {pseudo_count}"
        )));
    }
    plackett_luce_fit_impl(sample, max_iter, tol, pseudo_count)
}

fn plackett_luce_fit_impl(
    sample: &BenchmarkSample,
    max_iter: usize,
    tol: f64,
    pseudo: f64,
) -> Result<PlackettLuceFit> {
    let m = sample.m();
    // Stages: position s of observation i is a choice among the algorithms
    // not ranked before it. The final stage of a full ranking is forced and
    // carries no information.
    let mut choice_counts = vec![0.0; m];
    let mut stages: Vec<(usize, Vec<usize>)> = Vec::new(); // (choice, remaining set)
    for obs in sample.observations() {
        let informative = obs.depth().min(m - 1);
        let mut remaining: Vec<usize> = (0..m).collect();
        for s in 0..informative {
            let choice = obs.ranked()[s];
            choice_counts[choice] += 1.0;
            stages.push((choice, remaining.clone()));
            remaining.retain(|&a| a != choice);
        }
    }
    if pseudo == 0.0 {
        let missing: Vec<usize> = (0..m).filter(|&j| choice_counts[j] == 0.0).collect();
        if !missing.is_empty() {
            return Err(Error::DegenerateSupport { missing });
        }
    }

    let mut alpha = vec![1.0 / m as f64; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();
    for _ in 0..max_iter {
        iterations += 1;
        // MM update: alpha_j <- (choices of j + pseudo) / sum over stages
        // containing j of the inverse remaining-mass.
        let mut denom = vec![0.0; m];
        for (_, remaining) in &stages {
            let mass: f64 = remaining.iter().map(|&a| alpha[a]).sum();
            let inv = 1.0 / mass;
            for &a in remaining {
                denom[a] += inv;
            }
        }
        let mut next: Vec<f64> = (0..m)
            .map(|j| {
                if denom[j] > 0.0 {
                    (choice_counts[j] + pseudo) / denom[j]
                } else {
                    alpha[j]
                }
            })
            .collect();
        let total: f64 = next.iter().sum();
        for a in &mut next {
            *a /= total;
        }
        let delta = alpha
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        alpha = next;
        trace.push(log_likelihood(&stages, &alpha));
        if delta < tol {
            converged = true;
            break;
        }
    }

    let log_likelihood = trace.last().copied().unwrap_or(0.0);
    Ok(PlackettLuceFit {
        alpha: ProbVector::new(alpha).expect("normalized positive scores"),
        iterations,
        converged,
        log_likelihood,
        log_likelihood_trace: trace,
    })
}

fn log_likelihood(stages: &[(usize, Vec<usize>)], alpha: &[f64]) -> f64 {
    stages
        .iter()
        .map(|(choice, remaining)| {
            let mass: f64 = remaining.iter().map(|&a| alpha[a]).sum();
            (alpha[*choice] / mass).ln()
        })
        .sum()
}

/// Win probabilities from a Good-Turing estimate of the full ranking
/// distribution.
///
/// Each distinct observed ranking seen `r` times gets the adjusted
/// probability `(r+1) N_{r+1} / (n N_r)` when rankings of count `r + 1`
/// exist, and the raw `r/n` otherwise. The missing mass `N_1 / n` is spread
/// over unseen rankings in proportion to how many of each winner's
/// `(m-1)!` rankings were never observed; the result is renormalized.
pub fn good_turing_win_prob(sample: &BenchmarkSample) -> Result<ProbVector> {
    let m = sample.m();
    if m > MAX_ENUMERABLE_M {
        return Err(Error::AlphabetTooLarge {
            m,
            max: MAX_ENUMERABLE_M,
        });
    }
    if sample.observations().iter().any(|o| o.depth() != m) {
        return Err(Error::NeedsFullRankings("good-turing"));
    }
    let n = sample.n() as f64;

    let mut ranking_counts: HashMap<&[usize], u32> = HashMap::new();
    for obs in sample.observations() {
        *ranking_counts.entry(obs.ranked()).or_insert(0) += 1;
    }
    let mut freq_of_freq: HashMap<u32, u32> = HashMap::new();
    for &r in ranking_counts.values() {
        *freq_of_freq.entry(r).or_insert(0) += 1;
    }
    // Accumulate in sorted order so reruns are bit-identical.
    let mut sorted_counts: Vec<(&[usize], u32)> = ranking_counts.into_iter().collect();
    sorted_counts.sort();

    let mut mass = vec![0.0; m];
    let mut distinct_seen = vec![0u64; m];
    for (ranking, r) in sorted_counts {
        let winner = ranking[0];
        distinct_seen[winner] += 1;
        let n_r = freq_of_freq[&r] as f64;
        let n_r1 = freq_of_freq.get(&(r + 1)).copied().unwrap_or(0) as f64;
        let p = if n_r1 > 0.0 {
            (r as f64 + 1.0) * n_r1 / (n * n_r)
        } else {
            r as f64 / n
        };
        mass[winner] += p;
    }

    let singletons = freq_of_freq.get(&1).copied().unwrap_or(0) as f64;
    let class_size = factorial(m - 1);
    let unseen: Vec<u64> = distinct_seen.iter().map(|&s| class_size - s).collect();
    let total_unseen: u64 = unseen.iter().sum();
    if singletons > 0.0 && total_unseen > 0 {
        let missing_mass = singletons / n;
        for (j, &u) in unseen.iter().enumerate() {
            mass[j] += missing_mass * u as f64 / total_unseen as f64;
        }
    }

    let total: f64 = mass.iter().sum();
    ProbVector::new(mass.iter().map(|x| x / total).collect())
}

pub(crate) fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::RankingObservation;

    fn obs(ranked: &[usize]) -> RankingObservation {
        RankingObservation::new(ranked.to_vec()).unwrap()
    }

    fn sample(m: usize, rankings: &[&[usize]]) -> BenchmarkSample {
        let names = (0..m).map(|i| format!("alg{i}")).collect();
        BenchmarkSample::new(names, rankings.iter().map(|r| obs(r)).collect()).unwrap()
    }

    #[test]
    fn borda_single_full_ranking() {
        let s = sample(3, &[&[0, 1, 2]]);
        let (scores, prob) = borda(&s);
        assert_eq!(scores, vec![2.0, 1.0, 0.0]);
        assert!((prob.get(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((prob.get(1) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(prob.get(2), 0.0);
    }

    #[test]
    fn borda_symmetric_pair_is_uniform() {
        let s = sample(3, &[&[0, 1, 2], &[2, 1, 0]]);
        let (scores, prob) = borda(&s);
        assert_eq!(scores, vec![2.0, 2.0, 2.0]);
        for i in 0..3 {
            assert!((prob.get(i) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn borda_pads_top_k_with_mean_leftover() {
        // m=5, top-2 [A, B]: A gets 4, B gets 3, the rest (2+1+0)/3 = 1.
        let s = sample(5, &[&[0, 1]]);
        let (scores, _) = borda(&s);
        assert_eq!(scores, vec![4.0, 3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn average_rank_examples() {
        let s = sample(3, &[&[1, 0, 2]]);
        assert_eq!(average_rank(&s), vec![2.0, 1.0, 3.0]);

        let s = sample(3, &[&[0, 1, 2], &[2, 1, 0]]);
        assert_eq!(average_rank(&s), vec![2.0, 2.0, 2.0]);

        // m=5, top-2 [A, B]: missing algorithms sit at (3+4+5)/3 = 4.
        let s = sample(5, &[&[0, 1]]);
        assert_eq!(average_rank(&s), vec![1.0, 2.0, 4.0, 4.0, 4.0]);
    }

    #[test]
    fn borda_and_average_rank_order_agree_on_full_rankings() {
        let s = sample(
            4,
            &[&[0, 1, 2, 3], &[1, 0, 3, 2], &[0, 2, 1, 3], &[2, 0, 1, 3]],
        );
        let (scores, _) = borda(&s);
        let ranks = average_rank(&s);
        let best_borda = (0..4).max_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
        let best_rank = (0..4).min_by(|&a, &b| ranks[a].partial_cmp(&ranks[b]).unwrap());
        assert_eq!(best_borda, best_rank);
    }

    #[test]
    fn plackett_luce_two_algorithms_recovers_win_fraction() {
        let mut rankings: Vec<&[usize]> = Vec::new();
        for _ in 0..7 {
            rankings.push(&[0, 1]);
        }
        for _ in 0..3 {
            rankings.push(&[1, 0]);
        }
        let s = sample(2, &rankings);
        let fit = plackett_luce_fit(&s, 500, 1e-12).unwrap();
        assert!(fit.converged);
        assert!((fit.alpha.get(0) - 0.7).abs() < 1e-9);
        assert!((fit.alpha.get(1) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn plackett_luce_symmetric_sample_is_uniform() {
        let all: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let refs: Vec<&[usize]> = all.iter().map(|r| r.as_slice()).collect();
        let s = sample(3, &refs);
        let fit = plackett_luce_fit(&s, 500, 1e-12).unwrap();
        for j in 0..3 {
            assert!((fit.alpha.get(j) - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn plackett_luce_matches_grid_likelihood_search() {
        let s = sample(3, &[&[0, 1, 2], &[0, 1, 2], &[1, 2, 0]]);
        let fit = plackett_luce_fit(&s, 2000, 1e-13).unwrap();
        // Independent route: scan the 2-simplex for the best likelihood.
        let ll = |alpha: &[f64]| -> f64 {
            let stage = |c: usize, rem: &[usize]| -> f64 {
                let mass: f64 = rem.iter().map(|&a| alpha[a]).sum();
                (alpha[c] / mass).ln()
            };
            2.0 * (stage(0, &[0, 1, 2]) + stage(1, &[1, 2]))
                + stage(1, &[0, 1, 2])
                + stage(2, &[0, 2])
        };
        let res = 1000;
        let mut best = (vec![], f64::NEG_INFINITY);
        for a in 1..res {
            for b in 1..res - a {
                let alpha = [
                    a as f64 / res as f64,
                    b as f64 / res as f64,
                    (res - a - b) as f64 / res as f64,
                ];
                let v = ll(&alpha);
                if v > best.1 {
                    best = (alpha.to_vec(), v);
                }
            }
        }
        for j in 0..3 {
            assert!(
                (fit.alpha.get(j) - best.0[j]).abs() < 2e-3,
                "alpha[{j}] = {} vs grid {}",
                fit.alpha.get(j),
                best.0[j]
            );
        }
        assert!(fit.log_likelihood >= best.1 - 1e-9);
    }

    #[test]
    fn plackett_luce_log_likelihood_is_monotone() {
        let s = sample(
            4,
            &[&[0, 1, 2, 3], &[1, 3, 0, 2], &[2, 0, 3, 1], &[0, 2, 1, 3]],
        );
        let fit = plackett_luce_fit(&s, 300, 1e-12).unwrap();
        for pair in fit.log_likelihood_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-11, "{} then {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn plackett_luce_degenerate_support_errors_without_regularization() {
        // Algorithm 2 never appears in any top-1 prefix.
        let s = sample(3, &[&[0], &[1], &[0]]);
        assert!(matches!(
            plackett_luce_fit(&s, 100, 1e-9),
            Err(Error::DegenerateSupport { .. })
        ));
        let fit = plackett_luce_fit_regularized(&s, 200, 1e-10, 0.1).unwrap();
        assert!(fit.alpha.values().iter().all(|&a| a > 0.0));
    }

    #[test]
    fn good_turing_identical_observations_concentrate_on_winner() {
        let row: &[usize] = &[1, 0, 2];
        let s = sample(3, &vec![row; 5]);
        let p = good_turing_win_prob(&s).unwrap();
        // Single ranking seen five times, no singletons: fallback r/n = 1
        // for its class and nothing to spread.
        assert!(p.get(1) >= 1.0 - 1.0 / 5.0);
        assert!((p.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn good_turing_each_ranking_once_is_uniform() {
        let all: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let refs: Vec<&[usize]> = all.iter().map(|r| r.as_slice()).collect();
        let s = sample(3, &refs);
        let p = good_turing_win_prob(&s).unwrap();
        for j in 0..3 {
            assert!((p.get(j) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn good_turing_matches_hand_trace() {
        // Four observations: [A,B,C] twice, [B,A,C] once, [C,A,B] once.
        let s = sample(3, &[&[0, 1, 2], &[0, 1, 2], &[1, 0, 2], &[2, 0, 1]]);
        let p = good_turing_win_prob(&s).unwrap();
        // Hand trace: N_1 = 2, N_2 = 1. [A,B,C] (r=2): no N_3, fallback 2/4.
        // Singletons (r=1): (1+1) * N_2 / (4 * N_1) = 2/8 = 0.25 each.
        // Missing mass N_1/n = 0.5 over unseen counts per class: A 1, B 1, C 1
        // (each class has 2 rankings, A saw 1, B saw 1, C saw 1) -> 1/6 each.
        let e_a = 0.5 + 1.0 / 6.0;
        let e_b = 0.25 + 1.0 / 6.0;
        let e_c = 0.25 + 1.0 / 6.0;
        let total = e_a + e_b + e_c;
        assert!((p.get(0) - e_a / total).abs() < 1e-12);
        assert!((p.get(1) - e_b / total).abs() < 1e-12);
        assert!((p.get(2) - e_c / total).abs() < 1e-12);
    }

    #[test]
    fn good_turing_rejects_partial_and_large_inputs() {
        let s = sample(3, &[&[0, 1], &[1, 0]]);
        assert!(matches!(
            good_turing_win_prob(&s),
            Err(Error::NeedsFullRankings(_))
        ));
        let names = (0..9).map(|i| format!("alg{i}")).collect();
        let ranking: Vec<usize> = (0..9).collect();
        let s = BenchmarkSample::new(
            names,
            vec![RankingObservation::new(ranking).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            good_turing_win_prob(&s),
            Err(Error::AlphabetTooLarge { m: 9, max: 8 })
        ));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(3), 6);
        assert_eq!(factorial(8), 40_320);
    }
}
