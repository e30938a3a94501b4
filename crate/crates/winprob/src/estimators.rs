//! The weighted rank-count estimator and leave-one-out weight selection.
//!
//! The estimate is `p_hat_i = (1/n) sum_j w_j r_ij` where `r_ij` counts how
//! often algorithm `i` finished in position `j + 1`. Win counting is the
//! special case `w = (1, 0, ..., 0)`. Weights are selected by minimizing the
//! leave-one-out KL or TV loss over the monotone simplex.

use serde::Serialize;

use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::ranking::{BenchmarkSample, ProbVector, RankCountMatrix, WeightVector};

/// Floor applied to estimated probabilities before taking logarithms, so a
/// winner unseen in the remaining data yields a large finite loss instead of
/// an infinite one. Shared by the LOO losses, cross-validation, and KL risk
/// evaluation.
pub const PROB_FLOOR: f64 = 1e-6;

/// Grid resolution of the exhaustive first stage of [`simplex_minimize`].
pub const GRID_RESOLUTION: usize = 100;

/// Smallest refinement step of the second stage of [`simplex_minimize`].
pub const REFINE_MIN_STEP: f64 = 1e-6;

/// Win-count estimate: the fraction of datasets each algorithm won.
pub fn mle_win_prob(counts: &RankCountMatrix) -> ProbVector {
    let n = counts.n() as f64;
    normalized_prob((0..counts.m()).map(|i| counts.count(i, 0) as f64 / n).collect())
}

/// The weighted rank-count estimate `p_hat_i = (1/n) sum_j w_j r_ij`.
///
/// Valid for any simplex weight vector no longer than the tallied depth;
/// the result is itself a distribution because every rank column sums to `n`.
pub fn weighted_estimate(counts: &RankCountMatrix, w: &WeightVector) -> Result<ProbVector> {
    if w.len() > counts.depth() {
        return Err(Error::WeightsExceedDepth {
            len: w.len(),
            depth: counts.depth(),
        });
    }
    let n = counts.n() as f64;
    let values = (0..counts.m())
        .map(|i| {
            w.weights()
                .iter()
                .zip(counts.row(i))
                .map(|(wj, &c)| wj * c as f64)
                .sum::<f64>()
                / n
        })
        .collect();
    Ok(normalized_prob(values))
}

fn normalized_prob(mut values: Vec<f64>) -> ProbVector {
    let sum: f64 = values.iter().sum();
    for v in &mut values {
        *v /= sum;
    }
    ProbVector::new(values).expect("rank counts and simplex weights yield a distribution")
}

/// Precomputed per-sample state for fast leave-one-out loss evaluation.
///
/// Removing observation `i` subtracts exactly one count per rank position,
/// so the held-out estimate differs from the pooled one in at most `K`
/// coordinates. Observations are grouped — by winner for the KL loss, by
/// distinct rank prefix for the TV loss — which both collapses the per-sum
/// work and fixes a canonical accumulation order, so the loss is exactly
/// invariant to observation order.
struct LooContext {
    m: usize,
    n: usize,
    counts: RankCountMatrix,
    /// Distinct top-`k_max` prefixes in sorted order with multiplicities.
    prefix_groups: Vec<(Vec<usize>, u32)>,
}

impl LooContext {
    fn new(sample: &BenchmarkSample, k_max: usize) -> Self {
        let mut prefixes: Vec<Vec<usize>> = sample
            .observations()
            .iter()
            .map(|o| o.ranked()[..k_max].to_vec())
            .collect();
        prefixes.sort();
        let mut prefix_groups: Vec<(Vec<usize>, u32)> = Vec::new();
        for prefix in prefixes {
            match prefix_groups.last_mut() {
                Some((last, mult)) if *last == prefix => *mult += 1,
                _ => prefix_groups.push((prefix, 1)),
            }
        }
        Self {
            m: sample.m(),
            n: sample.n(),
            counts: sample.rank_counts(),
            prefix_groups,
        }
    }

    fn loss(&self, w: &[f64], kind: Divergence) -> f64 {
        let k = w.len();
        let nm1 = (self.n - 1) as f64;
        // s[j] = sum_t w_t r_jt, the unnormalized pooled estimate.
        let mut s = vec![0.0; self.m];
        for (j, sj) in s.iter_mut().enumerate() {
            let row = self.counts.row(j);
            *sj = w.iter().zip(row).map(|(wt, &c)| wt * c as f64).sum();
        }
        match kind {
            Divergence::Kl => {
                let mut terms = Vec::with_capacity(self.m);
                for (j, sj) in s.iter().enumerate() {
                    // The winner occupies position 0 of its own observation,
                    // so every dataset won by j sees the same held-out value.
                    let wins = self.counts.count(j, 0);
                    if wins == 0 {
                        continue;
                    }
                    let held_out = (sj - w[0]) / nm1;
                    terms.push(wins as f64 * held_out.max(PROB_FLOOR).ln());
                }
                -value_ordered_sum(&mut terms) / self.n as f64
            }
            Divergence::Tv => {
                let mut svals = s.clone();
                let base = value_ordered_sum(&mut svals) / nm1;
                let mut terms = Vec::with_capacity(self.prefix_groups.len());
                for (prefix, mult) in &self.prefix_groups {
                    let y = prefix[0];
                    // Start from sum_j |0 - b_j| = sum_j b_j and correct the
                    // coordinates this observation actually touches.
                    let mut acc = base;
                    for (pos, &a) in prefix.iter().take(k).enumerate() {
                        let pooled = s[a] / nm1;
                        let held_out = ((s[a] - w[pos]) / nm1).max(0.0);
                        let indicator = if a == y { 1.0 } else { 0.0 };
                        acc += (indicator - held_out).abs() - pooled;
                    }
                    terms.push(*mult as f64 * acc);
                }
                value_ordered_sum(&mut terms) / self.n as f64
            }
        }
    }
}

/// Sums after sorting by value, so the result depends only on the multiset
/// of terms. Keeps the loss bit-identical under algorithm relabeling, which
/// in turn keeps the solver's tie handling label-free.
fn value_ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Average held-out loss of the weighted estimator: each dataset is removed
/// in turn, the estimate is recomputed from the remaining `n - 1`, and the
/// removed dataset's winner is scored.
///
/// KL scores `-ln p_hat[-i]` at the held-out winner (floored at
/// [`PROB_FLOOR`]); TV scores the absolute gap between the held-out estimate
/// and the winner indicator. Held-out estimates are normalized by `n - 1` so
/// each is a proper distribution.
pub fn loo_loss(sample: &BenchmarkSample, w: &WeightVector, kind: Divergence) -> Result<f64> {
    if sample.n() < 2 {
        return Err(Error::LooNeedsTwo { n: sample.n() });
    }
    let depth = sample.effective_depth();
    if w.len() > depth {
        return Err(Error::WeightsExceedDepth {
            len: w.len(),
            depth,
        });
    }
    Ok(LooContext::new(sample, w.len()).loss(w.weights(), kind))
}

/// Outcome of leave-one-out weight selection.
#[derive(Debug, Clone, Serialize)]
pub struct LooFitResult {
    pub weights: WeightVector,
    pub loo_loss: f64,
    pub kind: Divergence,
    pub trace: SolverTrace,
}

/// Bookkeeping from [`simplex_minimize`]: objective evaluations spent and the
/// step size at which refinement stopped.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverTrace {
    pub evaluations: usize,
    pub final_resolution: f64,
}

/// Selects the weights in `{w in simplex_k : w_1 >= ... >= w_k}` minimizing
/// the leave-one-out loss.
///
/// `k` is the model order: how many leading ranks may carry weight. Orders
/// beyond 3 rarely help; callers default to `k = 3`.
pub fn fit_loo_weights(
    sample: &BenchmarkSample,
    k: usize,
    kind: Divergence,
) -> Result<LooFitResult> {
    if sample.n() < 2 {
        return Err(Error::LooNeedsTwo { n: sample.n() });
    }
    let max = sample.effective_depth().min(sample.m());
    if k < 1 || k > max {
        return Err(Error::InfeasibleOrder { k, max });
    }
    let ctx = LooContext::new(sample, k);
    let (weights, loss, trace) = simplex_minimize(|w| ctx.loss(w, kind), k, true)?;
    Ok(LooFitResult {
        weights,
        loo_loss: loss,
        kind,
        trace,
    })
}

/// Deterministic minimization over the k-simplex, optionally restricted to
/// non-increasing vectors.
///
/// Stage one scans an exhaustive grid at resolution 1/[`GRID_RESOLUTION`] in
/// decreasing lexicographic order, so exact ties resolve toward larger
/// leading weights. Stage two repeatedly shifts mass between coordinate
/// pairs, halving the step from the grid resolution down to
/// [`REFINE_MIN_STEP`] and projecting back onto the constraint set after
/// each move. For convex objectives the result is within solver tolerance of
/// the true optimum.
pub fn simplex_minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    k: usize,
    monotone: bool,
) -> Result<(WeightVector, f64, SolverTrace)> {
    if k < 1 {
        return Err(Error::InfeasibleOrder { k, max: 0 });
    }
    let mut evaluations = 0usize;

    // Stage 1: exhaustive grid.
    let mut best: Option<(Vec<f64>, f64)> = None;
    let scale = 1.0 / GRID_RESOLUTION as f64;
    for_each_composition(GRID_RESOLUTION, k, monotone, &mut |cells| {
        let w: Vec<f64> = cells.iter().map(|&c| c as f64 * scale).collect();
        let loss = objective(&w);
        evaluations += 1;
        if best.as_ref().is_none_or(|(_, b)| loss < *b) {
            best = Some((w, loss));
        }
    });
    let (mut w, mut best_loss) = best.expect("grid always contains at least one point");

    // Stage 2: pairwise mass transfers with step halving.
    let mut step = scale;
    while step >= REFINE_MIN_STEP {
        let mut improved = false;
        for from in 0..k {
            for to in 0..k {
                if from == to || w[from] < step {
                    continue;
                }
                let mut cand = w.clone();
                cand[from] -= step;
                cand[to] += step;
                if monotone {
                    isotonic_decreasing(&mut cand);
                }
                renormalize(&mut cand);
                let loss = objective(&cand);
                evaluations += 1;
                if loss < best_loss {
                    best_loss = loss;
                    w = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    let weights = WeightVector::new(w, monotone)?;
    Ok((
        weights,
        best_loss,
        SolverTrace {
            evaluations,
            final_resolution: step * 2.0,
        },
    ))
}

/// Visits every way to split `total` grid cells over `k` coordinates, in
/// decreasing lexicographic order; restricted to non-increasing splits when
/// `monotone` is set.
fn for_each_composition(
    total: usize,
    k: usize,
    monotone: bool,
    visit: &mut impl FnMut(&[usize]),
) {
    fn recurse(
        cells: &mut Vec<usize>,
        remaining: usize,
        k: usize,
        monotone: bool,
        visit: &mut impl FnMut(&[usize]),
    ) {
        let level = cells.len();
        let cap = if level == 0 {
            remaining
        } else if monotone {
            cells[level - 1].min(remaining)
        } else {
            remaining
        };
        if level == k - 1 {
            if remaining <= cap {
                cells.push(remaining);
                visit(cells);
                cells.pop();
            }
            return;
        }
        // Under the monotone cap, a level value v is viable only when the
        // remaining mass fits into the later coordinates: rem - v <= v * slots.
        let slots = k - level - 1;
        let floor = if monotone {
            remaining.div_ceil(slots + 1)
        } else {
            0
        };
        let mut v = cap;
        loop {
            cells.push(v);
            recurse(cells, remaining - v, k, monotone, visit);
            cells.pop();
            if v == floor {
                break;
            }
            v -= 1;
        }
    }
    let mut cells = Vec::with_capacity(k);
    recurse(&mut cells, total, k, monotone, visit);
}

/// L2 projection onto non-increasing vectors (pool adjacent violators).
fn isotonic_decreasing(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        let mut mean = x;
        let mut len = 1usize;
        while let Some(&(prev_mean, prev_len)) = blocks.last() {
            if prev_mean < mean {
                blocks.pop();
                mean = (mean * len as f64 + prev_mean * prev_len as f64)
                    / (len + prev_len) as f64;
                len += prev_len;
            } else {
                break;
            }
        }
        blocks.push((mean, len));
    }
    let mut idx = 0;
    for (mean, len) in blocks {
        for _ in 0..len {
            v[idx] = mean.max(0.0);
            idx += 1;
        }
    }
}

fn renormalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
}
