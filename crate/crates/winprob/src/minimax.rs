//! Data-independent weight selection: worst-case expected-TV guarantees for
//! the weighted rank-count estimator, and the numeric search for the weights
//! that minimize them.
//!
//! The two-rank estimator `(w r^(1) + (1-w) r^(2)) / n` admits a closed-form
//! bound and optimal weight. The general top-K bound is the value of a
//! concave maximization over the K-simplex, solved here by projected
//! gradient ascent; the outer minimization over feasible weights is a grid
//! scan plus coordinate refinement.

use crate::error::{Error, Result};
use crate::ranking::WeightVector;

/// Worst-case expected TV of plain win counting: `sqrt(m / n)`.
pub fn mle_worst_case_bound(m: usize, n: usize) -> f64 {
    (m as f64 / n as f64).sqrt()
}

/// The weight minimizing [`two_rank_bound`]: `1 - 1/(2n + 2)`.
pub fn two_rank_weight(n: usize) -> f64 {
    1.0 - 1.0 / (2.0 * n as f64 + 2.0)
}

/// Worst-case expected TV of the two-rank estimator at weight `w`:
/// `sqrt(m) * sqrt(2(1-w)^2 + (w^2 + (1-w)^2)/n)`.
pub fn two_rank_bound(m: usize, n: usize, w: f64) -> f64 {
    let n = n as f64;
    let rest = 1.0 - w;
    (m as f64).sqrt() * (2.0 * rest * rest + (w * w + rest * rest) / n).sqrt()
}

/// Smallest leading weight for which the top-K bound's inner maximization is
/// a convex program: `(8n - sqrt(8n)) / (8n - 1)`.
pub fn min_leading_weight(n: usize) -> f64 {
    let e = 8.0 * n as f64;
    (e - e.sqrt()) / (e - 1.0)
}

const INNER_TOL: f64 = 1e-10;
const INNER_MAX_ITER: usize = 10_000;

/// Worst-case expected TV of the top-K estimator at monotone weights `w`.
///
/// Requires `w` non-increasing with `w_1 >=` [`min_leading_weight`]`(n)`,
/// which makes the inner objective concave over the simplex, so the ascent's
/// stationary point is the global maximum.
pub fn top_k_bound(m: usize, n: usize, w: &WeightVector) -> Result<f64> {
    let k = w.len();
    check_feasible(m, n, w)?;
    let obj = InnerObjective::new(m, n, w.weights());
    if k == 1 {
        return Ok(obj.value(&[1.0]));
    }

    let mut t = vec![1.0 / k as f64; k];
    let mut value = obj.value(&t);
    for _ in 0..INNER_MAX_ITER {
        let grad = obj.gradient(&t);
        // Backtracking: shrink the step until the projected move improves.
        let mut eta = 1.0;
        let mut moved = false;
        while eta > 1e-16 {
            let cand: Vec<f64> = t.iter().zip(&grad).map(|(ti, gi)| ti + eta * gi).collect();
            let cand = project_onto_simplex(&cand);
            let cand_value = obj.value(&cand);
            if cand_value > value {
                let gain = cand_value - value;
                t = cand;
                value = cand_value;
                moved = true;
                if gain < INNER_TOL {
                    return Ok(value);
                }
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(value)
}

struct InnerObjective {
    n: f64,
    tail_size: f64,
    w: Vec<f64>,
    w2_sq: f64,
}

impl InnerObjective {
    fn new(m: usize, n: usize, w: &[f64]) -> Self {
        let w2 = if w.len() >= 2 { w[1] } else { 0.0 };
        Self {
            n: n as f64,
            tail_size: (m - w.len() + 1) as f64,
            w: w.to_vec(),
            w2_sq: w2 * w2,
        }
    }

    /// Square-root arguments per coordinate; all are positive whenever
    /// `w_2 > 0` since they are bounded below by `w_2^2 / n`.
    fn terms(&self, t: &[f64]) -> Vec<f64> {
        let k = t.len();
        let w1 = self.w[0];
        let mut args = Vec::with_capacity(k);
        for j in 0..k - 1 {
            let bias = (1.0 - w1) * t[j] - self.w[j + 1];
            args.push(bias * bias + (w1 * w1 * t[j] + self.w2_sq) / self.n);
        }
        let tk = t[k - 1];
        let bias = (1.0 - w1) * tk;
        args.push(
            bias * bias + self.tail_size / self.n * (w1 * w1 * tk + self.w2_sq * self.tail_size),
        );
        args
    }

    fn value(&self, t: &[f64]) -> f64 {
        self.terms(t).iter().map(|a| a.sqrt()).sum()
    }

    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        let k = t.len();
        let w1 = self.w[0];
        let args = self.terms(t);
        let mut grad = Vec::with_capacity(k);
        for j in 0..k - 1 {
            let d = 2.0 * (1.0 - w1) * ((1.0 - w1) * t[j] - self.w[j + 1]) + w1 * w1 / self.n;
            grad.push(d / (2.0 * args[j].sqrt().max(1e-12)));
        }
        let d = 2.0 * (1.0 - w1) * (1.0 - w1) * t[k - 1] + self.tail_size * w1 * w1 / self.n;
        grad.push(d / (2.0 * args[k - 1].sqrt().max(1e-12)));
        grad
    }
}

/// Euclidean projection onto the probability simplex.
fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut running = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        running += x;
        let candidate = (running - 1.0) / (i + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn check_feasible(m: usize, n: usize, w: &WeightVector) -> Result<()> {
    let k = w.len();
    if k < 1 || k > m {
        return Err(Error::InfeasibleWeights {
            reason: format!("model order {k} must lie in 1..={m}"),
        });
    }
    let ws = w.weights();
    for j in 1..k {
        if ws[j] > ws[j - 1] + 1e-12 {
            return Err(Error::InfeasibleWeights {
                reason: format!(
                    "weights must be non-increasing, violated at index {j} ({} > {})",
                    ws[j],
                    ws[j - 1]
                ),
            });
        }
    }
    let floor = min_leading_weight(n);
    if ws[0] < floor - 1e-12 {
        return Err(Error::InfeasibleWeights {
            reason: format!(
                "leading weight {} below the concavity threshold {floor} for n = {n}",
                ws[0]
            ),
        });
    }
    Ok(())
}

/// Resolution of the outer grid over feasible weights.
pub const OUTER_RESOLUTION: usize = 200;

const OUTER_MIN_STEP: f64 = 1e-5;

/// Searches the feasible monotone weights for the smallest top-K bound.
///
/// Grid over the leading weight in `[min_leading_weight(n), 1]` and over the
/// split of the leftover mass, both at 1/[`OUTER_RESOLUTION`]; the best grid
/// point is then refined by pairwise mass transfers with step halving down
/// to 1e-5. Returns the winning weights and their bound.
pub fn optimal_top_k_weights(m: usize, n: usize, k: usize) -> Result<(WeightVector, f64)> {
    if m < 2 {
        return Err(Error::TooFewAlgorithms { m });
    }
    if k < 1 || k > m {
        return Err(Error::InfeasibleOrder { k, max: m });
    }
    let floor = min_leading_weight(n);
    let score = |w: &[f64]| -> Option<f64> {
        let wv = WeightVector::new(w.to_vec(), true).ok()?;
        top_k_bound(m, n, &wv).ok()
    };

    // Win counting is always feasible, so the search starts from it.
    let mut best: Vec<f64> = {
        let mut w = vec![0.0; k];
        w[0] = 1.0;
        w
    };
    let mut best_bound = score(&best).expect("the win-counting point is feasible");

    let res = OUTER_RESOLUTION as f64;
    let mut lead = 1.0;
    while lead >= floor {
        for tail in tail_splits(1.0 - lead, k, lead) {
            let mut w = Vec::with_capacity(k);
            w.push(lead);
            w.extend(tail);
            if let Some(bound) = score(&w) {
                if bound < best_bound {
                    best_bound = bound;
                    best = w;
                }
            }
        }
        // Step down the grid, finishing exactly at the feasibility floor.
        let next = lead - 1.0 / res;
        lead = if next < floor && lead > floor {
            floor
        } else {
            next
        };
    }

    // Coordinate refinement, skipping moves that leave the feasible set.
    let mut step = 1.0 / res;
    while step >= OUTER_MIN_STEP {
        let mut improved = false;
        for from in 0..k {
            for to in 0..k {
                if from == to || best[from] < step {
                    continue;
                }
                let mut cand = best.clone();
                cand[from] -= step;
                cand[to] += step;
                if cand[0] < floor {
                    continue;
                }
                if cand.windows(2).any(|p| p[1] > p[0]) {
                    continue;
                }
                if let Some(bound) = score(&cand) {
                    if bound < best_bound {
                        best_bound = bound;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    Ok((WeightVector::new(best, true)?, best_bound))
}

/// Monotone splits of `mass` over `k - 1` trailing weights, each no larger
/// than `cap`, on the outer grid.
fn tail_splits(mass: f64, k: usize, cap: f64) -> Vec<Vec<f64>> {
    if k == 1 {
        return if mass.abs() < 1e-9 {
            vec![vec![]]
        } else {
            vec![]
        };
    }
    if k == 2 {
        return if mass <= cap + 1e-12 {
            vec![vec![mass]]
        } else {
            vec![]
        };
    }
    // Enumerate grid compositions of the rounded mass; the rounding slack is
    // folded into the largest trailing weight.
    let cells = (mass * OUTER_RESOLUTION as f64).round() as usize;
    let slack = mass - cells as f64 / OUTER_RESOLUTION as f64;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k - 1);
    fn recurse(
        cells_left: usize,
        slots: usize,
        max_cells: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if slots == 1 {
            if cells_left <= max_cells {
                current.push(cells_left);
                out.push(current.clone());
                current.pop();
            }
            return;
        }
        let floor = cells_left.div_ceil(slots);
        let cap = max_cells.min(cells_left);
        let mut v = cap;
        while v >= floor {
            current.push(v);
            recurse(cells_left - v, slots - 1, v, current, out);
            current.pop();
            if v == 0 {
                break;
            }
            v -= 1;
        }
    }
    let mut raw = Vec::new();
    recurse(cells, k - 1, cells, &mut current, &mut raw);
    let res = OUTER_RESOLUTION as f64;
    for split in raw {
        let mut tail: Vec<f64> = split.iter().map(|&c| c as f64 / res).collect();
        tail[0] += slack;
        if tail[0] <= cap + 1e-12 && (1..tail.len()).all(|i| tail[i] <= tail[i - 1] + 1e-12) {
            out.push(tail);
        }
    }
    out
}
