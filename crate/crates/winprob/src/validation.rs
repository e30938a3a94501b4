//! Real-data evaluation: k-fold cross-validation of the estimation methods
//! and paired significance reporting on the fold losses.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use crate::error::{Error, Result};
use crate::estimators::PROB_FLOOR;
use crate::methods::Method;
use crate::ranking::BenchmarkSample;

/// Which paired test produces the reported p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignificanceTest {
    /// Two-sided paired Student t-test on fold losses.
    PairedT,
    /// Exact sign-permutation test on fold loss differences.
    SignPermutation,
}

/// One method's cross-validation record.
#[derive(Debug, Clone, Serialize)]
pub struct MethodCv {
    pub label: String,
    pub fold_losses: Vec<f64>,
    pub mean_loss: f64,
}

/// p-value of a method against the report's reference method.
#[derive(Debug, Clone, Serialize)]
pub struct PairwisePValue {
    pub label: String,
    pub p_value: f64,
}

/// Cross-validation outcome: per-fold and mean held-out cross-entropy per
/// method, plus paired p-values against the first (reference) method.
#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub significance: SignificanceTest,
    pub reference: String,
    pub methods: Vec<MethodCv>,
    pub p_values: Vec<PairwisePValue>,
}

/// Seeded k-fold split of `0..n`: a shuffled partition whose fold sizes
/// differ by at most one.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::BadFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Cross-validates each method: fit on the datasets outside a fold, then
/// score `-mean ln p_hat(winner)` over the held-out fold, with estimates
/// floored at [`PROB_FLOOR`]. The first method is the reference for the
/// paired p-values.
pub fn kfold_cv(
    sample: &BenchmarkSample,
    k: usize,
    methods: &[Method],
    seed: u64,
    significance: SignificanceTest,
) -> Result<CvReport> {
    kfold_cv_with_epsilon(sample, k, methods, seed, significance, PROB_FLOOR)
}

/// [`kfold_cv`] with an explicit smoothing floor for the held-out losses.
pub fn kfold_cv_with_epsilon(
    sample: &BenchmarkSample,
    k: usize,
    methods: &[Method],
    seed: u64,
    significance: SignificanceTest,
    epsilon: f64,
) -> Result<CvReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!(
            "smoothing floor must lie in (0, 1), got {epsilon}"
        )));
    }
    let n = sample.n();
    let folds = fold_indices(n, k, seed)?;
    let mut per_method: Vec<Vec<f64>> = vec![Vec::with_capacity(k); methods.len()];

    for fold in &folds {
        let train_idx: Vec<usize> = (0..n).filter(|i| !fold.contains(i)).collect();
        let train = sample.subsample(&train_idx)?;
        for (mi, method) in methods.iter().enumerate() {
            let phat = method.win_prob(&train).map_err(|e| Error::MethodFailed {
                method: method.label(),
                source: Box::new(e),
            })?;
            let loss = fold
                .iter()
                .map(|&i| {
                    let winner = sample.observations()[i].winner();
                    -phat.get(winner).max(epsilon).ln()
                })
                .sum::<f64>()
                / fold.len() as f64;
            per_method[mi].push(loss);
        }
    }

    let methods_cv: Vec<MethodCv> = methods
        .iter()
        .zip(per_method)
        .map(|(method, fold_losses)| {
            let mean_loss = fold_losses.iter().sum::<f64>() / fold_losses.len() as f64;
            MethodCv {
                label: method.label(),
                fold_losses,
                mean_loss,
            }
        })
        .collect();

    let reference = methods_cv[0].label.clone();
    let p_values = methods_cv[1..]
        .iter()
        .map(|cv| {
            let p = match significance {
                SignificanceTest::PairedT => {
                    paired_t_pvalue(&methods_cv[0].fold_losses, &cv.fold_losses)?
                }
                SignificanceTest::SignPermutation => {
                    sign_permutation_pvalue(&methods_cv[0].fold_losses, &cv.fold_losses)?
                }
            };
            Ok(PairwisePValue {
                label: cv.label.clone(),
                p_value: p,
            })
        })
        .collect::<Result<_>>()?;

    Ok(CvReport {
        k,
        seed,
        epsilon,
        significance,
        reference,
        methods: methods_cv,
        p_values,
    })
}

/// Two-sided paired t-test on the per-fold differences.
///
/// Returns 1 when the losses are identical; by convention 0 when the
/// differences are constant but nonzero (zero variance).
pub fn paired_t_pvalue(a: &[f64], b: &[f64]) -> Result<f64> {
    let diffs = paired_diffs(a, b)?;
    let k = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 { 1.0 } else { 0.0 });
    }
    let t = mean / (var / k).sqrt();
    let dist = StudentsT::new(0.0, 1.0, k - 1.0).expect("k >= 2 gives positive dof");
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

/// Paired sign-permutation test: the fraction of sign assignments of the
/// differences whose absolute sum reaches the observed one. Exact for up to
/// 20 pairs, seeded Monte Carlo above that.
pub fn sign_permutation_pvalue(a: &[f64], b: &[f64]) -> Result<f64> {
    let diffs = paired_diffs(a, b)?;
    let k = diffs.len();
    let observed = diffs.iter().sum::<f64>().abs();
    if k <= 20 {
        let total = 1u64 << k;
        let mut count = 0u64;
        for mask in 0..total {
            let sum: f64 = diffs
                .iter()
                .enumerate()
                .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
                .sum();
            if sum.abs() >= observed - 1e-12 {
                count += 1;
            }
        }
        Ok(count as f64 / total as f64)
    } else {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5163_7065_726d); // fixed stream
        let draws = 100_000;
        let mut count = 0u64;
        for _ in 0..draws {
            let sum: f64 = diffs
                .iter()
                .map(|d| if rng.random::<bool>() { -d } else { *d })
                .sum();
            if sum.abs() >= observed - 1e-12 {
                count += 1;
            }
        }
        Ok(count as f64 / draws as f64)
    }
}

fn paired_diffs(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "paired tests need at least two folds, got {}",
            a.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// One-sided binomial sign test: probability of at least `successes` heads
/// in `trials` fair flips.
pub fn sign_test_pvalue(successes: usize, trials: usize) -> f64 {
    if trials == 0 || successes == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, trials as u64).expect("valid binomial");
    dist.sf(successes as u64 - 1).clamp(0.0, 1.0)
}
