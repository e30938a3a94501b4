//! Rankings, benchmark samples, and rank-count statistics.
//!
//! A benchmark run over `n` datasets produces one ranking per dataset. Each
//! ranking is stored position-first: entry `j` holds the algorithm that
//! finished in place `j + 1`. Rankings may be full permutations of the
//! roster or top-K prefixes; ties are rejected outright.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for the unit-sum invariant of [`ProbVector`] and [`WeightVector`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// One dataset's ranking: `ranked()[j]` is the algorithm index placed `j+1`-th.
///
/// Holds a full permutation when its depth equals the roster size, or a
/// top-K prefix otherwise. Entries are always distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RankingObservation {
    ordered: Vec<usize>,
}

impl RankingObservation {
    /// Builds an observation from a position-to-algorithm list.
    pub fn new(ordered: Vec<usize>) -> Result<Self> {
        if ordered.is_empty() {
            return Err(Error::EmptyObservation);
        }
        let mut seen = vec![false; ordered.iter().max().copied().unwrap_or(0) + 1];
        for &a in &ordered {
            if seen[a] {
                return Err(Error::DuplicateAlgorithm { index: a });
            }
            seen[a] = true;
        }
        Ok(Self { ordered })
    }

    /// Number of ranked positions (K).
    pub fn depth(&self) -> usize {
        self.ordered.len()
    }

    /// The top-ranked algorithm.
    pub fn winner(&self) -> usize {
        self.ordered[0]
    }

    /// Position-to-algorithm view.
    pub fn ranked(&self) -> &[usize] {
        &self.ordered
    }
}

/// A roster of `m` named algorithms and the `n` rankings observed for them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSample {
    algorithm_names: Vec<String>,
    observations: Vec<RankingObservation>,
}

impl BenchmarkSample {
    pub fn new(
        algorithm_names: Vec<String>,
        observations: Vec<RankingObservation>,
    ) -> Result<Self> {
        let m = algorithm_names.len();
        if m < 2 {
            return Err(Error::TooFewAlgorithms { m });
        }
        for (i, name) in algorithm_names.iter().enumerate() {
            if algorithm_names[..i].contains(name) {
                return Err(Error::DuplicateName { name: name.clone() });
            }
        }
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        for obs in &observations {
            for &a in obs.ranked() {
                if a >= m {
                    return Err(Error::IndexOutOfRange { index: a, m });
                }
            }
        }
        Ok(Self {
            algorithm_names,
            observations,
        })
    }

    /// Number of algorithms in the roster.
    pub fn m(&self) -> usize {
        self.algorithm_names.len()
    }

    /// Number of observed datasets.
    pub fn n(&self) -> usize {
        self.observations.len()
    }

    /// Minimum ranking depth over all observations.
    pub fn effective_depth(&self) -> usize {
        self.observations
            .iter()
            .map(RankingObservation::depth)
            .min()
            .expect("samples are never empty")
    }

    pub fn algorithm_names(&self) -> &[String] {
        &self.algorithm_names
    }

    pub fn observations(&self) -> &[RankingObservation] {
        &self.observations
    }

    /// Tallies how often each algorithm finished in each of the first
    /// `effective_depth()` positions. Every column of the result sums to `n`.
    pub fn rank_counts(&self) -> RankCountMatrix {
        self.tally(None)
    }

    /// Rank counts with observation `exclude` removed; columns sum to `n - 1`.
    pub fn rank_counts_excluding(&self, exclude: usize) -> Result<RankCountMatrix> {
        if exclude >= self.n() {
            return Err(Error::ObservationOutOfRange {
                index: exclude,
                n: self.n(),
            });
        }
        Ok(self.tally(Some(exclude)))
    }

    fn tally(&self, exclude: Option<usize>) -> RankCountMatrix {
        let depth = self.effective_depth();
        let mut counts = vec![vec![0u32; depth]; self.m()];
        let mut n = 0;
        for (i, obs) in self.observations.iter().enumerate() {
            if exclude == Some(i) {
                continue;
            }
            n += 1;
            for (pos, &alg) in obs.ranked().iter().take(depth).enumerate() {
                counts[alg][pos] += 1;
            }
        }
        RankCountMatrix { counts, n }
    }

    /// The sub-sample made of the observations at `indices` (in that order).
    pub fn subsample(&self, indices: &[usize]) -> Result<Self> {
        let mut observations = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n() {
                return Err(Error::ObservationOutOfRange {
                    index: i,
                    n: self.n(),
                });
            }
            observations.push(self.observations[i].clone());
        }
        Self::new(self.algorithm_names.clone(), observations)
    }
}

/// Count of `j`-th place finishes per algorithm: `count(i, j)` is how many
/// datasets ranked algorithm `i` in position `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankCountMatrix {
    counts: Vec<Vec<u32>>,
    n: usize,
}

impl RankCountMatrix {
    pub fn count(&self, algorithm: usize, position: usize) -> u32 {
        self.counts[algorithm][position]
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// Number of rank positions tallied.
    pub fn depth(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// Sample size behind the tallies; every column sums to this.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, algorithm: usize) -> &[u32] {
        &self.counts[algorithm]
    }

    /// First-place counts (one entry per algorithm).
    pub fn wins(&self) -> Vec<u32> {
        self.counts.iter().map(|row| row[0]).collect()
    }
}

/// A point on the m-simplex: nonnegative entries summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    values: Vec<f64>,
}

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: SIMPLEX_TOL,
            });
        }
        Ok(Self { values })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            values: vec![1.0 / m as f64; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Indices and values of the `k` largest entries, ties broken by index.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .expect("entries are finite")
                .then(a.cmp(&b))
        });
        order
            .into_iter()
            .take(k)
            .map(|i| (i, self.values[i]))
            .collect()
    }
}

/// Rank weights on the simplex, optionally constrained to be non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    monotone: bool,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, monotone: bool) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: SIMPLEX_TOL,
            });
        }
        if monotone {
            for index in 1..weights.len() {
                if weights[index] > weights[index - 1] + SIMPLEX_TOL {
                    return Err(Error::NotMonotone { index });
                }
            }
        }
        Ok(Self { weights, monotone })
    }

    /// The win-counting weights `(1, 0, ..., 0)`.
    pub fn first_rank_only(k: usize) -> Self {
        let mut weights = vec![0.0; k.max(1)];
        weights[0] = 1.0;
        Self {
            weights,
            monotone: true,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn monotone(&self) -> bool {
        self.monotone
    }
}
