//! Total variation and Kullback-Leibler divergence between win-probability
//! vectors.
//!
//! Total variation here is the unhalved sum of absolute differences, so it
//! ranges over [0, 2]. KL uses natural logarithms and is `+inf` whenever the
//! estimate assigns zero mass to an outcome the reference does not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ranking::ProbVector;

/// Which divergence a loss or risk is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Divergence {
    Kl,
    Tv,
}

impl Divergence {
    pub fn label(self) -> &'static str {
        match self {
            Divergence::Kl => "kl",
            Divergence::Tv => "tv",
        }
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `sum_j |p_j - q_j|`, the unhalved total variation.
pub fn total_variation(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `sum_j p_j ln(p_j / q_j)` with `0 ln 0 = 0`; `+inf` if some `p_j > 0` has
/// `q_j = 0`.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p, q)?;
    let mut total = 0.0;
    for (&pj, &qj) in p.values().iter().zip(q.values()) {
        if pj == 0.0 {
            continue;
        }
        if qj == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += pj * (pj / qj).ln();
    }
    Ok(total)
}

/// KL against `q` with entries floored at `eps` (not renormalized). Keeps
/// risks finite for estimators that assign zero mass.
pub fn kl_divergence_floored(p: &ProbVector, q: &ProbVector, eps: f64) -> Result<f64> {
    check_lengths(p, q)?;
    let mut total = 0.0;
    for (&pj, &qj) in p.values().iter().zip(q.values()) {
        if pj == 0.0 {
            continue;
        }
        total += pj * (pj / qj.max(eps)).ln();
    }
    Ok(total)
}

fn check_lengths(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        let p = pv(&[0.5, 0.3, 0.2]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        let a = pv(&[1.0, 0.0]);
        let b = pv(&[0.0, 1.0]);
        assert_eq!(total_variation(&a, &b).unwrap(), 2.0);
        let q = pv(&[0.4, 0.4, 0.2]);
        assert!((total_variation(&p, &q).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn kl_examples() {
        let p = pv(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        // All mass where the estimate halves it: ln 2.
        let a = pv(&[1.0, 0.0]);
        let b = pv(&[0.5, 0.5]);
        assert!((kl_divergence(&a, &b).unwrap() - 0.693_147_180_559_945_3).abs() < 1e-15);
        // Reference mass where the estimate has none: unbounded.
        assert!(kl_divergence(&p, &a).unwrap().is_infinite());
    }

    #[test]
    fn floored_kl_is_finite() {
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[1.0, 0.0]);
        let d = kl_divergence_floored(&p, &q, 1e-6).unwrap();
        assert!(d.is_finite());
        // Flooring only the zero entry: 0.5 ln(0.5/1) + 0.5 ln(0.5/1e-6).
        let expect = 0.5 * (0.5f64).ln() + 0.5 * (0.5f64 / 1e-6).ln();
        assert!((d - expect).abs() < 1e-12);
        // No effect when q is already above the floor.
        let r = pv(&[0.6, 0.4]);
        assert_eq!(
            kl_divergence(&p, &r).unwrap(),
            kl_divergence_floored(&p, &r, 1e-6).unwrap()
        );
    }

    #[test]
    fn length_mismatch_rejected() {
        let p = pv(&[1.0]);
        let q = pv(&[0.5, 0.5]);
        assert!(matches!(
            total_variation(&p, &q),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            kl_divergence(&p, &q),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
