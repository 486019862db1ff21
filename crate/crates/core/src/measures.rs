//! Uniform empirical measures on the line and their W∞ transport distance.
//!
//! On the real line the optimal W∞ coupling between two uniform measures of
//! equal size pairs points by rank, so every distance here reduces to a sort.
//! Supports are kept in caller order; the sort happens inside each operation
//! and the resulting pairing is handed back as an explicit permutation.

use crate::error::{ensure_same_len, RecoveryError, Result};

/// Largest support size accepted by [`winf_bruteforce`].
pub const BRUTEFORCE_MAX: usize = 8;

/// A uniform probability measure `(1/n) Σ δ_{x_i}` on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMeasure1D {
    support: Vec<f64>,
}

impl SparseMeasure1D {
    /// Builds a measure from its support points. Duplicates are allowed.
    pub fn new(support: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(RecoveryError::InvalidArgument(
                "a measure needs at least one support point".into(),
            ));
        }
        if let Some(bad) = support.iter().find(|x| !x.is_finite()) {
            return Err(RecoveryError::InvalidArgument(format!(
                "support point {bad} is not finite"
            )));
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn into_support(self) -> Vec<f64> {
        self.support
    }

    /// True when no two support points coincide.
    pub fn is_distinct(&self) -> bool {
        let order = stable_argsort(&self.support);
        order
            .windows(2)
            .all(|w| self.support[w[0]] != self.support[w[1]])
    }
}

/// Rank pairing between two measures of equal size.
///
/// `permutation[i]` is the index of the point of the first measure that is
/// transported onto point `i` of the second measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub permutation: Vec<usize>,
    pub max_deviation: f64,
}

/// Minimum distance between two distinct support positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationInfo {
    pub min_separation: f64,
}

impl SeparationInfo {
    pub fn is_distinct(&self) -> bool {
        self.min_separation > 0.0
    }
}

/// Indices that sort `values` ascending; ties keep their original order.
pub(crate) fn stable_argsort(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    order
}

/// Pairs `a` onto `b` by rank and reports the largest displacement.
pub fn match_particles(a: &SparseMeasure1D, b: &SparseMeasure1D) -> Result<MatchResult> {
    ensure_same_len(a.len(), b.len())?;
    let order_a = stable_argsort(a.support());
    let order_b = stable_argsort(b.support());
    let mut permutation = vec![0; b.len()];
    let mut max_deviation = 0.0_f64;
    for (&ia, &ib) in order_a.iter().zip(&order_b) {
        permutation[ib] = ia;
        max_deviation = max_deviation.max((a.support[ia] - b.support[ib]).abs());
    }
    Ok(MatchResult {
        permutation,
        max_deviation,
    })
}

/// W∞ distance between two uniform measures of the same size.
pub fn winf_distance(a: &SparseMeasure1D, b: &SparseMeasure1D) -> Result<f64> {
    match_particles(a, b).map(|m| m.max_deviation)
}

/// W∞ distance by exhaustive search over all couplings. Refuses `n > 8`.
pub fn winf_bruteforce(a: &SparseMeasure1D, b: &SparseMeasure1D) -> Result<f64> {
    ensure_same_len(a.len(), b.len())?;
    let n = a.len();
    if n > BRUTEFORCE_MAX {
        return Err(RecoveryError::TooLarge {
            n,
            max: BRUTEFORCE_MAX,
        });
    }
    let cost = |perm: &[usize]| {
        perm.iter()
            .enumerate()
            .map(|(i, &p)| (a.support[p] - b.support[i]).abs())
            .fold(0.0_f64, f64::max)
    };

    // Heap's algorithm, iterative form.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut best = cost(&perm);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(cost(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Smallest gap between any two support points (zero with duplicates).
pub fn min_separation(a: &SparseMeasure1D) -> Result<SeparationInfo> {
    if a.len() < 2 {
        return Err(RecoveryError::InvalidArgument(
            "separation needs at least two support points".into(),
        ));
    }
    let order = stable_argsort(a.support());
    let min_separation = order
        .windows(2)
        .map(|w| a.support[w[1]] - a.support[w[0]])
        .fold(f64::INFINITY, f64::min);
    Ok(SeparationInfo { min_separation })
}
