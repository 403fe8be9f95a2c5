//! Sampling k-tuples from an empirical measure, with and without
//! replacement, and the total variation gap between the two.
//!
//! For a class of `N` particles, drawing `k` positions with replacement
//! gives the k-fold product of the empirical measure, while drawing `k`
//! distinct positions gives the k-tuple measure. Their total variation
//! distance is at most `2 (N^k - (N)_k) / N^k <= k(k-1)/N`, which is what
//! [`tv_bound_check`] verifies exhaustively.

use std::collections::BTreeMap;

use itertools::Itertools;
use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::law::JointLaw;
use crate::measure::FiniteMeasure;
use crate::system::mixed_radix;

use super::is_multi_exchangeable;

/// The falling factorial `(m)_k = m (m-1) ... (m-k+1)`, exactly.
///
/// `(m)_0 = 1` by the empty-product convention; errors if `k > m`.
pub fn falling_factorial(m: u64, k: u64) -> Result<BigUint> {
    if k > m {
        return Err(Error::TupleTooLong {
            k: k as usize,
            max: m as usize,
        });
    }
    let mut out = BigUint::one();
    for j in 0..k {
        out *= BigUint::from(m - j);
    }
    Ok(out)
}

/// All k-tuples over an alphabet of the given size, in lexicographic order.
fn tuple_grid(alphabet_len: usize, k: usize) -> Vec<Vec<usize>> {
    mixed_radix(vec![alphabet_len; k]).collect()
}

/// The k-fold product of a frequency vector: sampling `k` symbols with
/// replacement. Points cover the whole tuple grid.
pub fn k_product_measure(freqs: &[BigRational], k: usize) -> Result<FiniteMeasure> {
    if k == 0 {
        return Err(Error::ZeroTupleLength);
    }
    let points = tuple_grid(freqs.len(), k);
    let weights = points
        .iter()
        .map(|point| point.iter().map(|&s| &freqs[s]).product())
        .collect();
    FiniteMeasure::new(points, weights)
}

/// The k-tuple measure of a state list: sampling `k` *distinct* particle
/// positions, order kept. Points cover the whole tuple grid.
///
/// Errors if `k` is zero or exceeds the number of particles.
pub fn k_distinct_tuple_measure(
    states: &[usize],
    alphabet_len: usize,
    k: usize,
) -> Result<FiniteMeasure> {
    if k == 0 {
        return Err(Error::ZeroTupleLength);
    }
    if k > states.len() {
        return Err(Error::TupleTooLong {
            k,
            max: states.len(),
        });
    }
    for &s in states {
        if s >= alphabet_len {
            return Err(Error::InvalidConfiguration(format!(
                "state index {s} outside alphabet of size {alphabet_len}"
            )));
        }
    }
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for positions in (0..states.len()).permutations(k) {
        let tuple: Vec<usize> = positions.iter().map(|&p| states[p]).collect();
        *counts.entry(tuple).or_insert(0) += 1;
    }
    let denominator = falling_factorial(states.len() as u64, k as u64)?;
    let denominator = BigRational::from_integer(BigInt::from(denominator));
    let points = tuple_grid(alphabet_len, k);
    let weights = points
        .iter()
        .map(|point| {
            BigRational::from_integer(BigInt::from(counts.get(point).copied().unwrap_or(0)))
                / &denominator
        })
        .collect();
    FiniteMeasure::new(points, weights)
}

/// Total variation norm of the difference of two measures on the same
/// ordered point set: the L1 mass `sum_p |mu(p) - nu(p)|`.
pub fn tv_norm(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<BigRational> {
    if mu.points != nu.points {
        return Err(Error::SpaceMismatch);
    }
    Ok(mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Result of exhaustively comparing with/without-replacement sampling for
/// one `(N, k, alphabet)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TvBoundReport {
    pub n: usize,
    pub k: usize,
    pub alphabet_len: usize,
    /// Largest total variation gap over every multiset of `N` states.
    pub worst_tv: BigRational,
    /// `2 (N^k - (N)_k) / N^k`.
    pub intermediate_bound: BigRational,
    /// `k (k-1) / N`.
    pub final_bound: BigRational,
    /// Worst gap as a fraction of the intermediate bound (zero bound: 0).
    pub worst_ratio: BigRational,
    pub holds: bool,
}

/// Checks `tv <= 2 (N^k - (N)_k)/N^k <= k(k-1)/N` for *every* multiset of
/// `n` states over the alphabet.
pub fn tv_bound_check(n: usize, k: usize, alphabet_len: usize) -> Result<TvBoundReport> {
    if k == 0 {
        return Err(Error::ZeroTupleLength);
    }
    if k > n {
        return Err(Error::TupleTooLong { k, max: n });
    }
    if alphabet_len == 0 {
        return Err(Error::InvalidShape("empty alphabet".into()));
    }
    let n_to_k = BigUint::from(n).pow(k as u32);
    let fallen = falling_factorial(n as u64, k as u64)?;
    let intermediate_bound = BigRational::new(
        BigInt::from(2u32) * BigInt::from(n_to_k.clone() - fallen),
        BigInt::from(n_to_k),
    );
    let final_bound = BigRational::new(BigInt::from(k * (k - 1)), BigInt::from(n));

    let mut worst_tv = BigRational::zero();
    for multiset in (0..alphabet_len).combinations_with_replacement(n) {
        // The two measures depend on the states only through their counts,
        // so one representative ordering per multiset suffices.
        let mut freqs = vec![BigRational::zero(); alphabet_len];
        for &s in &multiset {
            freqs[s] += BigRational::new(BigInt::one(), BigInt::from(n));
        }
        let with_replacement = k_product_measure(&freqs, k)?;
        let without_replacement = k_distinct_tuple_measure(&multiset, alphabet_len, k)?;
        let gap = tv_norm(&with_replacement, &without_replacement)?;
        if gap > worst_tv {
            worst_tv = gap;
        }
    }
    let worst_ratio = if intermediate_bound.is_zero() {
        BigRational::zero()
    } else {
        &worst_tv / &intermediate_bound
    };
    let holds = worst_tv <= intermediate_bound && intermediate_bound <= final_bound;
    Ok(TvBoundReport {
        n,
        k,
        alphabet_len,
        worst_tv,
        intermediate_bound,
        final_bound,
        worst_ratio,
        holds,
    })
}

/// Outcome of the k-tuple moment comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub holds: bool,
    /// Largest absolute gap between the two sides (exact).
    pub max_discrepancy: BigRational,
    /// Number of indicator families compared: `prod_i A_i^k`.
    pub families_checked: usize,
}

/// Compares, for every family of per-class indicator functions on k-tuples,
/// the moment of the first `k` particles of each class against the expected
/// product of k-tuple-measure integrals. No exchangeability check.
pub fn k_tuple_moment_discrepancy(law: &JointLaw, k: usize) -> Result<MomentReport> {
    let shape = law.shape();
    if k == 0 {
        return Err(Error::ZeroTupleLength);
    }
    let min_size = *shape.class_sizes().iter().min().unwrap();
    if k > min_size {
        return Err(Error::TupleTooLong { k, max: min_size });
    }

    // Per configuration and class, the k-tuple measure as a dense grid.
    let tuple_index = |tuple: &[usize], alphabet_len: usize| -> usize {
        tuple.iter().fold(0, |acc, &s| acc * alphabet_len + s)
    };
    let support: Vec<(&crate::system::Configuration, &BigRational)> = law.support().collect();
    let mut tuple_measures: Vec<Vec<Vec<BigRational>>> = Vec::with_capacity(support.len());
    for (config, _) in &support {
        let mut per_class = Vec::with_capacity(shape.class_count());
        for (i, class_states) in config.states.iter().enumerate() {
            let measure = k_distinct_tuple_measure(class_states, shape.alphabet_len(i), k)?;
            per_class.push(measure.weights);
        }
        tuple_measures.push(per_class);
    }

    let mut max_discrepancy = BigRational::zero();
    let grid_sizes: Vec<usize> = (0..shape.class_count())
        .map(|i| shape.alphabet_len(i).pow(k as u32))
        .collect();
    let families_checked = grid_sizes.iter().product();
    for family in mixed_radix(grid_sizes.clone()) {
        // Decode each class's tuple index back into the tuple itself.
        let tuples: Vec<Vec<usize>> = family
            .iter()
            .enumerate()
            .map(|(i, &index)| {
                let a = shape.alphabet_len(i);
                let mut digits = vec![0; k];
                let mut rest = index;
                for d in (0..k).rev() {
                    digits[d] = rest % a;
                    rest /= a;
                }
                digits
            })
            .collect();

        let mut lhs = BigRational::zero();
        let mut rhs = BigRational::zero();
        for (row, (config, weight)) in support.iter().enumerate() {
            let matches = config
                .states
                .iter()
                .zip(&tuples)
                .all(|(class_states, tuple)| class_states[..k] == tuple[..]);
            if matches {
                lhs += *weight;
            }
            let mut product = (*weight).clone();
            for (i, tuple) in tuples.iter().enumerate() {
                product *= &tuple_measures[row][i][tuple_index(tuple, shape.alphabet_len(i))];
            }
            rhs += product;
        }
        let gap = (lhs - rhs).abs();
        if gap > max_discrepancy {
            max_discrepancy = gap;
        }
    }
    Ok(MomentReport {
        holds: max_discrepancy.is_zero(),
        max_discrepancy,
        families_checked,
    })
}

/// Verifies the k-tuple moment identity for a multi-exchangeable law:
/// joint moments of the first `k` particles of each class coincide with
/// expectations of products of k-tuple-measure integrals.
///
/// Errors if the law is not multi-exchangeable.
pub fn verify_k_tuple_moments(law: &JointLaw, k: usize) -> Result<MomentReport> {
    if !is_multi_exchangeable(law) {
        return Err(Error::NotMultiExchangeable);
    }
    k_tuple_moment_discrepancy(law, k)
}
