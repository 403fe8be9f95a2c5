//! Exact verification engine: symmetrization, multi-exchangeability, and
//! the conditional law of a system given its empirical measure vector.
//!
//! The central fact checked here: for a multi-exchangeable law, conditioning
//! on the empirical measure vector leaves independent uniform orderings of
//! each class's multiset of states — so the empirical measure vector is a
//! sufficient statistic. All arithmetic is exact.

mod tuples;

pub use tuples::{
    falling_factorial, k_distinct_tuple_measure, k_product_measure, k_tuple_moment_discrepancy,
    tv_bound_check, tv_norm, verify_k_tuple_moments, MomentReport, TvBoundReport,
};

use std::collections::BTreeMap;

use itertools::Itertools;
use num::{BigRational, BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::law::JointLaw;
use crate::measure::{empirical_measure_vector, EmpiricalMeasureVector};
use crate::system::{
    mixed_radix, permute_within_classes, Caps, ClassPermutationVector, Configuration, SystemShape,
};

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Number of permutation tuples of a shape, `prod_i N_i!` (exact).
fn permutation_tuple_count(shape: &SystemShape) -> BigUint {
    shape.class_sizes().iter().map(|&n| factorial(n)).product()
}

/// Averages a law over every within-class permutation vector, producing its
/// multi-exchangeable symmetrization.
///
/// Errors if `prod_i N_i!` exceeds `caps.permutation`.
pub fn symmetrize(law: &JointLaw, caps: Caps) -> Result<JointLaw> {
    let shape = law.shape();
    let tuples = permutation_tuple_count(shape);
    if tuples > BigUint::from(caps.permutation) {
        return Err(Error::PermutationSpaceTooLarge {
            tuples,
            cap: caps.permutation,
        });
    }
    let class_perms: Vec<Vec<Vec<usize>>> = shape
        .class_sizes()
        .iter()
        .map(|&n| (0..n).permutations(n).collect())
        .collect();
    let tuple_count = BigRational::from_integer(num::BigInt::from(tuples));

    let mut weights: BTreeMap<Configuration, BigRational> = BTreeMap::new();
    for (config, weight) in law.support() {
        let share = weight / &tuple_count;
        for selector in mixed_radix(class_perms.iter().map(|p| p.len()).collect()) {
            let perms = ClassPermutationVector {
                perms: selector
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| class_perms[i][j].clone())
                    .collect(),
            };
            let image = permute_within_classes(config, &perms)?;
            *weights.entry(image).or_insert_with(BigRational::zero) += &share;
        }
    }
    JointLaw::new(shape.clone(), weights)
}

/// Whether the law is invariant under every within-class permutation.
///
/// It suffices to check adjacent transpositions of one class at a time,
/// since they generate all within-class permutation vectors.
pub fn is_multi_exchangeable(law: &JointLaw) -> bool {
    let shape = law.shape();
    for (class, &n) in shape.class_sizes().iter().enumerate() {
        for position in 0..n.saturating_sub(1) {
            let swap = ClassPermutationVector::transposition(shape, class, position, position + 1);
            let pushed = law.permuted(&swap).expect("transposition matches shape");
            if pushed != *law {
                return false;
            }
        }
    }
    true
}

/// One conditional block: the probability of seeing the empirical measure
/// vector, and the law of the configuration given it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEntry {
    pub marginal: BigRational,
    pub law: JointLaw,
}

/// The exact disintegration of a law over the values of its empirical
/// measure vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLawTable {
    pub entries: BTreeMap<EmpiricalMeasureVector, ConditionalEntry>,
}

/// Groups a law by the empirical measure vector of its configurations and
/// normalizes each block.
pub fn conditional_law_given_emv(law: &JointLaw) -> Result<ConditionalLawTable> {
    let shape = law.shape();
    let mut blocks: BTreeMap<EmpiricalMeasureVector, BTreeMap<Configuration, BigRational>> =
        BTreeMap::new();
    for (config, weight) in law.support() {
        let value = empirical_measure_vector(shape, config)?;
        blocks
            .entry(value)
            .or_default()
            .insert(config.clone(), weight.clone());
    }
    let mut entries = BTreeMap::new();
    for (value, block) in blocks {
        let marginal: BigRational = block.values().sum();
        let conditional = block
            .into_iter()
            .map(|(config, weight)| (config, weight / &marginal))
            .collect();
        entries.insert(
            value,
            ConditionalEntry {
                marginal,
                law: JointLaw::new(shape.clone(), conditional)?,
            },
        );
    }
    Ok(ConditionalLawTable { entries })
}

/// Every distinct ordering of the multiset with the given symbol counts,
/// in lexicographic order.
fn multiset_orderings(counts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = counts.iter().sum();
    let mut remaining = counts.to_vec();
    let mut prefix = Vec::with_capacity(total);
    let mut out = Vec::new();
    fn recurse(
        remaining: &mut [usize],
        prefix: &mut Vec<usize>,
        total: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if prefix.len() == total {
            out.push(prefix.clone());
            return;
        }
        for symbol in 0..remaining.len() {
            if remaining[symbol] > 0 {
                remaining[symbol] -= 1;
                prefix.push(symbol);
                recurse(remaining, prefix, total, out);
                prefix.pop();
                remaining[symbol] += 1;
            }
        }
    }
    recurse(&mut remaining, &mut prefix, total, &mut out);
    out
}

/// The law of independent uniform orderings: given an empirical measure
/// vector, each class independently receives a uniformly random ordering of
/// its multiset of states. Every admissible configuration has weight
/// `prod_i (prod_s count_{i,s}!) / N_i!`.
pub fn uniform_orderings_law(
    shape: &SystemShape,
    value: &EmpiricalMeasureVector,
) -> Result<JointLaw> {
    if value.freqs.len() != shape.class_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} classes of frequencies on a shape with {}",
            value.freqs.len(),
            shape.class_count()
        )));
    }
    for (i, class_freqs) in value.freqs.iter().enumerate() {
        if class_freqs.len() != shape.alphabet_len(i) {
            return Err(Error::ShapeMismatch(format!(
                "class {i} has {} frequencies for an alphabet of size {}",
                class_freqs.len(),
                shape.alphabet_len(i)
            )));
        }
    }
    let counts = value.counts(shape.class_sizes())?;

    let mut weight = BigRational::one();
    let mut orderings_per_class = Vec::with_capacity(shape.class_count());
    for (i, class_counts) in counts.iter().enumerate() {
        let n = shape.class_sizes()[i];
        let numerator: BigUint = class_counts.iter().map(|&c| factorial(c)).product();
        weight *= BigRational::new(numerator.into(), factorial(n).into());
        orderings_per_class.push(multiset_orderings(class_counts));
    }

    let mut weights = BTreeMap::new();
    for selector in mixed_radix(orderings_per_class.iter().map(|o| o.len()).collect()) {
        let states = selector
            .iter()
            .enumerate()
            .map(|(i, &j)| orderings_per_class[i][j].clone())
            .collect();
        weights.insert(Configuration::new(states), weight.clone());
    }
    JointLaw::new(shape.clone(), weights)
}

/// Outcome of the sufficiency check.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport {
    /// True iff every conditional block equals the uniform-orderings law.
    pub holds: bool,
    /// Largest absolute weight difference seen across all blocks (exact).
    pub max_discrepancy: BigRational,
    /// Number of empirical measure vector values compared.
    pub values_checked: usize,
}

/// Verifies that conditioning a multi-exchangeable law on its empirical
/// measure vector yields independent uniform orderings within each class.
///
/// Errors if the law is not multi-exchangeable.
pub fn verify_sufficiency(law: &JointLaw) -> Result<SufficiencyReport> {
    if !is_multi_exchangeable(law) {
        return Err(Error::NotMultiExchangeable);
    }
    let shape = law.shape();
    let table = conditional_law_given_emv(law)?;
    let mut max_discrepancy = BigRational::zero();
    let values_checked = table.entries.len();
    for (value, entry) in &table.entries {
        let predicted = uniform_orderings_law(shape, value)?;
        // Worst single-configuration weight gap, over both supports.
        for (config, weight) in predicted.support() {
            let gap = (weight - entry.law.weight(config)).abs();
            if gap > max_discrepancy {
                max_discrepancy = gap;
            }
        }
        for (config, weight) in entry.law.support() {
            let gap = (weight - predicted.weight(config)).abs();
            if gap > max_discrepancy {
                max_discrepancy = gap;
            }
        }
    }
    Ok(SufficiencyReport {
        holds: max_discrepancy.is_zero(),
        max_discrepancy,
        values_checked,
    })
}
