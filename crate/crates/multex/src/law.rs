//! Exact joint laws on the configurations of a fixed shape.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::system::{permute_within_classes, ClassPermutationVector, Configuration, SystemShape};

/// A probability law over configurations, with exact rational weights.
///
/// Stored in canonical form: only strictly positive weights are kept, so
/// two equal laws compare equal with `==`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointLaw {
    shape: SystemShape,
    weights: BTreeMap<Configuration, BigRational>,
}

impl JointLaw {
    /// Builds a law, validating every configuration against the shape,
    /// non-negativity, and exact normalization. Zero weights are dropped.
    pub fn new(shape: SystemShape, weights: BTreeMap<Configuration, BigRational>) -> Result<Self> {
        let mut total = BigRational::zero();
        for (config, weight) in &weights {
            config.validate(&shape).map_err(|e| Error::InvalidLaw(e.to_string()))?;
            if weight.is_negative() {
                return Err(Error::InvalidLaw(format!(
                    "configuration {config} has negative weight {weight}"
                )));
            }
            total += weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(Self { shape, weights })
    }

    /// The law concentrated on a single configuration.
    pub fn point_mass(shape: SystemShape, config: Configuration) -> Result<Self> {
        let mut weights = BTreeMap::new();
        weights.insert(config, BigRational::one());
        Self::new(shape, weights)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    /// Weight of a configuration (zero if outside the support).
    pub fn weight(&self, config: &Configuration) -> BigRational {
        self.weights.get(config).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The support, in lexicographic configuration order.
    pub fn support(&self) -> impl Iterator<Item = (&Configuration, &BigRational)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Pushforward under a within-class permutation vector.
    pub fn permuted(&self, perms: &ClassPermutationVector) -> Result<JointLaw> {
        let mut weights: BTreeMap<Configuration, BigRational> = BTreeMap::new();
        for (config, weight) in &self.weights {
            let image = permute_within_classes(config, perms)?;
            *weights.entry(image).or_insert_with(BigRational::zero) += weight;
        }
        JointLaw::new(self.shape.clone(), weights)
    }

    /// L1 distance to another law on the same shape.
    pub fn l1_distance(&self, other: &JointLaw) -> Result<BigRational> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "laws live on different shapes".into(),
            ));
        }
        let mut distance = BigRational::zero();
        for (config, weight) in &self.weights {
            distance += (weight - other.weight(config)).abs();
        }
        for (config, weight) in &other.weights {
            if !self.weights.contains_key(config) {
                distance += weight.abs();
            }
        }
        Ok(distance)
    }
}

impl fmt::Display for JointLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "law on {} with {} weighted configurations:",
            self.shape,
            self.weights.len()
        )?;
        for (config, weight) in &self.weights {
            writeln!(f, "  {config} -> {weight}")?;
        }
        Ok(())
    }
}
