//! Seeded generators of multi-exchangeable laws and configuration samplers.
//!
//! Laws built here feed the exact verification engine: mixtures of
//! within-class i.i.d. regimes (multi-exchangeable by construction) and
//! symmetrized random rational laws for fuzz campaigns. Samplers use exact
//! inverse-CDF thresholds so that a draw is a pure function of `(seed,
//! sample index)`.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::symmetrize;
use crate::law::JointLaw;
use crate::rng::{substream_seed, SplitMix64};
use crate::system::{enumerate_configurations, Caps, Configuration, SystemShape};

/// One mixture regime: a weight and, per class, the frequency vector its
/// particles are drawn from i.i.d.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: BigRational,
    pub class_freqs: Vec<Vec<BigRational>>,
}

/// A finite mixture of within-class i.i.d. regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    /// Builds a mixture, validating that weights are non-negative and sum
    /// to one and that every frequency vector is a probability vector.
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        let total: BigRational = components.iter().map(|c| &c.weight).sum();
        if !total.is_one() {
            return Err(Error::InvalidMixture(format!(
                "component weights sum to {total}, not 1"
            )));
        }
        for (index, component) in components.iter().enumerate() {
            if component.weight.is_negative() {
                return Err(Error::InvalidMixture(format!(
                    "component {index} has negative weight"
                )));
            }
            for (i, freqs) in component.class_freqs.iter().enumerate() {
                if freqs.iter().any(|f| f.is_negative()) {
                    return Err(Error::InvalidMixture(format!(
                        "component {index} class {i} has a negative frequency"
                    )));
                }
                let sum: BigRational = freqs.iter().sum();
                if !sum.is_one() {
                    return Err(Error::InvalidMixture(format!(
                        "component {index} class {i} frequencies sum to {sum}, not 1"
                    )));
                }
            }
        }
        Ok(Self { components })
    }

    fn validate_against(&self, shape: &SystemShape) -> Result<()> {
        for (index, component) in self.components.iter().enumerate() {
            if component.class_freqs.len() != shape.class_count() {
                return Err(Error::ShapeMismatch(format!(
                    "component {index} has {} classes, shape has {}",
                    component.class_freqs.len(),
                    shape.class_count()
                )));
            }
            for (i, freqs) in component.class_freqs.iter().enumerate() {
                if freqs.len() != shape.alphabet_len(i) {
                    return Err(Error::ShapeMismatch(format!(
                        "component {index} class {i} has {} frequencies for an alphabet of size {}",
                        freqs.len(),
                        shape.alphabet_len(i)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The exact joint law of a mixture: conditionally on a component, every
/// particle of class `i` is i.i.d. from that component's class-`i`
/// frequency vector. Multi-exchangeable by construction.
pub fn mixture_joint_law(
    spec: &MixtureSpec,
    shape: &SystemShape,
    caps: Caps,
) -> Result<JointLaw> {
    spec.validate_against(shape)?;
    let configs = enumerate_configurations(shape, caps)?;
    let mut weights = BTreeMap::new();
    for config in configs {
        let mut weight = BigRational::zero();
        for component in &spec.components {
            let mut product = component.weight.clone();
            for (i, class_states) in config.states.iter().enumerate() {
                for &s in class_states {
                    product *= &component.class_freqs[i][s];
                }
            }
            weight += product;
        }
        if !weight.is_zero() {
            weights.insert(config, weight);
        }
    }
    JointLaw::new(shape.clone(), weights)
}

/// A seeded random multi-exchangeable law: integer weights drawn uniformly
/// from `{0, .., 2^16 - 1}` per configuration, normalized, symmetrized.
///
/// Deterministic in `(shape, seed)`.
pub fn random_multi_exchangeable_law(
    shape: &SystemShape,
    seed: u64,
    caps: Caps,
) -> Result<JointLaw> {
    let configs = enumerate_configurations(shape, caps)?;
    let mut rng = SplitMix64::new(seed);
    let mut raw: Vec<u64> = configs.iter().map(|_| rng.next_u64() >> 48).collect();
    if raw.iter().all(|&w| w == 0) {
        // Degenerate draw (probability 2^-16 per configuration): fall back
        // to the uniform law rather than failing.
        raw = vec![1; configs.len()];
    }
    let total = BigInt::from(raw.iter().sum::<u64>());
    let weights = configs
        .into_iter()
        .zip(raw)
        .filter(|(_, w)| *w > 0)
        .map(|(config, w)| (config, BigRational::new(BigInt::from(w), total.clone())))
        .collect();
    let law = JointLaw::new(shape.clone(), weights)?;
    symmetrize(&law, caps)
}

/// Inverse-CDF thresholds: entry `j` is the least 53-bit numerator `t` with
/// `t / 2^53 >= cdf_j`, so a draw `u = k / 2^53` selects the first `j` with
/// `k < t_j`. Exact despite the float-free comparison.
fn unit_thresholds<'a>(weights: impl Iterator<Item = &'a BigRational>) -> Vec<u64> {
    let mut cumulative = BigRational::zero();
    let mut thresholds = Vec::new();
    for weight in weights {
        cumulative += weight;
        let scaled: BigInt = cumulative.numer() << 53u32;
        thresholds.push(
            scaled
                .div_ceil(cumulative.denom())
                .to_u64()
                .expect("cumulative weight stays within [0, 1]"),
        );
    }
    thresholds
}

fn pick(thresholds: &[u64], numerator: u64) -> usize {
    let index = thresholds.partition_point(|&t| t <= numerator);
    index.min(thresholds.len() - 1)
}

/// Draws `count` i.i.d. configurations from an exact law by inverse CDF
/// over its lexicographically ordered support.
///
/// Sample `j` depends only on `(seed, j)`, never on `count`.
pub fn sample_law(law: &JointLaw, count: usize, seed: u64) -> Vec<Configuration> {
    let support: Vec<&Configuration> = law.support().map(|(c, _)| c).collect();
    let thresholds = unit_thresholds(law.support().map(|(_, w)| w));
    (0..count)
        .map(|j| {
            let mut rng = SplitMix64::new(substream_seed(seed, j as u64));
            support[pick(&thresholds, rng.next_unit_numerator())].clone()
        })
        .collect()
}

/// Draws `count` i.i.d. configurations from a mixture: first the component,
/// then every particle i.i.d. from its class's frequency vector, in
/// class-major particle-minor order. Returns the drawn component index
/// alongside each configuration.
///
/// Sample `j` depends only on `(seed, j)`, never on `count`.
pub fn sample_mixture(
    spec: &MixtureSpec,
    shape: &SystemShape,
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, Configuration)>> {
    spec.validate_against(shape)?;
    let component_thresholds = unit_thresholds(spec.components.iter().map(|c| &c.weight));
    let symbol_thresholds: Vec<Vec<Vec<u64>>> = spec
        .components
        .iter()
        .map(|component| {
            component
                .class_freqs
                .iter()
                .map(|freqs| unit_thresholds(freqs.iter()))
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(count);
    for j in 0..count {
        let mut rng = SplitMix64::new(substream_seed(seed, j as u64));
        let component = pick(&component_thresholds, rng.next_unit_numerator());
        let mut states = Vec::with_capacity(shape.class_count());
        for (i, &n) in shape.class_sizes().iter().enumerate() {
            let thresholds = &symbol_thresholds[component][i];
            states.push(
                (0..n)
                    .map(|_| pick(thresholds, rng.next_unit_numerator()))
                    .collect(),
            );
        }
        samples.push((component, Configuration::new(states)));
    }
    Ok(samples)
}
