//! Empirical measures of configurations and exact finite measures on
//! tuple spaces.

use num::{BigRational, FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::system::{Configuration, SystemShape};

/// Per class, the exact symbol frequencies of a configuration. Entries of
/// class `i` are multiples of `1/N_i` and sum to one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EmpiricalMeasureVector {
    pub freqs: Vec<Vec<BigRational>>,
}

impl EmpiricalMeasureVector {
    /// Builds a frequency vector, rejecting negative entries and classes
    /// that do not sum to one.
    pub fn new(freqs: Vec<Vec<BigRational>>) -> Result<Self> {
        for (i, class_freqs) in freqs.iter().enumerate() {
            if class_freqs.iter().any(|f| f.is_negative()) {
                return Err(Error::InvalidConfiguration(format!(
                    "class {i} has a negative frequency"
                )));
            }
            let total: BigRational = class_freqs.iter().sum();
            if total != BigRational::from_integer(1.into()) {
                return Err(Error::InvalidConfiguration(format!(
                    "class {i} frequencies sum to {total}, not 1"
                )));
            }
        }
        Ok(Self { freqs })
    }

    /// Per-class symbol counts for the given class sizes; errors unless
    /// every frequency is a multiple of `1/N_i`.
    pub fn counts(&self, class_sizes: &[usize]) -> Result<Vec<Vec<usize>>> {
        if class_sizes.len() != self.freqs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} classes of frequencies, {} class sizes",
                self.freqs.len(),
                class_sizes.len()
            )));
        }
        let mut counts = Vec::with_capacity(self.freqs.len());
        for (i, (class_freqs, &n)) in self.freqs.iter().zip(class_sizes).enumerate() {
            let mut class_counts = Vec::with_capacity(class_freqs.len());
            for freq in class_freqs {
                let scaled = freq * BigRational::from_usize(n).unwrap();
                if !scaled.is_integer() {
                    return Err(Error::NonAtomicFrequency {
                        class: i,
                        freq: freq.to_string(),
                        size: n,
                    });
                }
                class_counts.push(scaled.to_integer().to_usize().unwrap());
            }
            counts.push(class_counts);
        }
        Ok(counts)
    }

    /// Frequencies as 64-bit floats, for reporting.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.freqs
            .iter()
            .map(|class_freqs| class_freqs.iter().map(|f| f.to_f64().unwrap()).collect())
            .collect()
    }
}

/// The empirical measure vector of a configuration: for each class, the
/// fraction of its particles in each alphabet state.
pub fn empirical_measure_vector(
    shape: &SystemShape,
    config: &Configuration,
) -> Result<EmpiricalMeasureVector> {
    config.validate(shape)?;
    let mut freqs = Vec::with_capacity(shape.class_count());
    for (i, class_states) in config.states.iter().enumerate() {
        let n = BigRational::from_usize(class_states.len()).unwrap();
        let mut class_counts = vec![BigRational::zero(); shape.alphabet_len(i)];
        for &s in class_states {
            class_counts[s] += BigRational::from_integer(1.into());
        }
        freqs.push(class_counts.into_iter().map(|c| c / &n).collect());
    }
    Ok(EmpiricalMeasureVector { freqs })
}

/// Empirical frequency vector of a finite prefix of one class's states —
/// the natural estimator of the class's directing measure.
pub fn estimate_directing_measure(
    prefix: &[usize],
    alphabet_len: usize,
) -> Result<Vec<BigRational>> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix);
    }
    let mut counts = vec![BigRational::zero(); alphabet_len];
    for &s in prefix {
        if s >= alphabet_len {
            return Err(Error::InvalidConfiguration(format!(
                "state index {s} outside alphabet of size {alphabet_len}"
            )));
        }
        counts[s] += BigRational::from_integer(1.into());
    }
    let n = BigRational::from_usize(prefix.len()).unwrap();
    Ok(counts.into_iter().map(|c| c / &n).collect())
}

/// An exact (possibly signed or sub-probability) measure on an ordered
/// list of distinct tuple points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMeasure {
    pub points: Vec<Vec<usize>>,
    pub weights: Vec<BigRational>,
}

impl FiniteMeasure {
    /// Builds a measure, rejecting repeated points or mismatched lengths.
    pub fn new(points: Vec<Vec<usize>>, weights: Vec<BigRational>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::MalformedInput(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let mut sorted = points.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedInput("repeated point in measure".into()));
        }
        Ok(Self { points, weights })
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().sum()
    }
}
