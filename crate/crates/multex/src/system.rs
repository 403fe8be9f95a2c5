//! Shapes, configurations, and within-class permutations of finite
//! multi-class particle systems.
//!
//! A *shape* fixes the number of classes, the particle count of each class,
//! and each class's finite state alphabet. A *configuration* assigns every
//! particle a state. Permutations act on particle positions of one class at
//! a time and never move particles across classes.

use std::fmt;

use num::BigUint;

use crate::error::{Error, Result};

/// Budgets for exhaustive operations, so that nothing silently explodes.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// Maximum number of configurations an enumeration may produce.
    pub enumeration: u64,
    /// Maximum number of permutation tuples a symmetrization may visit.
    pub permutation: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enumeration: 10_000_000,
            permutation: 1_000_000,
        }
    }
}

/// A finite multi-class system: one particle count and one state alphabet
/// per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemShape {
    class_sizes: Vec<usize>,
    alphabets: Vec<Vec<String>>,
}

impl SystemShape {
    /// Builds a shape, rejecting empty classes, empty alphabets, duplicate
    /// labels, and mismatched lengths.
    pub fn new(class_sizes: Vec<usize>, alphabets: Vec<Vec<String>>) -> Result<Self> {
        if class_sizes.is_empty() {
            return Err(Error::InvalidShape("no classes".into()));
        }
        if class_sizes.len() != alphabets.len() {
            return Err(Error::InvalidShape(format!(
                "{} class sizes but {} alphabets",
                class_sizes.len(),
                alphabets.len()
            )));
        }
        for (i, &n) in class_sizes.iter().enumerate() {
            if n == 0 {
                return Err(Error::InvalidShape(format!("class {i} has no particles")));
            }
        }
        for (i, alphabet) in alphabets.iter().enumerate() {
            if alphabet.is_empty() {
                return Err(Error::InvalidShape(format!("class {i} has an empty alphabet")));
            }
            for (s, label) in alphabet.iter().enumerate() {
                if alphabet[..s].contains(label) {
                    return Err(Error::InvalidShape(format!(
                        "class {i} repeats the label {label:?}"
                    )));
                }
            }
        }
        Ok(Self {
            class_sizes,
            alphabets,
        })
    }

    /// Shape whose class-`i` alphabet is `"0", "1", ..` of the given size.
    pub fn with_numeric_alphabets(class_sizes: &[usize], alphabet_sizes: &[usize]) -> Result<Self> {
        if class_sizes.len() != alphabet_sizes.len() {
            return Err(Error::InvalidShape(format!(
                "{} class sizes but {} alphabet sizes",
                class_sizes.len(),
                alphabet_sizes.len()
            )));
        }
        let alphabets = alphabet_sizes
            .iter()
            .map(|&a| (0..a).map(|s| s.to_string()).collect())
            .collect();
        Self::new(class_sizes.to_vec(), alphabets)
    }

    pub fn class_count(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn alphabet_len(&self, class: usize) -> usize {
        self.alphabets[class].len()
    }

    /// Total number of configurations, `prod_i A_i^{N_i}` (exact).
    pub fn configuration_count(&self) -> BigUint {
        let mut count = BigUint::from(1u32);
        for (i, &n) in self.class_sizes.iter().enumerate() {
            let a = BigUint::from(self.alphabets[i].len());
            count *= a.pow(n as u32);
        }
        count
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.class_sizes.iter().map(|n| n.to_string()).collect();
        let alphabet_sizes: Vec<String> = self.alphabets.iter().map(|a| a.len().to_string()).collect();
        write!(
            f,
            "sizes=({}) alphabets=({})",
            sizes.join(","),
            alphabet_sizes.join(",")
        )
    }
}

/// One realization of a system: per class, the ordered list of its
/// particles' states as indices into that class's alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub states: Vec<Vec<usize>>,
}

impl Configuration {
    pub fn new(states: Vec<Vec<usize>>) -> Self {
        Self { states }
    }

    /// Checks that the configuration belongs to `shape`.
    pub fn validate(&self, shape: &SystemShape) -> Result<()> {
        if self.states.len() != shape.class_count() {
            return Err(Error::InvalidConfiguration(format!(
                "{} classes in configuration, {} in shape",
                self.states.len(),
                shape.class_count()
            )));
        }
        for (i, class_states) in self.states.iter().enumerate() {
            if class_states.len() != shape.class_sizes()[i] {
                return Err(Error::InvalidConfiguration(format!(
                    "class {i} has {} particles, shape says {}",
                    class_states.len(),
                    shape.class_sizes()[i]
                )));
            }
            for &s in class_states {
                if s >= shape.alphabet_len(i) {
                    return Err(Error::InvalidConfiguration(format!(
                        "class {i} state index {s} outside alphabet of size {}",
                        shape.alphabet_len(i)
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, class_states) in self.states.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let parts: Vec<String> = class_states.iter().map(|s| s.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        write!(f, ")")
    }
}

/// Per class, a permutation of the particle positions `0..N_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPermutationVector {
    pub perms: Vec<Vec<usize>>,
}

impl ClassPermutationVector {
    /// Validates that every entry is a bijection of `0..len`.
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        for (i, perm) in perms.iter().enumerate() {
            let mut seen = vec![false; perm.len()];
            for &p in perm {
                if p >= perm.len() || seen[p] {
                    return Err(Error::InvalidPermutation(format!(
                        "class {i} entry is not a bijection of 0..{}",
                        perm.len()
                    )));
                }
                seen[p] = true;
            }
        }
        Ok(Self { perms })
    }

    /// The identity permutation of every class of `shape`.
    pub fn identity(shape: &SystemShape) -> Self {
        Self {
            perms: shape.class_sizes().iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// Swaps positions `a` and `b` within `class`, identity elsewhere.
    pub fn transposition(shape: &SystemShape, class: usize, a: usize, b: usize) -> Self {
        let mut v = Self::identity(shape);
        v.perms[class].swap(a, b);
        v
    }

    /// The inverse permutation vector.
    pub fn inverse(&self) -> Self {
        let perms = self
            .perms
            .iter()
            .map(|perm| {
                let mut inv = vec![0; perm.len()];
                for (n, &p) in perm.iter().enumerate() {
                    inv[p] = n;
                }
                inv
            })
            .collect();
        Self { perms }
    }
}

/// Iterator over all digit tuples of a mixed-radix counter, in ascending
/// lexicographic order (last digit fastest).
pub(crate) struct MixedRadix {
    radices: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

pub(crate) fn mixed_radix(radices: Vec<usize>) -> MixedRadix {
    let done = radices.iter().any(|&r| r == 0);
    let current = vec![0; radices.len()];
    MixedRadix {
        radices,
        current,
        done,
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // Increment the least significant digit, carrying left.
        self.done = true;
        for pos in (0..self.radices.len()).rev() {
            if self.current[pos] + 1 < self.radices[pos] {
                self.current[pos] += 1;
                self.done = false;
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

/// All configurations of `shape` in lexicographic order: class-major,
/// particle-minor, states in alphabet order.
///
/// Errors if the total count exceeds `caps.enumeration`.
pub fn enumerate_configurations(shape: &SystemShape, caps: Caps) -> Result<Vec<Configuration>> {
    let count = shape.configuration_count();
    if count > BigUint::from(caps.enumeration) {
        return Err(Error::StateSpaceTooLarge {
            configurations: count,
            cap: caps.enumeration,
        });
    }
    let mut radices = Vec::new();
    for (i, &n) in shape.class_sizes().iter().enumerate() {
        radices.extend(std::iter::repeat(shape.alphabet_len(i)).take(n));
    }
    let configs = mixed_radix(radices)
        .map(|digits| {
            let mut states = Vec::with_capacity(shape.class_count());
            let mut offset = 0;
            for &n in shape.class_sizes() {
                states.push(digits[offset..offset + n].to_vec());
                offset += n;
            }
            Configuration::new(states)
        })
        .collect();
    Ok(configs)
}

/// Applies a within-class permutation vector: particle `n` of class `i` in
/// the output holds the state of particle `perms[i][n]` in the input.
pub fn permute_within_classes(
    config: &Configuration,
    perms: &ClassPermutationVector,
) -> Result<Configuration> {
    if config.states.len() != perms.perms.len() {
        return Err(Error::ShapeMismatch(format!(
            "configuration has {} classes, permutation vector {}",
            config.states.len(),
            perms.perms.len()
        )));
    }
    let mut states = Vec::with_capacity(config.states.len());
    for (class_states, perm) in config.states.iter().zip(&perms.perms) {
        if class_states.len() != perm.len() {
            return Err(Error::ShapeMismatch(format!(
                "class of {} particles permuted by a bijection of 0..{}",
                class_states.len(),
                perm.len()
            )));
        }
        states.push(perm.iter().map(|&p| class_states[p]).collect());
    }
    Ok(Configuration::new(states))
}
