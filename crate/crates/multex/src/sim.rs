//! Monte Carlo simulator for synchronous mean-field dynamics on binary
//! states, with an exact one-step kernel for small systems and CSV
//! persistence of trajectories.
//!
//! The dynamics: at every step, each particle of class `i` independently
//! resamples with probability `rho[i]` (otherwise it keeps its state); a
//! resampled state is `1` with probability
//! `clamp(a[i] + sum_j b[i][j] * m[j], 0, 1)`, where `m[j]` is the
//! fraction of ones in class `j` *before* the step. Initial states are
//! independent Bernoulli(`q[i]`). Particles interact only through the
//! class means, so for large classes tagged particles decorrelate and the
//! empirical measures concentrate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::JointLaw;
use crate::rng::{substream_seed, SplitMix64};
use crate::system::{enumerate_configurations, Caps};

/// Number of particles per class whose individual trajectories are
/// recorded alongside the empirical measures.
pub const TAGGED_PER_CLASS: usize = 4;

/// Parameters of the mean-field dynamics.
///
/// `a[i]` is the base rate of class `i`, `b[i][j]` weights the influence
/// of class `j`'s mean on class `i`, `rho[i]` is the per-step resampling
/// probability, `q[i]` the initial Bernoulli parameter, and `steps` the
/// number of synchronous updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub classes: usize,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    pub q: Vec<f64>,
    pub steps: usize,
}

impl ModelSpec {
    /// Checks dimensions, finiteness, and probability ranges.
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 {
            return Err(Error::InvalidModel("classes must be positive".into()));
        }
        let check_len = |name: &str, len: usize| {
            if len == self.classes {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "{name} has length {len}, expected {}",
                    self.classes
                )))
            }
        };
        check_len("a", self.a.len())?;
        check_len("b", self.b.len())?;
        check_len("rho", self.rho.len())?;
        check_len("q", self.q.len())?;
        for (i, row) in self.b.iter().enumerate() {
            if row.len() != self.classes {
                return Err(Error::InvalidModel(format!(
                    "b[{i}] has length {}, expected {}",
                    row.len(),
                    self.classes
                )));
            }
        }
        if self.a.iter().any(|x| !x.is_finite())
            || self.b.iter().flatten().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidModel("a and b must be finite".into()));
        }
        for (name, values) in [("rho", &self.rho), ("q", &self.q)] {
            if values.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidModel(format!(
                    "{name} entries must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Parses and validates a model from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: ModelSpec = serde_json::from_str(text)
            .map_err(|e| Error::MalformedInput(format!("model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    /// A two-class model with strong cross-class coupling near the edge of
    /// stability, so finite-size correlations are large enough to measure
    /// and their decay with system size stands out. The drift is linear on
    /// all of [0, 1]^2 (the clamp never binds) with fixed point (1/2, 1/2),
    /// and the initial condition starts there.
    pub fn default_coupled() -> Self {
        ModelSpec {
            classes: 2,
            a: vec![0.01, 0.01],
            b: vec![vec![0.56, 0.42], vec![0.42, 0.56]],
            rho: vec![0.8, 0.9],
            q: vec![0.5, 0.5],
            steps: 50,
        }
    }

    /// A two-class model with no interaction (`b = 0`) and full resampling
    /// (`rho = 1`): particles are independent at every step, so all
    /// covariances vanish exactly.
    pub fn decoupled() -> Self {
        ModelSpec {
            classes: 2,
            a: vec![0.2, 0.6],
            b: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            rho: vec![1.0, 1.0],
            q: vec![0.5, 0.5],
            steps: 50,
        }
    }
}

/// One replication's trajectory: empirical symbol frequencies and tagged
/// particle states at every step (step 0 is the initial condition).
///
/// `emv[t][i][s]` is the class-`i` frequency of symbol `s` after `t`
/// steps; `tagged[t][i][p]` is the state of tagged particle `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub replication: usize,
    pub seed: u64,
    pub class_sizes: Vec<usize>,
    pub emv: Vec<Vec<Vec<f64>>>,
    pub tagged: Vec<Vec<Vec<u8>>>,
}

/// All replications for one system size in a sweep, with the seed that
/// drove them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub n: usize,
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
}

fn class_means(states: &[Vec<u8>]) -> Vec<f64> {
    states
        .iter()
        .map(|class| class.iter().map(|&s| f64::from(s)).sum::<f64>() / class.len() as f64)
        .collect()
}

fn redraw_probability(model: &ModelSpec, means: &[f64], class: usize) -> f64 {
    let mut p = model.a[class];
    for (j, m) in means.iter().enumerate() {
        p += model.b[class][j] * m;
    }
    p.clamp(0.0, 1.0)
}

/// One synchronous update. All redraw probabilities use the pre-step
/// means; particles are visited class-major, particle-minor, drawing one
/// uniform for the resample decision and a second only when resampling.
fn step(states: &mut [Vec<u8>], model: &ModelSpec, rng: &mut SplitMix64) {
    let means = class_means(states);
    let probabilities: Vec<f64> = (0..model.classes)
        .map(|i| redraw_probability(model, &means, i))
        .collect();
    for (i, class) in states.iter_mut().enumerate() {
        for state in class.iter_mut() {
            if rng.next_f64() < model.rho[i] {
                *state = u8::from(rng.next_f64() < probabilities[i]);
            }
        }
    }
}

fn snapshot(states: &[Vec<u8>], emv: &mut Vec<Vec<Vec<f64>>>, tagged: &mut Vec<Vec<Vec<u8>>>) {
    emv.push(
        states
            .iter()
            .map(|class| {
                let ones = class.iter().filter(|&&s| s == 1).count() as f64;
                let n = class.len() as f64;
                vec![(n - ones) / n, ones / n]
            })
            .collect(),
    );
    tagged.push(
        states
            .iter()
            .map(|class| class[..TAGGED_PER_CLASS].to_vec())
            .collect(),
    );
}

fn validate_sizes(model: &ModelSpec, class_sizes: &[usize]) -> Result<()> {
    if class_sizes.len() != model.classes {
        return Err(Error::InvalidSizes(format!(
            "{} class sizes for a model with {} classes",
            class_sizes.len(),
            model.classes
        )));
    }
    if let Some(&n) = class_sizes.iter().find(|&&n| n < TAGGED_PER_CLASS) {
        return Err(Error::InvalidSizes(format!(
            "class size {n} is below the {TAGGED_PER_CLASS} tagged particles per class"
        )));
    }
    Ok(())
}

/// Runs independent replications of the dynamics. Replication `r` is
/// driven entirely by a generator seeded with `substream_seed(seed, r)`,
/// so each record is reproducible in isolation and the set of records
/// does not depend on scheduling.
pub fn run(
    model: &ModelSpec,
    class_sizes: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    model.validate()?;
    validate_sizes(model, class_sizes)?;
    if replications == 0 {
        return Err(Error::TooFewReplications { need: 1, got: 0 });
    }
    (0..replications)
        .into_par_iter()
        .map(|replication| {
            let rep_seed = substream_seed(seed, replication as u64);
            let mut rng = SplitMix64::new(rep_seed);
            let mut states: Vec<Vec<u8>> = class_sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| (0..n).map(|_| u8::from(rng.next_f64() < model.q[i])).collect())
                .collect();
            let mut emv = Vec::with_capacity(model.steps + 1);
            let mut tagged = Vec::with_capacity(model.steps + 1);
            snapshot(&states, &mut emv, &mut tagged);
            for _ in 0..model.steps {
                step(&mut states, model, &mut rng);
                snapshot(&states, &mut emv, &mut tagged);
            }
            Ok(TrajectoryRecord {
                replication,
                seed: rep_seed,
                class_sizes: class_sizes.to_vec(),
                emv,
                tagged,
            })
        })
        .collect()
}

/// Runs the same model at a strictly increasing list of system sizes,
/// applying each size to every class. Size index `k` uses the seed
/// `substream_seed(seed, k)`.
pub fn sweep_runs(
    model: &ModelSpec,
    n_values: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<SweepRun>> {
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedSweep);
    }
    n_values
        .iter()
        .enumerate()
        .map(|(index, &n)| {
            let run_seed = substream_seed(seed, index as u64);
            let records = run(model, &vec![n; model.classes], replications, run_seed)?;
            Ok(SweepRun {
                n,
                seed: run_seed,
                records,
            })
        })
        .collect()
}

fn clamp_unit(p: BigRational) -> BigRational {
    if p.is_negative() {
        BigRational::zero()
    } else if p > BigRational::one() {
        BigRational::one()
    } else {
        p
    }
}

fn exact_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

/// Pushes an exact law one synchronous step through the dynamics.
///
/// Every finite `f64` parameter is converted to its exact dyadic rational,
/// so the result is the exact one-step distribution of the sampler's
/// idealized kernel. The law's shape must use binary alphabets. Costs on
/// the order of the squared configuration count, which is checked against
/// `caps.enumeration`.
pub fn exact_kernel_law(model: &ModelSpec, initial: &JointLaw, caps: Caps) -> Result<JointLaw> {
    model.validate()?;
    let shape = initial.shape();
    if shape.class_count() != model.classes {
        return Err(Error::ShapeMismatch(format!(
            "law has {} classes, model has {}",
            shape.class_count(),
            model.classes
        )));
    }
    if (0..shape.class_count()).any(|i| shape.alphabet_len(i) != 2) {
        return Err(Error::InvalidShape(
            "the dynamics are defined on binary alphabets".into(),
        ));
    }
    let count = shape.configuration_count();
    if &count * &count > BigUint::from(caps.enumeration) {
        return Err(Error::StateSpaceTooLarge {
            configurations: &count * &count,
            cap: caps.enumeration,
        });
    }
    let configs = enumerate_configurations(shape, caps)?;
    let one = BigRational::one();
    let a: Vec<BigRational> = model.a.iter().map(|&x| exact_f64(x)).collect();
    let b: Vec<Vec<BigRational>> = model
        .b
        .iter()
        .map(|row| row.iter().map(|&x| exact_f64(x)).collect())
        .collect();
    let rho: Vec<BigRational> = model.rho.iter().map(|&x| exact_f64(x)).collect();

    let mut weights: BTreeMap<_, BigRational> = BTreeMap::new();
    for (config, weight) in initial.support() {
        let means: Vec<BigRational> = config
            .states
            .iter()
            .map(|class| {
                let ones = class.iter().filter(|&&s| s == 1).count();
                BigRational::new(BigInt::from(ones), BigInt::from(class.len()))
            })
            .collect();
        let probabilities: Vec<BigRational> = (0..model.classes)
            .map(|i| {
                let mut p = a[i].clone();
                for (j, m) in means.iter().enumerate() {
                    p += &b[i][j] * m;
                }
                clamp_unit(p)
            })
            .collect();
        // Chance that each particle lands in state 1 after this step.
        let ones: Vec<Vec<BigRational>> = config
            .states
            .iter()
            .enumerate()
            .map(|(i, class)| {
                class
                    .iter()
                    .map(|&s| {
                        let kept = if s == 1 { &one - &rho[i] } else { BigRational::zero() };
                        kept + &rho[i] * &probabilities[i]
                    })
                    .collect()
            })
            .collect();
        for target in &configs {
            let mut mass = weight.clone();
            'particles: for (i, class) in target.states.iter().enumerate() {
                for (p, &s) in class.iter().enumerate() {
                    mass *= if s == 1 {
                        ones[i][p].clone()
                    } else {
                        &one - &ones[i][p]
                    };
                    if mass.is_zero() {
                        break 'particles;
                    }
                }
            }
            if !mass.is_zero() {
                *weights.entry(target.clone()).or_insert_with(BigRational::zero) += mass;
            }
        }
    }
    JointLaw::new(shape.clone(), weights)
}

fn sizes_comment(seed: u64, class_sizes: &[usize]) -> String {
    let sizes = class_sizes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("# seed={seed} sizes=({sizes})")
}

/// Writes the empirical-measure trajectories of a run as CSV with columns
/// `replication,step,class,symbol,frequency`; frequencies carry 17
/// significant digits so they parse back bit-exactly.
pub fn write_trajectory_csv(path: &Path, seed: u64, records: &[TrajectoryRecord]) -> Result<()> {
    let first = records
        .first()
        .ok_or_else(|| Error::MalformedInput("no records to write".into()))?;
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", sizes_comment(seed, &first.class_sizes))?;
    writeln!(out, "replication,step,class,symbol,frequency")?;
    for record in records {
        for (t, classes) in record.emv.iter().enumerate() {
            for (i, freqs) in classes.iter().enumerate() {
                for (s, freq) in freqs.iter().enumerate() {
                    writeln!(out, "{},{t},{i},{s},{freq:.16e}", record.replication)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the tagged-particle trajectories of a run as CSV with columns
/// `replication,step,class,particle,state`.
pub fn write_tagged_csv(path: &Path, seed: u64, records: &[TrajectoryRecord]) -> Result<()> {
    let first = records
        .first()
        .ok_or_else(|| Error::MalformedInput("no records to write".into()))?;
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", sizes_comment(seed, &first.class_sizes))?;
    writeln!(out, "replication,step,class,particle,state")?;
    for record in records {
        for (t, classes) in record.tagged.iter().enumerate() {
            for (i, particles) in classes.iter().enumerate() {
                for (p, state) in particles.iter().enumerate() {
                    writeln!(out, "{},{t},{i},{p},{state}", record.replication)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}
