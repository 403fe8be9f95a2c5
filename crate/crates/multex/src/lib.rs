//! Exact and Monte Carlo tools for multi-class particle systems whose laws
//! are exchangeable within classes.
//!
//! The exact layer works in rational arithmetic over finite state spaces:
//! it verifies that the empirical measure vector is a sufficient statistic
//! (conditioning on it yields uniformly distributed within-class
//! orderings), checks total-variation bounds between sampling with and
//! without replacement, and validates k-tuple moment identities. The Monte
//! Carlo layer simulates mean-field interacting particle systems and
//! measures the decay of correlations and the concentration of empirical
//! measures as system sizes grow.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exact;
pub mod generators;
pub mod law;
pub mod measure;
pub mod rng;
pub mod sim;
pub mod system;

pub use error::{Error, Result};
