//! Inference under partition exchangeability.
//!
//! A sample of discrete observations is summarized by its abundance vector
//! (frequencies of frequencies). Under the Poisson-Dirichlet model with
//! dispersal parameter ψ, the abundance follows the Ewens sampling formula.
//! This crate provides:
//!
//! * [`partition`]: samples, abundance vectors, integer partition enumeration
//! * [`esf`]: Ewens sampling formula probabilities
//! * [`urn`]: seeded Hoppe urn sampling
//! * [`estimation`]: maximum-likelihood ψ and bootstrap intervals
//! * [`hypothesis`]: score, likelihood-ratio and Watterson tests
//! * [`classifier`]: marginal and simultaneous predictive classifiers

pub mod classifier;
pub mod error;
pub mod esf;
pub mod estimation;
pub mod hypothesis;
pub mod partition;
pub mod urn;

pub use error::{Error, Result};
pub use esf::{Psi, PsiSpec};
pub use partition::{Abundance, IntegerPartition, Sample, Token};
pub use urn::Seed;
