//! Poisson-Dirichlet sampling through the Hoppe urn.
//!
//! Draw `i` (1-based) introduces a new species with probability
//! `ψ / (ψ + i − 1)` and otherwise copies one of the previous `i − 1` draws
//! chosen uniformly. New species get consecutive labels starting at 1.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded through [`Seed`]. Output
//! is reproducible for a given seed within a release of this crate.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esf::Psi;
use crate::partition::{Abundance, Sample, Token};

/// The generator behind every seeded operation.
pub type SeededRng = ChaCha8Rng;

/// A 64-bit seed. Parses from decimal or `0x`-prefixed hex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> SeededRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for round `index` of a replicated computation.
    /// Lets rounds run in any order, or in parallel, with identical results.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index)))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        };
        parsed
            .map(Seed)
            .map_err(|_| Error::InvalidArgument(format!("seed must be a u64 in decimal or 0x-hex, got {s:?}")))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs the urn for `n` draws with the supplied generator, returning species
/// labels `1..=K` in order of first appearance.
pub fn urn_labels<R: Rng + ?Sized>(n: usize, psi: Psi, rng: &mut R) -> Vec<u64> {
    let psi = psi.get();
    let mut draws: Vec<u64> = Vec::with_capacity(n);
    let mut next_label = 1;
    for i in 0..n {
        let u: f64 = rng.random();
        if u < psi / (psi + i as f64) {
            draws.push(next_label);
            next_label += 1;
        } else {
            let ancestor = rng.random_range(0..i);
            draws.push(draws[ancestor]);
        }
    }
    draws
}

pub fn sample_hoppe_urn(n: usize, psi: Psi, seed: Seed) -> Result<Sample> {
    if n == 0 {
        return Err(Error::TooFewObservations { n: 0, required: 1 });
    }
    let labels = urn_labels(n, psi, &mut seed.rng());
    Ok(labels.into_iter().map(|l| Token::Int(l as i64)).collect())
}

/// Abundance of an urn sample; same draws as [`sample_hoppe_urn`].
pub fn sample_partition(n: usize, psi: Psi, seed: Seed) -> Result<Abundance> {
    sample_hoppe_urn(n, psi, seed).map(|s| s.abundance())
}
