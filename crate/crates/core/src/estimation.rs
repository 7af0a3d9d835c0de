//! Maximum-likelihood estimation of ψ.
//!
//! The likelihood of ψ depends on the data only through the species count
//! `K` and the size `n`, and its stationary point solves
//!
//! ```text
//! K = Σ_{i=1}^{n} ψ / (ψ + i − 1)
//! ```
//!
//! The right side is strictly increasing in ψ, so the root is found by
//! bracketing and bisection. `K = 1` and `K = n` have no interior root and
//! are reported as [`Boundary`] errors.

use std::collections::HashMap;
use std::fmt;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::esf::Psi;
use crate::partition::{Abundance, Sample};
use crate::urn::Seed;

/// Accept ψ when `|f(ψ) − K| ≤ RELATIVE_TOLERANCE · K`.
pub const RELATIVE_TOLERANCE: f64 = 1e-10;
/// ...or when the bracket is narrower than `BRACKET_TOLERANCE · ψ`.
pub const BRACKET_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: u32 = 200;

const INITIAL_LOW: f64 = 1e-8;
const INITIAL_HIGH: f64 = 1.0;
const HIGH_CAP: f64 = 1_180_591_620_717_411_303_424.0; // 2^70

/// Bootstrap draws retried per round before giving up.
pub const MAX_RESAMPLE_RETRIES: u32 = 100;

/// Why an abundance has no interior MLE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `K = n`: the likelihood increases without bound.
    AllDistinct,
    /// `K` equals the number of samples: the likelihood peaks at ψ = 0.
    AllIdentical,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::AllDistinct => f.write_str("MLE diverges to +inf: every observation is distinct"),
            Boundary::AllIdentical => {
                f.write_str("MLE is 0, outside parameter space: all observations are identical")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiEstimate {
    pub psi_hat: Psi,
    pub n: u64,
    pub species: u64,
    pub iterations: u32,
    /// `|K − Σ expected_species(ψ̂, n_j)|`
    pub residual: f64,
}

/// `Σ_{i=1}^{n} ψ/(ψ + i − 1)`, the expected number of species in a sample
/// of size `n`.
pub fn expected_species(psi: Psi, n: u64) -> f64 {
    let psi = psi.get();
    expected_species_raw(psi, n)
}

fn expected_species_raw(psi: f64, n: u64) -> f64 {
    (0..n).map(|i| psi / (psi + i as f64)).sum()
}

pub fn mle_psi(abund: &Abundance) -> Result<PsiEstimate> {
    mle_psi_pooled(std::slice::from_ref(abund))
}

/// Shared ψ for several independent samples: solves
/// `Σ_j K_j = Σ_j expected_species(ψ, n_j)`.
pub fn mle_psi_pooled(abunds: &[Abundance]) -> Result<PsiEstimate> {
    if abunds.is_empty() {
        return Err(Error::TooFewSamples {
            got: 0,
            required: 1,
        });
    }
    for (index, a) in abunds.iter().enumerate() {
        if a.n() < 2 {
            let err = Error::TooFewObservations {
                n: a.n(),
                required: 2,
            };
            return Err(if abunds.len() == 1 {
                err
            } else {
                Error::InSample {
                    index,
                    source: Box::new(err),
                }
            });
        }
    }
    let sizes: Vec<u64> = abunds.iter().map(Abundance::n).collect();
    let n: u64 = sizes.iter().sum();
    let k: u64 = abunds.iter().map(Abundance::species).sum();
    let boundary = |boundary| Error::Boundary { boundary, k, n };
    if k == n {
        return Err(boundary(Boundary::AllDistinct));
    }
    if k == abunds.len() as u64 {
        return Err(boundary(Boundary::AllIdentical));
    }

    let target = k as f64;
    let f = |psi: f64| -> f64 { sizes.iter().map(|&nj| expected_species_raw(psi, nj)).sum() };

    let mut iterations = 0;
    let mut lo = INITIAL_LOW;
    let mut hi = INITIAL_HIGH;
    while f(hi) < target {
        iterations += 1;
        lo = hi;
        hi *= 2.0;
        if hi > HIGH_CAP {
            return Err(boundary(Boundary::AllDistinct));
        }
    }

    loop {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let value = f(mid);
        let residual = (value - target).abs();
        if residual <= RELATIVE_TOLERANCE * target
            || hi - lo <= BRACKET_TOLERANCE * mid
            || iterations >= MAX_ITERATIONS
        {
            return Ok(PsiEstimate {
                psi_hat: Psi::new(mid)?,
                n,
                species: k,
                iterations,
                residual,
            });
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub level: f64,
    pub rounds: usize,
    pub frac: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            level: 0.95,
            rounds: 1000,
            frac: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCI {
    pub psi_hat: Psi,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub rounds: usize,
    pub frac: f64,
    /// Subsamples discarded because they had no interior MLE.
    pub degenerate_resamples: u64,
}

/// Percentile interval for ψ̂ from `rounds` subsamples drawn without
/// replacement, each of size `max(2, ⌊frac·n⌋)`.
///
/// Round `r` draws from `seed.derive(r)`, so the result does not depend on
/// how rounds are scheduled across threads.
pub fn bootstrap_ci(sample: &Sample, config: BootstrapConfig, seed: Seed) -> Result<BootstrapCI> {
    let BootstrapConfig { level, rounds, frac } = config;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {level}")));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidArgument(format!("frac must lie in (0, 1], got {frac}")));
    }
    if rounds < 2 {
        return Err(Error::InvalidArgument(format!("rounds must be at least 2, got {rounds}")));
    }
    let n = sample.len();
    if n < 3 {
        return Err(Error::TooFewObservations {
            n: n as u64,
            required: 3,
        });
    }

    let psi_hat = mle_psi(&sample.abundance())?.psi_hat;

    let ids = dense_ids(sample);
    let species = ids.iter().max().map_or(0, |&m| m as usize + 1);
    let m = ((frac * n as f64).floor() as usize).clamp(2, n);

    let outcomes: Vec<(Option<f64>, u64)> = (0..rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = seed.derive(round as u64).rng();
            let mut counts = vec![0u64; species];
            let mut degenerate = 0;
            for _ in 0..MAX_RESAMPLE_RETRIES {
                counts.iter_mut().for_each(|c| *c = 0);
                for i in index::sample(&mut rng, n, m) {
                    counts[ids[i] as usize] += 1;
                }
                let abund = Abundance::from_species_counts(counts.iter().copied());
                match mle_psi(&abund) {
                    Ok(est) => return (Some(est.psi_hat.get()), degenerate),
                    Err(Error::Boundary { .. }) => degenerate += 1,
                    Err(_) => unreachable!("subsample size is at least 2"),
                }
            }
            (None, degenerate)
        })
        .collect();

    let degenerate_resamples: u64 = outcomes.iter().map(|(_, d)| d).sum();
    let mut estimates: Vec<f64> = outcomes.iter().filter_map(|(e, _)| *e).collect();
    if estimates.len() < rounds {
        return Err(Error::BootstrapExhausted {
            degenerate: degenerate_resamples,
            rounds,
        });
    }
    estimates.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok(BootstrapCI {
        psi_hat,
        lower: quantile_sorted(&estimates, alpha / 2.0),
        upper: quantile_sorted(&estimates, 1.0 - alpha / 2.0),
        level,
        rounds,
        frac,
        degenerate_resamples,
    })
}

/// Maps tokens to `0..K` so resamples can be tallied in a flat array.
fn dense_ids(sample: &Sample) -> Vec<u32> {
    let mut ids = HashMap::new();
    sample
        .values()
        .iter()
        .map(|v| {
            let next = ids.len() as u32;
            *ids.entry(v).or_insert(next)
        })
        .collect()
}

/// Linear interpolation between order statistics at `h = (len − 1)·p`.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
