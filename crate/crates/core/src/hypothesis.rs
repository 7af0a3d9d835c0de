//! Hypothesis tests on ψ and on the shape of the distribution.
//!
//! * [`score_test`]: Lagrange multiplier test of `ψ = ψ₀`, `S = U(ψ₀)²/I(ψ₀)`
//!   against χ²₁.
//! * [`lrt_samples`]: likelihood-ratio test that `d` samples share one ψ,
//!   against χ²_{d−1}. The two-sample test is the `d = 2` case.
//! * [`watterson_test`]: homozygosity statistic `W = Σ n_i²/n` compared with
//!   its distribution under urn samples at the fitted ψ̂.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::esf::{log_rising_factorial, Psi, PsiSpec};
use crate::estimation::{mle_psi, mle_psi_pooled};
use crate::partition::{Abundance, Sample};
use crate::urn::{urn_labels, Seed};

pub const MIN_WATTERSON_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StatisticName {
    S,
    Lambda,
    W,
}

impl fmt::Display for StatisticName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatisticName::S => "S",
            StatisticName::Lambda => "Lambda",
            StatisticName::W => "W",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic_name: StatisticName,
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<u32>,
    pub extras: BTreeMap<String, f64>,
}

/// `U(ψ) = K/ψ − Σ_{i=0}^{n−1} 1/(ψ+i)`, the derivative in ψ of the
/// log-likelihood `K ln ψ − Σ ln(ψ+i)`.
pub fn score_function(psi: Psi, abund: &Abundance) -> f64 {
    let p = psi.get();
    abund.species() as f64 / p - (0..abund.n()).map(|i| 1.0 / (p + i as f64)).sum::<f64>()
}

/// Expected information `I(ψ) = Σ_{i=0}^{n−1} i / (ψ (ψ+i)²)`.
pub fn fisher_information(psi: Psi, n: u64) -> f64 {
    let p = psi.get();
    (1..n)
        .map(|i| {
            let i = i as f64;
            i / (p * (p + i) * (p + i))
        })
        .sum()
}

/// ψ-dependent part of the log-likelihood; the remaining ESF terms cancel in
/// every ratio this module forms.
fn log_likelihood(psi: Psi, abund: &Abundance) -> f64 {
    abund.species() as f64 * psi.get().ln() - log_rising_factorial(psi, abund.n())
}

/// `P(χ²_df > x)`, via the regularized upper incomplete gamma `Q(df/2, x/2)`.
pub fn chisq_upper_tail(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs at least one degree of freedom");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

pub fn score_test(abund: &Abundance, psi0: PsiSpec) -> Result<TestResult> {
    let n = abund.n();
    if n < 2 {
        return Err(Error::TooFewObservations { n, required: 2 });
    }
    let psi0 = psi0.resolve(n)?;
    let u = score_function(psi0, abund);
    let s = u * u / fisher_information(psi0, n);
    let mut extras = BTreeMap::new();
    extras.insert("psi0".to_owned(), psi0.get());
    extras.insert("score".to_owned(), u);
    extras.insert("n".to_owned(), n as f64);
    extras.insert("K".to_owned(), abund.species() as f64);
    Ok(TestResult {
        statistic_name: StatisticName::S,
        statistic: s,
        p_value: chisq_upper_tail(s, 1),
        df: Some(1),
        extras,
    })
}

/// `Λ = −2 [ Σ_j l_j(ψ̂) − Σ_j l_j(ψ̂_j) ]` with ψ̂ the pooled estimate.
pub fn lrt_samples(abunds: &[Abundance]) -> Result<TestResult> {
    let d = abunds.len();
    if d < 2 {
        return Err(Error::TooFewSamples { got: d, required: 2 });
    }
    let separate = abunds
        .iter()
        .enumerate()
        .map(|(index, a)| {
            mle_psi(a).map(|e| e.psi_hat).map_err(|e| Error::InSample {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<Psi>>>()?;
    let shared = mle_psi_pooled(abunds)?.psi_hat;

    let null: f64 = abunds.iter().map(|a| log_likelihood(shared, a)).sum();
    let alternative: f64 = abunds
        .iter()
        .zip(&separate)
        .map(|(a, &p)| log_likelihood(p, a))
        .sum();
    // tiny negatives come from solver tolerance
    let lambda = (-2.0 * (null - alternative)).max(0.0);
    let df = (d - 1) as u32;

    let mut extras = BTreeMap::new();
    extras.insert("psi_hat_shared".to_owned(), shared.get());
    for (j, p) in separate.iter().enumerate() {
        extras.insert(format!("psi_hat_{}", j + 1), p.get());
    }
    Ok(TestResult {
        statistic_name: StatisticName::Lambda,
        statistic: lambda,
        p_value: chisq_upper_tail(lambda, df),
        df: Some(df),
        extras,
    })
}

pub fn lrt_two_samples(first: &Abundance, second: &Abundance) -> Result<TestResult> {
    lrt_samples(&[first.clone(), second.clone()])
}

/// `W = Σ n_i² / n` over the frequencies `n_i` of distinct values.
pub fn watterson_statistic(sample: &Sample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(abundance_watterson(&sample.abundance()))
}

fn abundance_watterson(abund: &Abundance) -> f64 {
    abund.sum_squared_frequencies() as f64 / abund.n() as f64
}

fn urn_watterson(n: usize, psi: Psi, seed: Seed) -> f64 {
    let labels = urn_labels(n, psi, &mut seed.rng());
    let species = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; species + 1];
    for l in labels {
        counts[l as usize] += 1;
    }
    counts.iter().map(|c| c * c).sum::<u64>() as f64 / n as f64
}

/// Two-sided empirical test of the PD shape.
///
/// Simulates `rounds` urn samples of the observed size at the observed ψ̂
/// (round `r` uses `seed.derive(r)`). With `L` simulated values strictly
/// below the observed `W` and `G` strictly above it, the tails are
/// `(L+1)/(rounds+1)` and `(G+1)/(rounds+1)` and the p-value is twice the
/// smaller one, capped at 1.
pub fn watterson_test(sample: &Sample, rounds: usize, seed: Seed) -> Result<TestResult> {
    if rounds < MIN_WATTERSON_ROUNDS {
        return Err(Error::InvalidArgument(format!(
            "rounds must be at least {MIN_WATTERSON_ROUNDS}, got {rounds}"
        )));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let abund = sample.abundance();
    let psi_hat = mle_psi(&abund)
        .map_err(|e| Error::ShapeTest(Box::new(e)))?
        .psi_hat;
    let observed = abundance_watterson(&abund);
    let n = sample.len();

    let simulated: Vec<f64> = (0..rounds)
        .into_par_iter()
        .map(|r| urn_watterson(n, psi_hat, seed.derive(r as u64)))
        .collect();
    let below = simulated.iter().filter(|&&w| w < observed).count();
    let above = simulated.iter().filter(|&&w| w > observed).count();
    let denom = (rounds + 1) as f64;
    let lower_tail = (below + 1) as f64 / denom;
    let upper_tail = (above + 1) as f64 / denom;
    let p_value = (2.0 * lower_tail.min(upper_tail)).min(1.0);

    let mut extras = BTreeMap::new();
    extras.insert("psi_hat".to_owned(), psi_hat.get());
    extras.insert("rounds".to_owned(), rounds as f64);
    extras.insert("simulated_below".to_owned(), below as f64);
    extras.insert("simulated_above".to_owned(), above as f64);
    Ok(TestResult {
        statistic_name: StatisticName::W,
        statistic: observed,
        p_value,
        df: None,
        extras,
    })
}
