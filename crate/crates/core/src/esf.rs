//! Ewens sampling formula.
//!
//! For an abundance `a` of size `n` and dispersal `ψ`:
//!
//! ```text
//! P(a; ψ) = n! · Π_j ψ^{a_j} / (j^{a_j} · a_j!) / (ψ)_(n)
//! ```
//!
//! where `(ψ)_(n) = ψ(ψ+1)…(ψ+n−1)`. Everything is evaluated in natural-log
//! space since `n!` overflows an `f64` at `n = 171`.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::partition::Abundance;

/// A positive, finite dispersal parameter.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Psi(f64);

impl Psi {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Psi(value))
        } else {
            Err(Error::InvalidPsi(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Psi {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Psi::new(value)
    }
}

impl From<Psi> for f64 {
    fn from(p: Psi) -> f64 {
        p.0
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How a caller names ψ: the absolute default `1`, the sample size `n`, or
/// an explicit value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiSpec {
    Absolute,
    Relative,
    Explicit(Psi),
}

impl PsiSpec {
    /// Resolves against a sample size. `Relative` needs `n ≥ 1`.
    pub fn resolve(self, n: u64) -> Result<Psi> {
        match self {
            PsiSpec::Absolute => Ok(Psi(1.0)),
            PsiSpec::Relative if n >= 1 => Ok(Psi(n as f64)),
            PsiSpec::Relative => Err(Error::UnresolvedRelativePsi),
            PsiSpec::Explicit(p) => Ok(p),
        }
    }
}

impl From<Psi> for PsiSpec {
    fn from(p: Psi) -> Self {
        PsiSpec::Explicit(p)
    }
}

impl std::str::FromStr for PsiSpec {
    type Err = Error;

    /// Accepts `"a"`, `"r"`, or a positive number.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(PsiSpec::Absolute),
            "r" => Ok(PsiSpec::Relative),
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    Error::InvalidArgument(format!("psi must be \"a\", \"r\" or a number, got {other:?}"))
                })?;
                Psi::new(v).map(PsiSpec::Explicit)
            }
        }
    }
}

/// `Σ_{i=0}^{n-1} ln(ψ + i)`, the log of the rising factorial `(ψ)_(n)`.
pub fn log_rising_factorial(psi: Psi, n: u64) -> f64 {
    let psi = psi.get();
    (0..n).map(|i| (psi + i as f64).ln()).sum()
}

pub fn esf_log_probability(abund: &Abundance, psi: PsiSpec) -> Result<f64> {
    let n = abund.n();
    if n == 0 {
        return Err(Error::EmptyPartition);
    }
    let psi = psi.resolve(n)?;
    let ln_psi = psi.get().ln();
    let mut logp = ln_gamma(n as f64 + 1.0) - log_rising_factorial(psi, n);
    for (j, a) in abund.iter() {
        let a = a as f64;
        logp += a * ln_psi - a * (j as f64).ln() - ln_gamma(a + 1.0);
    }
    Ok(logp)
}

pub fn esf_probability(abund: &Abundance, psi: PsiSpec) -> Result<f64> {
    esf_log_probability(abund, psi).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;

    fn psi(v: f64) -> PsiSpec {
        PsiSpec::Explicit(Psi::new(v).unwrap())
    }

    fn ab(entries: &[(u64, u64)]) -> Abundance {
        Abundance::from_entries(entries.iter().copied()).unwrap()
    }

    #[test]
    fn psi_validation() {
        assert!(Psi::new(0.0).is_err());
        assert!(Psi::new(-1.0).is_err());
        assert!(Psi::new(f64::INFINITY).is_err());
        assert!(Psi::new(f64::NAN).is_err());
        assert_eq!(Psi::new(2.5).unwrap().get(), 2.5);
    }

    #[test]
    fn psi_spec_parsing_and_resolution() {
        assert_eq!("a".parse::<PsiSpec>().unwrap(), PsiSpec::Absolute);
        assert_eq!("r".parse::<PsiSpec>().unwrap(), PsiSpec::Relative);
        assert_eq!("2.5".parse::<PsiSpec>().unwrap(), psi(2.5));
        assert!("-3".parse::<PsiSpec>().is_err());
        assert!("x".parse::<PsiSpec>().is_err());
        assert_eq!(PsiSpec::Absolute.resolve(7).unwrap().get(), 1.0);
        assert_eq!(PsiSpec::Relative.resolve(50).unwrap().get(), 50.0);
        assert_eq!(PsiSpec::Relative.resolve(0), Err(Error::UnresolvedRelativePsi));
    }

    #[test]
    fn rising_factorial_values() {
        let p = |v| Psi::new(v).unwrap();
        assert!((log_rising_factorial(p(1.0), 3) - 6f64.ln()).abs() < 1e-14);
        assert!((log_rising_factorial(p(2.0), 1) - 2f64.ln()).abs() < 1e-14);
        let direct = (0.5f64 * 1.5 * 2.5 * 3.5).ln();
        assert!((log_rising_factorial(p(0.5), 4) - direct).abs() < 1e-14);
        assert_eq!(log_rising_factorial(p(3.0), 0), 0.0);
    }

    #[test]
    fn small_closed_forms() {
        assert!(esf_log_probability(&ab(&[(1, 1)]), psi(123.0)).unwrap().abs() < 1e-14);
        let same = esf_log_probability(&ab(&[(2, 1)]), psi(3.0)).unwrap();
        assert!((same - 0.25f64.ln()).abs() < 1e-12);
        let distinct = esf_log_probability(&ab(&[(1, 2)]), psi(3.0)).unwrap();
        assert!((distinct - 0.75f64.ln()).abs() < 1e-12);

        assert!((esf_probability(&ab(&[(1, 1)]), psi(5.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((esf_probability(&ab(&[(2, 1)]), PsiSpec::Absolute).unwrap() - 0.5).abs() < 1e-12);
        assert!((esf_probability(&ab(&[(1, 2)]), psi(1.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_abundance_errors() {
        assert_eq!(
            esf_log_probability(&Abundance::default(), PsiSpec::Absolute),
            Err(Error::EmptyPartition)
        );
    }

    #[test]
    fn relative_uses_sample_size() {
        let a = ab(&[(1, 2), (3, 1)]);
        assert_eq!(
            esf_log_probability(&a, PsiSpec::Relative).unwrap(),
            esf_log_probability(&a, psi(5.0)).unwrap()
        );
    }

    #[test]
    fn normalizes_over_all_partitions() {
        for n in 1..=8 {
            for &v in &[0.5, 1.0, 5.0] {
                let total: f64 = enumerate_partitions(n)
                    .unwrap()
                    .iter()
                    .map(|p| esf_probability(&p.abundance(), psi(v)).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-10, "n={n} psi={v} total={total}");
            }
        }
    }

    #[test]
    fn all_distinct_increases_with_psi() {
        for n in [2u64, 5, 20] {
            let a = ab(&[(1, n)]);
            let grid: Vec<f64> = (-10..=20).map(|k| 2f64.powi(k)).collect();
            let probs: Vec<f64> = grid
                .iter()
                .map(|&v| esf_log_probability(&a, psi(v)).unwrap())
                .collect();
            assert!(probs.windows(2).all(|w| w[1] > w[0]), "n={n}");
        }
    }

    #[test]
    fn log_values_stay_finite_at_scale() {
        let cases = [
            ab(&[(10_000, 1)]),
            ab(&[(1, 10_000)]),
            ab(&[(1, 5000), (5, 1000)]),
        ];
        for a in &cases {
            for &v in &[1e-3, 1.0, 1e3, 1e6] {
                let lp = esf_log_probability(a, psi(v)).unwrap();
                assert!(lp.is_finite() && lp <= 1e-9, "{lp}");
            }
        }
    }
}
