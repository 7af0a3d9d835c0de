//! Samples, abundance vectors and integer partitions.
//!
//! An [`Abundance`] is the frequencies-of-frequencies summary of a sample:
//! entry `j -> a_j` says that `a_j` distinct tokens occur exactly `j` times.
//! It is the sufficient statistic for everything that depends on the
//! dispersal parameter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `n` for [`enumerate_partitions`]; p(25) = 1958.
pub const DEFAULT_ENUMERATION_CAP: u64 = 25;

/// An opaque discrete observation.
///
/// Integer and text tokens never compare equal to each other, even when the
/// text spells the integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Token {
    Int(i64),
    Text(String),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(v) => write!(f, "{v}"),
            Token::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Token {
    fn from(v: i64) -> Self {
        Token::Int(v)
    }
}

impl From<&str> for Token {
    fn from(s: &str) -> Self {
        Token::Text(s.to_owned())
    }
}

impl From<String> for Token {
    fn from(s: String) -> Self {
        Token::Text(s)
    }
}

/// An ordered collection of observations of one feature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sample {
    values: Vec<Token>,
}

impl Sample {
    pub fn new(values: Vec<Token>) -> Self {
        Sample { values }
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(values: I) -> Self {
        Sample::new(values.into_iter().map(Token::Int).collect())
    }

    pub fn from_text<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Sample::new(values.into_iter().map(|s| Token::Text(s.into())).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Token] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Token> {
        self.values
    }

    /// Count of each distinct token.
    pub fn frequencies(&self) -> HashMap<&Token, u64> {
        let mut counts = HashMap::new();
        for v in &self.values {
            *counts.entry(v).or_insert(0) += 1;
        }
        counts
    }

    pub fn distinct_count(&self) -> usize {
        self.frequencies().len()
    }

    pub fn abundance(&self) -> Abundance {
        compute_abundance(self)
    }
}

impl FromIterator<Token> for Sample {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        Sample::new(iter.into_iter().collect())
    }
}

/// Frequencies of frequencies, stored sparsely.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Abundance {
    entries: BTreeMap<u64, u64>,
    n: u64,
    k: u64,
}

impl Abundance {
    /// Builds an abundance from explicit `(frequency, count)` entries.
    ///
    /// Repeated frequencies are merged. Zero frequencies or zero counts are
    /// rejected.
    pub fn from_entries<I: IntoIterator<Item = (u64, u64)>>(entries: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (frequency, count) in entries {
            if frequency == 0 || count == 0 {
                return Err(Error::InvalidAbundance { frequency, count });
            }
            *map.entry(frequency).or_insert(0) += count;
        }
        Ok(Self::from_map(map))
    }

    /// Builds an abundance from per-species counts; zero counts are ignored.
    pub fn from_species_counts<I: IntoIterator<Item = u64>>(counts: I) -> Self {
        let mut map = BTreeMap::new();
        for c in counts.into_iter().filter(|&c| c > 0) {
            *map.entry(c).or_insert(0) += 1;
        }
        Self::from_map(map)
    }

    /// Abundance of any stream of hashable values.
    pub fn from_values<T, I>(values: I) -> Self
    where
        T: Hash + Eq,
        I: IntoIterator<Item = T>,
    {
        let mut counts: HashMap<T, u64> = HashMap::new();
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
        }
        Self::from_species_counts(counts.into_values())
    }

    fn from_map(entries: BTreeMap<u64, u64>) -> Self {
        let n = entries.iter().map(|(j, a)| j * a).sum();
        let k = entries.values().sum();
        Abundance { entries, n, k }
    }

    /// Sample size, `Σ j·a_j`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of distinct species, `Σ a_j`.
    pub fn species(&self) -> u64 {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Count of species observed exactly `frequency` times.
    pub fn get(&self, frequency: u64) -> u64 {
        self.entries.get(&frequency).copied().unwrap_or(0)
    }

    /// `(frequency, count)` pairs in increasing frequency.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&j, &a)| (j, a))
    }

    /// Sum of squared species frequencies, `Σ j²·a_j`.
    pub fn sum_squared_frequencies(&self) -> u64 {
        self.iter().map(|(j, a)| j * j * a).sum()
    }
}

/// Frequencies of frequencies of a sample.
pub fn compute_abundance(sample: &Sample) -> Abundance {
    Abundance::from_values(sample.values())
}

/// A multiset of positive parts, kept in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerPartition {
    parts: Vec<u64>,
}

impl IntegerPartition {
    /// Canonicalizes `parts` (drops zeros, sorts nonincreasing).
    pub fn new(mut parts: Vec<u64>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn abundance(&self) -> Abundance {
        abundance_of_partition(self)
    }
}

impl From<&Abundance> for IntegerPartition {
    fn from(abund: &Abundance) -> Self {
        let parts = abund
            .iter()
            .rev()
            .flat_map(|(j, a)| std::iter::repeat_n(j, a as usize))
            .collect();
        IntegerPartition { parts }
    }
}

pub fn abundance_of_partition(p: &IntegerPartition) -> Abundance {
    Abundance::from_species_counts(p.parts.iter().copied())
}

/// Every partition of `n`, in reverse lexicographic order
/// (`[4], [3,1], [2,2], [2,1,1], [1,1,1,1]` for `n = 4`).
pub fn enumerate_partitions(n: u64) -> Result<Vec<IntegerPartition>> {
    enumerate_partitions_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_partitions_capped(n: u64, cap: u64) -> Result<Vec<IntegerPartition>> {
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    extend_partitions(n, n, &mut prefix, &mut out);
    Ok(out)
}

fn extend_partitions(
    remaining: u64,
    max_part: u64,
    prefix: &mut Vec<u64>,
    out: &mut Vec<IntegerPartition>,
) {
    if remaining == 0 {
        out.push(IntegerPartition {
            parts: prefix.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        prefix.push(part);
        extend_partitions(remaining - part, part, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab(entries: &[(u64, u64)]) -> Abundance {
        Abundance::from_entries(entries.iter().copied()).unwrap()
    }

    // Euler's pentagonal recurrence, independent of the enumerator.
    fn partition_count(n: usize) -> u64 {
        let mut p = vec![0i64; n + 1];
        p[0] = 1;
        for m in 1..=n {
            let mut total = 0i64;
            let mut k = 1i64;
            loop {
                let g1 = (k * (3 * k - 1) / 2) as usize;
                if g1 > m {
                    break;
                }
                let sign = if k % 2 == 1 { 1 } else { -1 };
                total += sign * p[m - g1];
                let g2 = (k * (3 * k + 1) / 2) as usize;
                if g2 <= m {
                    total += sign * p[m - g2];
                }
                k += 1;
            }
            p[m] = total;
        }
        p[n] as u64
    }

    #[test]
    fn abundance_of_small_vector() {
        let a = Sample::from_ints([1, 2, 2]).abundance();
        assert_eq!(a, ab(&[(1, 1), (2, 1)]));
        assert_eq!(a.species(), 2);
        assert_eq!(a.n(), 3);
    }

    #[test]
    fn abundance_of_empty_sample() {
        let a = Sample::default().abundance();
        assert!(a.is_empty());
        assert_eq!((a.n(), a.species()), (0, 0));
    }

    #[test]
    fn abundance_of_single_species() {
        assert_eq!(Sample::from_ints([5, 5, 5, 5]).abundance(), ab(&[(4, 1)]));
    }

    #[test]
    fn int_and_text_tokens_are_distinct() {
        let s = Sample::new(vec![Token::Int(1), Token::from("1")]);
        assert_eq!(s.abundance(), ab(&[(1, 2)]));
    }

    #[test]
    fn zero_entries_rejected() {
        assert!(Abundance::from_entries([(0, 1)]).is_err());
        assert!(Abundance::from_entries([(2, 0)]).is_err());
    }

    #[test]
    fn partitions_of_small_n() {
        assert_eq!(enumerate_partitions(0).unwrap(), vec![IntegerPartition::new(vec![])]);
        let four: Vec<Vec<u64>> = enumerate_partitions(4)
            .unwrap()
            .into_iter()
            .map(|p| p.parts().to_vec())
            .collect();
        assert_eq!(
            four,
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
        assert_eq!(partition_count(8), 22);
        assert_eq!(enumerate_partitions(8).unwrap().len(), 22);
    }

    #[test]
    fn partition_counts_match_pentagonal_recurrence() {
        for n in 0..=12 {
            let parts = enumerate_partitions(n).unwrap();
            assert_eq!(parts.len() as u64, partition_count(n as usize), "n = {n}");
            assert!(parts.iter().all(|p| p.total() == n));
            let distinct: std::collections::HashSet<_> = parts.iter().collect();
            assert_eq!(distinct.len(), parts.len());
        }
        assert_eq!(enumerate_partitions(25).unwrap().len(), 1958);
    }

    #[test]
    fn enumeration_cap_refuses() {
        assert_eq!(
            enumerate_partitions(26),
            Err(Error::EnumerationCap { n: 26, cap: 25 })
        );
        assert!(enumerate_partitions_capped(30, 30).is_ok());
    }

    #[test]
    fn partition_to_abundance() {
        type Case<'a> = (&'a [u64], &'a [(u64, u64)]);
        let cases: [Case; 3] = [
            (&[3, 1], &[(3, 1), (1, 1)]),
            (&[2, 2], &[(2, 2)]),
            (&[1, 1, 1, 1], &[(1, 4)]),
        ];
        for (parts, expected) in cases {
            let p = IntegerPartition::new(parts.to_vec());
            assert_eq!(p.abundance(), ab(expected));
            assert_eq!(IntegerPartition::from(&p.abundance()), p);
        }
    }

    proptest! {
        #[test]
        fn abundance_matches_sample_counts(values in prop::collection::vec(0i64..20, 0..200)) {
            let s = Sample::from_ints(values.clone());
            let a = s.abundance();
            prop_assert_eq!(a.n() as usize, values.len());
            prop_assert_eq!(a.species() as usize, s.distinct_count());
        }

        #[test]
        fn abundance_is_permutation_invariant(
            values in prop::collection::vec(0i64..10, 0..100),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(
                Sample::from_ints(values).abundance(),
                Sample::from_ints(shuffled).abundance()
            );
        }
    }
}
