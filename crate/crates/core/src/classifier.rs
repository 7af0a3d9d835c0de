//! Supervised predictive classification under partition exchangeability.
//!
//! Each (class, feature) slice of the training data is modelled as a
//! Poisson-Dirichlet sample with its own ψ̂. Given `m` training values in the
//! slice, a test value seen `m_v` times has predictive probability
//! `m_v / (m + ψ̂)`; an unseen value has `ψ̂ / (m + ψ̂)`. Features combine by
//! summing log-probabilities, and classes get a uniform prior.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esf::Psi;
use crate::estimation::mle_psi;
use crate::partition::{Abundance, Token};

pub const MODEL_FORMAT: &str = "partex-classifier";
pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Training statistics of one feature within one class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClassModel {
    frequencies: HashMap<Token, u64>,
    m: u64,
    psi_hat: Psi,
}

impl FeatureClassModel {
    pub fn new(frequencies: HashMap<Token, u64>, psi_hat: Psi) -> Result<Self> {
        if let Some((token, _)) = frequencies.iter().find(|(_, &c)| c == 0) {
            return Err(Error::Model(format!("token {token} has a zero count")));
        }
        let m = frequencies.values().sum();
        if m == 0 {
            return Err(Error::Model("feature model has no training values".to_owned()));
        }
        Ok(FeatureClassModel {
            frequencies,
            m,
            psi_hat,
        })
    }

    fn fit<'a, I: IntoIterator<Item = &'a Token>>(tokens: I) -> Result<Self> {
        let mut frequencies = HashMap::new();
        for t in tokens {
            *frequencies.entry(t.clone()).or_insert(0) += 1;
        }
        let abund = Abundance::from_species_counts(frequencies.values().copied());
        let psi_hat = mle_psi(&abund)?.psi_hat;
        Ok(FeatureClassModel {
            m: abund.n(),
            frequencies,
            psi_hat,
        })
    }

    pub fn frequencies(&self) -> &HashMap<Token, u64> {
        &self.frequencies
    }

    pub fn count(&self, token: &Token) -> u64 {
        self.frequencies.get(token).copied().unwrap_or(0)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn psi_hat(&self) -> Psi {
        self.psi_hat
    }

    /// Log predictive probability after adding `extra_count` copies of
    /// `token` and `extra_m` observations in total to the training slice.
    fn augmented_log_prob(&self, token: &Token, extra_count: u64, extra_m: u64) -> f64 {
        let count = self.count(token) + extra_count;
        let denom = (self.m + extra_m) as f64 + self.psi_hat.get();
        if count == 0 {
            (self.psi_hat.get() / denom).ln()
        } else {
            (count as f64 / denom).ln()
        }
    }
}

/// `ln(ψ̂/(m+ψ̂))` for an unseen token, `ln(m_token/(m+ψ̂))` otherwise.
pub fn predictive_log_prob(model: &FeatureClassModel, token: &Token) -> f64 {
    model.augmented_log_prob(token, 0, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    classes: Vec<String>,
    /// Indexed `[class][feature]`.
    models: Vec<Vec<FeatureClassModel>>,
}

/// Output of [`classify_simultaneous`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimultaneousLabels {
    pub labels: Vec<String>,
    pub sweeps: usize,
    pub converged: bool,
}

impl ClassifierModel {
    /// Sorted distinct class labels; earlier labels win ties.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.models[0].len()
    }

    pub fn feature_model(&self, class: usize, feature: usize) -> &FeatureClassModel {
        &self.models[class][feature]
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    fn check_rows(&self, rows: &[Vec<Token>]) -> Result<()> {
        let expected = self.n_features();
        match rows.iter().position(|r| r.len() != expected) {
            Some(row) => Err(Error::FeatureCount {
                expected,
                found: rows[row].len(),
                row,
            }),
            None => Ok(()),
        }
    }

    fn marginal_index(&self, row: &[Token]) -> usize {
        argmax((0..self.classes.len()).map(|c| {
            row.iter()
                .zip(&self.models[c])
                .map(|(t, fm)| predictive_log_prob(fm, t))
                .sum()
        }))
    }

    pub fn to_document(&self) -> ModelDocument {
        let classes = self
            .classes
            .iter()
            .zip(&self.models)
            .map(|(label, features)| ClassDocument {
                label: label.clone(),
                features: features
                    .iter()
                    .map(|fm| {
                        let mut frequencies: Vec<(Token, u64)> =
                            fm.frequencies.iter().map(|(t, &c)| (t.clone(), c)).collect();
                        frequencies.sort();
                        FeatureDocument {
                            m: fm.m,
                            psi_hat: fm.psi_hat,
                            frequencies,
                        }
                    })
                    .collect(),
            })
            .collect();
        ModelDocument {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            n_features: self.n_features(),
            classes,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.format != MODEL_FORMAT {
            return Err(Error::Model(format!(
                "expected format {MODEL_FORMAT:?}, found {:?}",
                doc.format
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {} (this build reads version {MODEL_VERSION})",
                doc.version
            )));
        }
        if doc.classes.len() < 2 {
            return Err(Error::TooFewClasses(doc.classes.len()));
        }
        if doc.n_features == 0 {
            return Err(Error::Model("model has no features".to_owned()));
        }
        if !doc.classes.windows(2).all(|w| w[0].label < w[1].label) {
            return Err(Error::Model("class labels must be distinct and sorted".to_owned()));
        }
        let mut classes = Vec::with_capacity(doc.classes.len());
        let mut models = Vec::with_capacity(doc.classes.len());
        for class in doc.classes {
            if class.features.len() != doc.n_features {
                return Err(Error::Model(format!(
                    "class {:?} has {} features, expected {}",
                    class.label,
                    class.features.len(),
                    doc.n_features
                )));
            }
            let features = class
                .features
                .into_iter()
                .map(|f| {
                    let declared = f.m;
                    let fm = FeatureClassModel::new(f.frequencies.into_iter().collect(), f.psi_hat)?;
                    if fm.m != declared {
                        return Err(Error::Model(format!(
                            "declared m = {declared} but counts sum to {}",
                            fm.m
                        )));
                    }
                    Ok(fm)
                })
                .collect::<Result<Vec<_>>>()?;
            classes.push(class.label);
            models.push(features);
        }
        Ok(ClassifierModel { classes, models })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        Self::from_document(doc)
    }
}

/// Versioned on-disk form of a [`ClassifierModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub n_features: usize,
    pub classes: Vec<ClassDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDocument {
    pub label: String,
    pub features: Vec<FeatureDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDocument {
    pub m: u64,
    pub psi_hat: Psi,
    /// `(token, count)` pairs sorted by token.
    pub frequencies: Vec<(Token, u64)>,
}

/// First index of the maximum; NaN never wins.
fn argmax<I: IntoIterator<Item = f64>>(scores: I) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.into_iter().enumerate() {
        if s > best_score || i == 0 {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Fits per-class, per-feature models. `points` holds one row per
/// observation; every row must have the same, nonzero number of features.
pub fn fit<S: AsRef<str>>(points: &[Vec<Token>], labels: &[S]) -> Result<ClassifierModel> {
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            labels: labels.len(),
        });
    }
    let n_features = points.first().map_or(0, Vec::len);
    if n_features == 0 {
        return Err(Error::InvalidArgument("training data has no features".to_owned()));
    }
    if let Some(row) = points.iter().position(|r| r.len() != n_features) {
        return Err(Error::FeatureCount {
            expected: n_features,
            found: points[row].len(),
            row,
        });
    }

    let mut by_class: BTreeMap<&str, Vec<&[Token]>> = BTreeMap::new();
    for (row, label) in points.iter().zip(labels) {
        by_class.entry(label.as_ref()).or_default().push(row);
    }
    if by_class.len() < 2 {
        return Err(Error::TooFewClasses(by_class.len()));
    }

    let mut classes = Vec::with_capacity(by_class.len());
    let mut models = Vec::with_capacity(by_class.len());
    for (label, rows) in by_class {
        let features = (0..n_features)
            .map(|f| {
                FeatureClassModel::fit(rows.iter().map(|r| &r[f])).map_err(|e| Error::Slice {
                    class: label.to_owned(),
                    feature: f,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        classes.push(label.to_owned());
        models.push(features);
    }
    Ok(ClassifierModel { classes, models })
}

/// Labels each row independently by maximum predictive probability.
pub fn classify_marginal(model: &ClassifierModel, test: &[Vec<Token>]) -> Result<Vec<String>> {
    model.check_rows(test)?;
    Ok(test
        .iter()
        .map(|row| model.classes[model.marginal_index(row)].clone())
        .collect())
}

/// Joint labeling: starts from [`classify_marginal`] and sweeps the test
/// rows in order, reassigning each row given the others' current labels,
/// until a sweep changes nothing or [`DEFAULT_MAX_SWEEPS`] is reached.
pub fn classify_simultaneous(
    model: &ClassifierModel,
    test: &[Vec<Token>],
) -> Result<SimultaneousLabels> {
    let initial = classify_marginal(model, test)?;
    classify_simultaneous_from(model, test, &initial, DEFAULT_MAX_SWEEPS)
}

/// Simultaneous sweeps from an explicit starting labeling.
///
/// While row `i` is scored, every other test row currently labeled `c` is
/// added to class `c`'s training counts. Training ψ̂ values stay fixed.
pub fn classify_simultaneous_from<S: AsRef<str>>(
    model: &ClassifierModel,
    test: &[Vec<Token>],
    initial: &[S],
    max_sweeps: usize,
) -> Result<SimultaneousLabels> {
    model.check_rows(test)?;
    if initial.len() != test.len() {
        return Err(Error::LengthMismatch {
            points: test.len(),
            labels: initial.len(),
        });
    }
    let mut current = initial
        .iter()
        .map(|l| {
            model
                .class_index(l.as_ref())
                .ok_or_else(|| Error::InvalidArgument(format!("unknown class label {:?}", l.as_ref())))
        })
        .collect::<Result<Vec<usize>>>()?;

    let n_classes = model.classes.len();
    let n_features = model.n_features();
    // test rows per class, and their token counts per class and feature
    let mut assigned = vec![0u64; n_classes];
    let mut counts: Vec<Vec<HashMap<&Token, u64>>> = vec![vec![HashMap::new(); n_features]; n_classes];
    for (row, &c) in test.iter().zip(&current) {
        assigned[c] += 1;
        for (f, t) in row.iter().enumerate() {
            *counts[c][f].entry(t).or_insert(0) += 1;
        }
    }

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for (i, row) in test.iter().enumerate() {
            let own = current[i];
            let best = argmax((0..n_classes).map(|c| {
                let self_term = u64::from(c == own);
                row.iter()
                    .enumerate()
                    .map(|(f, t)| {
                        let extra = counts[c][f].get(t).copied().unwrap_or(0) - self_term;
                        model.models[c][f].augmented_log_prob(t, extra, assigned[c] - self_term)
                    })
                    .sum()
            }));
            if best != own {
                changed = true;
                assigned[own] -= 1;
                assigned[best] += 1;
                for (f, t) in row.iter().enumerate() {
                    let slot = counts[own][f].get_mut(t).expect("row is counted in its class");
                    *slot -= 1;
                    if *slot == 0 {
                        counts[own][f].remove(t);
                    }
                    *counts[best][f].entry(t).or_insert(0) += 1;
                }
                current[i] = best;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    Ok(SimultaneousLabels {
        labels: current.into_iter().map(|c| model.classes[c].clone()).collect(),
        sweeps,
        converged,
    })
}
