//! Reasoning-by-elimination analysis.
//!
//! A clause can describe its target by the features that are present or by
//! the features that are absent. Counting included original vs. negated
//! literals over the positive-weight clauses quantifies which regime a
//! trained model landed in, and sweeping `(s, T)` setups shows how the two
//! hyperparameters steer it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{MultiClassifier, TrainParams};
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::CoalescedModel;
use crate::rng::mix_seed;

/// Clause filter by weight sign. Zero-weight clauses are never counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
    Both,
}

impl Polarity {
    fn matches(self, weight: i32) -> bool {
        match self {
            Polarity::Positive => weight > 0,
            Polarity::Negative => weight < 0,
            Polarity::Both => weight != 0,
        }
    }
}

/// Included-literal occurrences split into (original, negated) counts over
/// the clauses matching `polarity`, with multiplicity across clauses.
///
/// `top_k` restricts the count to the k matching clauses of largest weight
/// magnitude (ties by clause id); larger than `n` clamps to `n`.
pub fn count_features(
    model: &CoalescedModel,
    polarity: Polarity,
    top_k: Option<usize>,
) -> (usize, usize) {
    let mut selected: Vec<usize> = model
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| polarity.matches(w))
        .map(|(j, _)| j)
        .collect();
    if let Some(k) = top_k {
        selected.sort_by_key(|&j| (std::cmp::Reverse(model.weights()[j].unsigned_abs()), j));
        selected.truncate(k.min(model.bank().clauses()));
    }
    let m = model.vocab_size();
    let mut original = 0usize;
    let mut negated = 0usize;
    for j in selected {
        for k in model.bank().included_literals(j).expect("clause in range") {
            if k < m {
                original += 1;
            } else {
                negated += 1;
            }
        }
    }
    (original, negated)
}

/// [`count_features`] summed over every per-class model of a classifier.
pub fn count_classifier_features(
    clf: &MultiClassifier,
    polarity: Polarity,
    top_k: Option<usize>,
) -> (usize, usize) {
    clf.models()
        .iter()
        .map(|m| count_features(m, polarity, top_k))
        .fold((0, 0), |(ao, an), (o, n)| (ao + o, an + n))
}

/// Share of negated literals among all counted inclusions.
pub fn rbe_ratio(n_original: usize, n_negated: usize) -> f64 {
    n_negated as f64 / (n_original + n_negated).max(1) as f64
}

/// One `(s, T)` configuration of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbeSetup {
    pub specificity: f64,
    pub margin: i64,
}

/// Clause-composition report for one trained setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbeReport {
    pub setup: RbeSetup,
    pub n_original: usize,
    pub n_negated: usize,
    pub rbe_ratio: f64,
    pub accuracy: Option<f64>,
    pub seed: u64,
}

/// Grid reports plus per-setup failures; a failing cell does not abort the
/// grid.
#[derive(Debug)]
pub struct RbeGridOutcome {
    pub reports: Vec<RbeReport>,
    pub failures: Vec<(RbeSetup, Error)>,
}

/// Trains one classifier per `(s, T)` setup and reports included-feature
/// counts over positive-weight clauses plus test accuracy.
///
/// Each cell trains with a seed derived from `(seed, setup)`, so cells are
/// decorrelated but duplicate setups reproduce identical rows; cells run
/// concurrently.
pub fn rbe_grid(
    train: &LabeledDataset,
    test: &LabeledDataset,
    setups: &[RbeSetup],
    base: &TrainParams,
    seed: u64,
) -> Result<RbeGridOutcome> {
    if setups.is_empty() {
        return Err(Error::invalid("setups", "grid needs at least one setup"));
    }
    let cells: Vec<(RbeSetup, Result<RbeReport>)> = setups
        .par_iter()
        .map(|&setup| {
            let salt = setup.specificity.to_bits() ^ (setup.margin as u64).rotate_left(32);
            let cell_seed = mix_seed(seed, salt);
            let outcome = run_cell(train, test, setup, base, cell_seed);
            (setup, outcome)
        })
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (setup, outcome) in cells {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push((setup, e)),
        }
    }
    Ok(RbeGridOutcome { reports, failures })
}

fn run_cell(
    train: &LabeledDataset,
    test: &LabeledDataset,
    setup: RbeSetup,
    base: &TrainParams,
    seed: u64,
) -> Result<RbeReport> {
    let mut params = base.clone();
    params.model.specificity = setup.specificity;
    params.model.margin = setup.margin;
    let clf = MultiClassifier::train(train, &params, seed)?;
    let accuracy = clf.accuracy(test)?;
    let (n_original, n_negated) = count_classifier_features(&clf, Polarity::Positive, None);
    Ok(RbeReport {
        setup,
        n_original,
        n_negated,
        rbe_ratio: rbe_ratio(n_original, n_negated),
        accuracy: Some(accuracy),
        seed,
    })
}

/// Report CSV: `s,T,n_original,n_negated,rbe_ratio,accuracy,seed,dataset`.
pub fn write_rbe_csv<W: Write>(reports: &[RbeReport], dataset: &str, mut w: W) -> Result<()> {
    writeln!(w, "s,T,n_original,n_negated,rbe_ratio,accuracy,seed,dataset")?;
    for r in reports {
        let acc = r
            .accuracy
            .map_or(String::new(), |a| format!("{a}"));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.setup.specificity,
            r.setup.margin,
            r.n_original,
            r.n_negated,
            r.rbe_ratio,
            acc,
            r.seed,
            dataset
        )?;
    }
    Ok(())
}
