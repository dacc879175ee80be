//! Self-supervised single-word embedding.
//!
//! One target word, one model. Each round draws a target value `q`; for
//! `q = 1` a window of documents containing the target is sampled, for
//! `q = 0` a window of documents without it. The union of the sampled
//! documents' features becomes the input vector, and the model is updated
//! toward `q`. After `r` rounds, the clauses and their weights describe the
//! contexts the target word appears in — and, through negated literals, the
//! contexts it avoids.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automata::LiteralVector;
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{CoalescedModel, ModelParams};
use crate::rng::harness_rng;

/// Document store with an inverted feature→documents index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    documents: Vec<Vec<u32>>,
    inverted: Vec<Vec<u32>>,
    vocab_size: usize,
}

impl CorpusIndex {
    /// Indexes documents given as feature-id sets; ids are deduplicated and
    /// sorted.
    pub fn from_documents(documents: Vec<Vec<u32>>, vocab_size: usize) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::invalid("vocab_size", "must be >= 1"));
        }
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut docs = documents;
        for d in &mut docs {
            d.sort_unstable();
            d.dedup();
            if let Some(&bad) = d.iter().find(|&&f| f as usize >= vocab_size) {
                return Err(Error::IndexOutOfBounds {
                    index: bad as usize,
                    len: vocab_size,
                });
            }
        }
        let mut inverted = vec![Vec::new(); vocab_size];
        for (i, d) in docs.iter().enumerate() {
            for &f in d {
                inverted[f as usize].push(i as u32);
            }
        }
        Ok(Self {
            documents: docs,
            inverted,
            vocab_size,
        })
    }

    /// Document presence rows of a labeled dataset, labels dropped.
    pub fn from_dataset(data: &LabeledDataset) -> Result<Self> {
        let docs = data
            .examples()
            .map(|(bits, _)| bits.ones().map(|f| f as u32).collect())
            .collect();
        Self::from_documents(docs, data.vocab_size())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn document(&self, i: usize) -> &[u32] {
        &self.documents[i]
    }

    /// Ids of documents containing feature `f`, ascending.
    pub fn docs_with(&self, f: u32) -> &[u32] {
        &self.inverted[f as usize]
    }

    /// Rebuilds the inverted index from the documents and checks it matches;
    /// the consistency invariant made executable.
    pub fn verify(&self) -> Result<()> {
        let rebuilt = Self::from_documents(self.documents.clone(), self.vocab_size)?;
        if rebuilt.inverted != self.inverted {
            return Err(Error::Internal("inverted index out of sync".into()));
        }
        Ok(())
    }
}

/// Document-window selection: an absolute count per round, or a proportion
/// of the matching pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    Count(usize),
    Proportion(f64),
}

impl Window {
    fn validate(&self) -> Result<()> {
        match *self {
            Window::Count(u) if u >= 1 => Ok(()),
            Window::Count(_) => Err(Error::invalid("window", "count must be >= 1")),
            Window::Proportion(p) if p > 0.0 && p <= 1.0 => Ok(()),
            Window::Proportion(p) => Err(Error::invalid(
                "window",
                format!("proportion must be in (0, 1], got {p}"),
            )),
        }
    }

    fn sample_size(&self, pool: usize) -> usize {
        match *self {
            Window::Count(u) => u.min(pool),
            Window::Proportion(p) => ((p * pool as f64).ceil() as usize).clamp(1, pool),
        }
    }
}

/// Embedding run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    pub model: ModelParams,
    /// Documents sampled per round (`u`).
    pub window: Window,
    /// Training rounds `r`.
    pub rounds: usize,
    /// Probability of drawing target value 1 in a round.
    pub q1_probability: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            window: Window::Count(25),
            rounds: 0,
            q1_probability: 0.5,
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.window.validate()?;
        if !(0.0..=1.0).contains(&self.q1_probability) {
            return Err(Error::invalid(
                "q1_probability",
                format!("must be in [0, 1], got {}", self.q1_probability),
            ));
        }
        Ok(())
    }
}

/// Samples a window of documents matching `(target, q)` without replacement
/// and returns the union of their feature sets, ascending.
///
/// For `q = 1` every selected document contains the target, so the union
/// does too; for `q = 0` no selected document contains it, so the union
/// never does.
pub fn select_documents(
    index: &CorpusIndex,
    target: u32,
    q: bool,
    window: Window,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u32>> {
    if target as usize >= index.vocab_size() {
        return Err(Error::IndexOutOfBounds {
            index: target as usize,
            len: index.vocab_size(),
        });
    }
    window.validate()?;
    let with_target = index.docs_with(target);
    let pool: Vec<u32> = if q {
        with_target.to_vec()
    } else {
        let mut has = vec![false; index.len()];
        for &d in with_target {
            has[d as usize] = true;
        }
        (0..index.len() as u32).filter(|&d| !has[d as usize]).collect()
    };
    if pool.is_empty() {
        return Err(Error::EmptyDocumentPool { target, q });
    }
    let take = window.sample_size(pool.len());
    let chosen = rand::seq::index::sample(rng, pool.len(), take);
    let mut present = vec![false; index.vocab_size()];
    for i in chosen {
        for &f in index.document(pool[i] as usize) {
            present[f as usize] = true;
        }
    }
    Ok((0..index.vocab_size() as u32)
        .filter(|&f| present[f as usize])
        .collect())
}

/// Everything an embedding run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub target: u32,
    /// Included literal indices per clause (index `>= m` means negated).
    pub clauses: Vec<Vec<usize>>,
    pub weights: Vec<i32>,
    /// Dense per-feature score: original inclusions vote `+weight`, negated
    /// inclusions `-weight`.
    pub dense: Vec<f64>,
    pub vocab_size: usize,
    pub params: EmbedParams,
    pub seed: u64,
    /// Realized number of `q = 1` rounds out of `params.rounds`.
    pub rounds_q1: usize,
}

/// One clause literal in the export document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralRef {
    pub literal_index: usize,
    pub feature: u32,
    pub is_negated: bool,
}

/// Export schema for [`EmbeddingResult::to_json`].
#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    format: String,
    version: u32,
    target: u32,
    target_token: Option<String>,
    vocab_size: usize,
    seed: u64,
    rounds_q1: usize,
    params: EmbedParams,
    weights: Vec<i32>,
    clauses: Vec<Vec<LiteralRef>>,
    dense: Vec<f64>,
}

impl EmbeddingResult {
    /// Structured-text export: clauses as literal lists with `is_negated`
    /// flags, weights, the dense vector, and the full parameter echo.
    pub fn to_json(&self, target_token: Option<&str>) -> Result<String> {
        let m = self.vocab_size;
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&k| LiteralRef {
                        literal_index: k,
                        feature: (k % m) as u32,
                        is_negated: k >= m,
                    })
                    .collect()
            })
            .collect();
        let file = EmbeddingFile {
            format: "tm-rbe/embedding".into(),
            version: 1,
            target: self.target,
            target_token: target_token.map(String::from),
            vocab_size: m,
            seed: self.seed,
            rounds_q1: self.rounds_q1,
            params: self.params.clone(),
            weights: self.weights.clone(),
            clauses,
            dense: self.dense.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// Weighted fold of clause inclusions into one score per feature:
/// `dense[f] = Σ_j w_j·[f ∈ clause_j] − Σ_j w_j·[¬f ∈ clause_j]`.
pub fn export_dense(clauses: &[Vec<usize>], weights: &[i32], vocab_size: usize) -> Result<Vec<f64>> {
    if clauses.len() != weights.len() {
        return Err(Error::invalid("weights", "count differs from clauses"));
    }
    let mut dense = vec![0.0; vocab_size];
    for (clause, &w) in clauses.iter().zip(weights) {
        for &k in clause {
            if k < vocab_size {
                dense[k] += w as f64;
            } else if k < 2 * vocab_size {
                dense[k - vocab_size] -= w as f64;
            } else {
                return Err(Error::IndexOutOfBounds {
                    index: k,
                    len: 2 * vocab_size,
                });
            }
        }
    }
    Ok(dense)
}

/// Runs the full embedding loop for one target word.
///
/// Pure function of `(index, target, params, seed)`: repeated calls return
/// bit-identical results.
pub fn embed_word(
    index: &CorpusIndex,
    target: u32,
    params: &EmbedParams,
    seed: u64,
) -> Result<EmbeddingResult> {
    embed_word_observed(index, target, params, seed, |_, _| {})
}

/// [`embed_word`] with an observer called after every round, for state-space
/// instrumentation. The observer sees the round count (1-based) and the
/// model; it must not mutate anything the run depends on.
pub fn embed_word_observed(
    index: &CorpusIndex,
    target: u32,
    params: &EmbedParams,
    seed: u64,
    mut observer: impl FnMut(usize, &CoalescedModel),
) -> Result<EmbeddingResult> {
    params.validate()?;
    if target as usize >= index.vocab_size() {
        return Err(Error::IndexOutOfBounds {
            index: target as usize,
            len: index.vocab_size(),
        });
    }
    if index.docs_with(target).is_empty() {
        return Err(Error::EmptyDocumentPool { target, q: true });
    }
    if index.docs_with(target).len() == index.len() {
        return Err(Error::EmptyDocumentPool { target, q: false });
    }

    let m = index.vocab_size();
    let mut model = CoalescedModel::new(params.model.clone(), m, seed)?;
    let mut rng = harness_rng(seed);
    let mut rounds_q1 = 0usize;
    for round in 0..params.rounds {
        let q = rng.random::<f64>() < params.q1_probability;
        if q {
            rounds_q1 += 1;
        }
        let union = select_documents(index, target, q, params.window, &mut rng)
            .map_err(|e| Error::EmbedRound {
                round,
                source: Box::new(e),
            })?;
        debug_assert!(
            q || union.binary_search(&target).is_err(),
            "q=0 union must exclude the target word"
        );
        let x = LiteralVector::from_feature_ids(&union, m)?;
        model.update(&x, q)?;
        observer(round + 1, &model);
    }
    let state = model.state();
    let dense = export_dense(&state.clauses, &state.weights, m)?;
    Ok(EmbeddingResult {
        target,
        clauses: state.clauses,
        weights: state.weights,
        dense,
        vocab_size: m,
        params: params.clone(),
        seed,
        rounds_q1,
    })
}
