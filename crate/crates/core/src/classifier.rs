//! Multi-class harness: one coalesced model per class, argmax inference.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automata::{EvaluationMode, LiteralVector};
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{CoalescedModel, ModelParams};
use crate::rng::{harness_rng, mix_seed};

/// Classifier training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub model: ModelParams,
    /// Shuffled passes over the training examples.
    pub epochs: usize,
}

/// One coalesced model per class; the predicted class is the argmax of the
/// per-class Predict-mode scores, ties broken by lowest class index.
#[derive(Debug, Clone)]
pub struct MultiClassifier {
    models: Vec<CoalescedModel>,
    vocab_size: usize,
}

impl MultiClassifier {
    /// Fresh classifier; class `c`'s model is seeded with `mix_seed(seed, c)`.
    pub fn new(params: &ModelParams, vocab_size: usize, classes: u32, seed: u64) -> Result<Self> {
        if classes == 0 {
            return Err(Error::invalid("classes", "must be >= 1"));
        }
        let models = (0..classes)
            .map(|c| CoalescedModel::new(params.clone(), vocab_size, mix_seed(seed, c as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { models, vocab_size })
    }

    /// Trains a fresh classifier on `train`.
    ///
    /// Each epoch shuffles the example order. Per example the target class
    /// receives an update with `q = 1` and one uniformly drawn other class an
    /// update with `q = 0`.
    pub fn train(train: &LabeledDataset, params: &TrainParams, seed: u64) -> Result<Self> {
        let mut clf = Self::new(&params.model, train.vocab_size(), train.classes(), seed)?;
        clf.fit(train, params.epochs, seed)?;
        Ok(clf)
    }

    /// Runs `epochs` additional passes over `train`.
    pub fn fit(&mut self, train: &LabeledDataset, epochs: usize, seed: u64) -> Result<()> {
        if train.vocab_size() != self.vocab_size {
            return Err(Error::DimensionMismatch {
                expected: self.vocab_size * 2,
                got: train.vocab_size() * 2,
            });
        }
        let classes = self.models.len() as u32;
        if train.classes() > classes {
            return Err(Error::invalid(
                "classes",
                format!("dataset has {} classes, model {}", train.classes(), classes),
            ));
        }
        let mut rng = harness_rng(mix_seed(seed, ORDER_SALT));
        let mut order: Vec<usize> = (0..train.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let (bits, label) = train.example(i);
                let x = LiteralVector::from_presence(&bits.to_bools())?;
                self.models[label as usize].update(&x, true)?;
                if classes > 1 {
                    let mut other = rng.random_range(0..classes - 1);
                    if other >= label {
                        other += 1;
                    }
                    self.models[other as usize].update(&x, false)?;
                }
            }
        }
        Ok(())
    }

    pub fn classes(&self) -> u32 {
        self.models.len() as u32
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn models(&self) -> &[CoalescedModel] {
        &self.models
    }

    pub fn model(&self, class: u32) -> &CoalescedModel {
        &self.models[class as usize]
    }

    /// Per-class Predict-mode scores.
    pub fn scores(&self, x: &LiteralVector) -> Result<Vec<i64>> {
        self.models
            .iter()
            .map(|m| Ok(m.class_sum(x, EvaluationMode::Predict)?.raw))
            .collect()
    }

    /// Argmax class for a presence vector; ties go to the lowest index.
    pub fn predict(&self, presence: &[bool]) -> Result<u32> {
        let x = LiteralVector::from_presence(presence)?;
        let scores = self.scores(&x)?;
        let mut best = 0usize;
        for (c, &score) in scores.iter().enumerate() {
            if score > scores[best] {
                best = c;
            }
        }
        Ok(best as u32)
    }

    /// Fraction of `data` classified correctly.
    pub fn accuracy(&self, data: &LabeledDataset) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for (bits, label) in data.examples() {
            if self.predict(&bits.to_bools())? == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

const ORDER_SALT: u64 = 0x7261_696e; // "rain" — training order stream
