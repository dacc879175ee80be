//! The coalesced Tsetlin Machine: one clause bank, signed integer clause
//! weights, and margin-gated feedback.
//!
//! Every clause votes with its weight when it fires. The class sum is clamped
//! to the voting margin `[-T, T]`; the distance between the clamped sum and
//! the target side of the margin sets the probability that a clause receives
//! feedback, so learning throttles itself as the vote saturates.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::{ClauseBank, ClauseView, EvaluationMode, LiteralVector};
use crate::error::{Error, Result};
use crate::rng::clause_rng;

/// Hyperparameters of one coalesced model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Clause count `n`.
    pub clauses: usize,
    /// Voting margin `T`.
    pub margin: i64,
    /// Specificity `s`; forgetting runs at rate `1/s`.
    pub specificity: f64,
    /// Inclusion boundary `N`; automaton states span `[0, 2N-1]`.
    pub boundary: u32,
    /// When set, true literals of a firing clause memorize with probability 1
    /// instead of `(s-1)/s`, which makes `s = 1` a usable configuration.
    pub boost_true_positive: bool,
    /// Initial automaton state; defaults to `N-1` (highest forgotten state).
    pub init_state: Option<u32>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            clauses: 100,
            margin: 128,
            specificity: 5.0,
            boundary: 2048,
            boost_true_positive: true,
            init_state: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.clauses == 0 {
            return Err(Error::invalid("clauses", "must be >= 1"));
        }
        if self.margin < 1 {
            return Err(Error::invalid("margin", "must be >= 1"));
        }
        if !(self.specificity >= 1.0) {
            return Err(Error::invalid(
                "specificity",
                format!("must be >= 1, got {}", self.specificity),
            ));
        }
        if self.boundary < 2 {
            return Err(Error::invalid("boundary", "must be >= 2"));
        }
        if self.boundary > 1 << 30 {
            return Err(Error::invalid("boundary", "must be <= 2^30"));
        }
        if let Some(init) = self.init_state {
            if init > 2 * self.boundary - 1 {
                return Err(Error::invalid("init_state", "must be <= 2N-1"));
            }
        }
        Ok(())
    }
}

/// A class vote: the raw weighted sum and its clamp to `[-T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassSum {
    pub raw: i64,
    pub clamped: i64,
}

impl ClassSum {
    pub fn new(raw: i64, margin: i64) -> Self {
        Self {
            raw,
            clamped: raw.clamp(-margin, margin),
        }
    }
}

/// Inference outcome for one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    /// Vote for the positive class; score 0 counts as positive.
    pub positive: bool,
    pub score: i64,
}

/// Clause inclusion sets plus weights, ordered by clause id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelState {
    pub clauses: Vec<Vec<usize>>,
    pub weights: Vec<i32>,
}

/// Weighted-clause Tsetlin Machine for one binary target.
#[derive(Debug, Clone)]
pub struct CoalescedModel {
    bank: ClauseBank,
    weights: Vec<i32>,
    params: ModelParams,
    seed: u64,
    clause_rngs: Vec<ChaCha8Rng>,
}

impl CoalescedModel {
    /// Fresh model over a vocabulary of `vocab_size` features.
    ///
    /// Weights start at +1 for the first `ceil(n/2)` clauses and -1 for the
    /// rest, so both polarities exist from the start.
    pub fn new(params: ModelParams, vocab_size: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        let init = params.init_state.unwrap_or(params.boundary - 1);
        let bank = ClauseBank::with_init_state(
            params.clauses,
            vocab_size,
            params.boundary,
            init,
            seed,
        )?;
        let positive_half = params.clauses.div_ceil(2);
        let weights = (0..params.clauses)
            .map(|j| if j < positive_half { 1 } else { -1 })
            .collect();
        let clause_rngs = (0..params.clauses).map(|j| clause_rng(seed, j)).collect();
        Ok(Self {
            bank,
            weights,
            params,
            seed,
            clause_rngs,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn vocab_size(&self) -> usize {
        self.bank.vocab_size()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bank(&self) -> &ClauseBank {
        &self.bank
    }

    #[cfg(test)]
    pub(crate) fn bank_mut(&mut self) -> &mut ClauseBank {
        &mut self.bank
    }

    pub fn weights(&self) -> &[i32] {
        &self.weights
    }

    /// Overwrites one clause weight (instrumentation and tests).
    pub fn set_weight(&mut self, clause: usize, weight: i32) -> Result<()> {
        if clause >= self.params.clauses {
            return Err(Error::IndexOutOfBounds {
                index: clause,
                len: self.params.clauses,
            });
        }
        self.weights[clause] = weight;
        Ok(())
    }

    /// Overwrites one automaton state (instrumentation and tests).
    pub fn set_state(&mut self, clause: usize, literal: usize, state: u32) -> Result<()> {
        self.bank.set_state(clause, literal, state)
    }

    fn check_input(&self, x: &LiteralVector) -> Result<()> {
        if x.len() != self.bank.width() {
            return Err(Error::DimensionMismatch {
                expected: self.bank.width(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn clause_outputs(&self, x: &LiteralVector, mode: EvaluationMode) -> Vec<bool> {
        (0..self.params.clauses)
            .map(|j| self.bank.output_unchecked(j, x, mode))
            .collect()
    }

    /// Weighted clause vote for `x`, raw and clamped to the margin.
    pub fn class_sum(&self, x: &LiteralVector, mode: EvaluationMode) -> Result<ClassSum> {
        self.check_input(x)?;
        let raw = self
            .clause_outputs(x, mode)
            .iter()
            .zip(&self.weights)
            .filter(|(&fired, _)| fired)
            .map(|(_, &w)| w as i64)
            .sum();
        Ok(ClassSum::new(raw, self.params.margin))
    }

    /// One training step toward target `q`.
    ///
    /// With the clamped vote `v`, each clause is independently selected with
    /// probability `(T - v) / 2T` when `q` is true and `(T + v) / 2T` when it
    /// is false. Selected clauses with weight >= 0 receive Type I feedback on
    /// `q = 1` and Type II on `q = 0`; negative-weight clauses the opposite.
    /// Every selected firing clause moves its weight one step toward the
    /// target (`+1` on `q = 1`, `-1` on `q = 0`).
    pub fn update(&mut self, x: &LiteralVector, q: bool) -> Result<()> {
        self.update_inner(x, q, false)
    }

    /// `update` with clause feedback fanned out across the rayon pool.
    ///
    /// Bit-identical to the serial path: every clause draws from its own RNG
    /// stream, so scheduling does not affect the result.
    pub fn update_par(&mut self, x: &LiteralVector, q: bool) -> Result<()> {
        self.update_inner(x, q, true)
    }

    fn update_inner(&mut self, x: &LiteralVector, q: bool, parallel: bool) -> Result<()> {
        self.check_input(x)?;
        let outputs = self.clause_outputs(x, EvaluationMode::Learn);
        let raw = outputs
            .iter()
            .zip(&self.weights)
            .filter(|(&fired, _)| fired)
            .map(|(_, &w)| w as i64)
            .sum();
        let v = ClassSum::new(raw, self.params.margin).clamped;
        let t = self.params.margin as f64;
        let p_select = if q { (t - v as f64) / (2.0 * t) } else { (t + v as f64) / (2.0 * t) };

        let width = self.bank.width();
        let boundary = self.bank.boundary();
        let max_state = self.bank.max_state();
        let s = self.params.specificity;
        let boost = self.params.boost_true_positive;

        let (states, included) = self.bank.raw_parts_mut();
        let step = |(((row, included), weight), rng): (
            ((&mut [u32], &mut u32), &mut i32),
            &mut ChaCha8Rng,
        ),
                    fires: bool| {
            let selected = rng.random::<f64>() < p_select;
            if !selected {
                return;
            }
            let mut view = ClauseView {
                row,
                included,
                boundary,
                max_state,
            };
            match (q, *weight >= 0) {
                (true, true) | (false, false) => view.type_i(x, fires, s, boost, rng),
                (true, false) | (false, true) => view.type_ii(x, fires),
            }
            if fires {
                *weight += if q { 1 } else { -1 };
            }
        };

        if parallel {
            states
                .par_chunks_mut(width)
                .zip(included.par_iter_mut())
                .zip(self.weights.par_iter_mut())
                .zip(self.clause_rngs.par_iter_mut())
                .zip(outputs.par_iter())
                .for_each(|(args, &fires)| step(args, fires));
        } else {
            states
                .chunks_mut(width)
                .zip(included.iter_mut())
                .zip(self.weights.iter_mut())
                .zip(self.clause_rngs.iter_mut())
                .zip(outputs.iter())
                .for_each(|(args, &fires)| step(args, fires));
        }
        Ok(())
    }

    /// Included-literal sets and weights, ordered by clause id.
    pub fn state(&self) -> ModelState {
        let clauses = (0..self.params.clauses)
            .map(|j| self.bank.included_literals(j).expect("clause id in range"))
            .collect();
        ModelState {
            clauses,
            weights: self.weights.clone(),
        }
    }

    /// Inference: raw Predict-mode class sum, positive iff score >= 0.
    pub fn predict(&self, x: &LiteralVector) -> Result<Prediction> {
        let score = self.class_sum(x, EvaluationMode::Predict)?.raw;
        Ok(Prediction {
            positive: score >= 0,
            score,
        })
    }

    /// Writes the model as a versioned JSON document.
    ///
    /// The layout is documented in the book's file-formats chapter. RNG
    /// positions are not persisted: a reloaded model replays randomness from
    /// its seed.
    pub fn save<W: Write>(&self, writer: W) -> Result<()> {
        let file = ModelFile {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            vocab_size: self.vocab_size(),
            params: self.params.clone(),
            seed: self.seed,
            weights: self.weights.clone(),
            states: self.bank.states().to_vec(),
        };
        serde_json::to_writer(writer, &file)?;
        Ok(())
    }

    /// Reads a model written by [`CoalescedModel::save`], validating bounds.
    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(reader)?;
        if file.format != FORMAT_TAG {
            return Err(Error::BadFile(format!("unknown format `{}`", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::BadFile(format!(
                "unsupported version {}",
                file.version
            )));
        }
        file.params.validate()?;
        if file.weights.len() != file.params.clauses {
            return Err(Error::BadFile(format!(
                "{} weights for {} clauses",
                file.weights.len(),
                file.params.clauses
            )));
        }
        let bank = ClauseBank::from_states(
            file.states,
            file.params.clauses,
            file.vocab_size,
            file.params.boundary,
        )?;
        let clause_rngs = (0..file.params.clauses)
            .map(|j| clause_rng(file.seed, j))
            .collect();
        Ok(Self {
            bank,
            weights: file.weights,
            params: file.params,
            seed: file.seed,
            clause_rngs,
        })
    }
}

const FORMAT_TAG: &str = "tm-rbe/model";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    vocab_size: usize,
    params: ModelParams,
    seed: u64,
    weights: Vec<i32>,
    states: Vec<u32>,
}
