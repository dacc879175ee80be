//! A Tsetlin Machine engine built for looking inside the machine.
//!
//! The crate implements a weighted-clause (coalesced) Tsetlin Machine with
//! three entry points layered on top of it:
//!
//! * a multi-class **classifier** over binarized bag-of-words data,
//! * a self-supervised **single-word embedder** that trains one model per
//!   target word against sampled document unions,
//! * **instrumentation** that snapshots per-literal automaton states during
//!   training and quantifies reasoning-by-elimination — how much of a model's
//!   knowledge lives in negated features.
//!
//! Everything is deterministic under a seed: each clause draws from its own
//! ChaCha8 stream, so serial and parallel execution produce bit-identical
//! models.
//!
//! See the `book/` guide in the repository for a narrative walk-through.

pub mod automata;
pub mod classifier;
pub mod datasets;
pub mod embedder;
pub mod error;
pub mod model;
pub mod probe;
pub mod rbe;
pub mod rng;

pub use automata::{ClauseBank, EvaluationMode, LiteralVector};
pub use classifier::{MultiClassifier, TrainParams};
pub use datasets::{ArtificialSpec, Bitset, LabeledDataset, Split, Vocabulary};
pub use embedder::{CorpusIndex, EmbedParams, EmbeddingResult, Window};
pub use error::{Error, Result};
pub use model::{ClassSum, CoalescedModel, ModelParams, ModelState, Prediction};
pub use probe::{DepthSummary, ProbeTarget, StateSnapshot, SweepAxis};
pub use rbe::{Polarity, RbeReport, RbeSetup};
