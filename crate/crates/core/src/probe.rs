//! State-space instrumentation: snapshot per-literal automaton states during
//! training and summarize forgetting depth across sweeps of epochs, `s`, and
//! `T`.
//!
//! "Depth of forgetting" has no single scalar reading, so summaries carry
//! both the mean state of a literal group (lower = deeper) and the fraction
//! of the group sitting at or above the inclusion boundary.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedder::{embed_word_observed, CorpusIndex, EmbedParams};
use crate::error::{Error, Result};
use crate::model::CoalescedModel;

/// Per-literal automaton states of one clause at one training instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSnapshot {
    /// Rounds completed when the snapshot was taken.
    pub round: usize,
    pub clause: usize,
    /// One entry per literal, index order.
    pub entries: Vec<SnapshotEntry>,
    /// Inclusion boundary `N`, echoed for plotting.
    pub boundary: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotEntry {
    pub literal: usize,
    pub is_negated: bool,
    pub state: u32,
}

/// Faithful copy of one clause's `2m` states; does not touch the model.
pub fn snapshot(model: &CoalescedModel, clause: usize, round: usize) -> Result<StateSnapshot> {
    let bank = model.bank();
    if clause >= bank.clauses() {
        return Err(Error::IndexOutOfBounds {
            index: clause,
            len: bank.clauses(),
        });
    }
    let m = bank.vocab_size();
    let entries = bank
        .clause_states(clause)
        .iter()
        .enumerate()
        .map(|(k, &state)| SnapshotEntry {
            literal: k,
            is_negated: k >= m,
            state,
        })
        .collect();
    Ok(StateSnapshot {
        round,
        clause,
        entries,
        boundary: bank.boundary(),
    })
}

/// Depth-of-forgetting summary for one literal group split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub mean_state_original: f64,
    pub mean_state_negated: f64,
    pub frac_included_original: f64,
    pub frac_included_negated: f64,
}

/// Means and included-fractions over original (`< m`) and negated (`>= m`)
/// literals of a snapshot.
pub fn summarize(snap: &StateSnapshot, vocab_size: usize) -> Result<DepthSummary> {
    if snap.entries.len() != 2 * vocab_size {
        return Err(Error::DimensionMismatch {
            expected: 2 * vocab_size,
            got: snap.entries.len(),
        });
    }
    let m = vocab_size as f64;
    let mut sum = [0.0f64; 2];
    let mut included = [0usize; 2];
    for e in &snap.entries {
        let g = e.is_negated as usize;
        sum[g] += e.state as f64;
        if e.state >= snap.boundary {
            included[g] += 1;
        }
    }
    Ok(DepthSummary {
        mean_state_original: sum[0] / m,
        mean_state_negated: sum[1] / m,
        frac_included_original: included[0] as f64 / m,
        frac_included_negated: included[1] as f64 / m,
    })
}

/// Which clause(s) a probe observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeTarget {
    Clause(usize),
    /// Mean of the per-clause summaries.
    AllClauses,
}

/// Depth summary for a probe target at the model's current state.
pub fn summarize_target(model: &CoalescedModel, target: ProbeTarget) -> Result<DepthSummary> {
    let m = model.vocab_size();
    match target {
        ProbeTarget::Clause(j) => summarize(&snapshot(model, j, 0)?, m),
        ProbeTarget::AllClauses => {
            let n = model.bank().clauses();
            let mut acc = DepthSummary {
                mean_state_original: 0.0,
                mean_state_negated: 0.0,
                frac_included_original: 0.0,
                frac_included_negated: 0.0,
            };
            for j in 0..n {
                let s = summarize(&snapshot(model, j, 0)?, m)?;
                acc.mean_state_original += s.mean_state_original;
                acc.mean_state_negated += s.mean_state_negated;
                acc.frac_included_original += s.frac_included_original;
                acc.frac_included_negated += s.frac_included_negated;
            }
            let n = n as f64;
            acc.mean_state_original /= n;
            acc.mean_state_negated /= n;
            acc.frac_included_original /= n;
            acc.frac_included_negated /= n;
            Ok(acc)
        }
    }
}

/// Hyperparameter axis a state-space sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Epochs,
    Specificity,
    Margin,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Epochs => "epochs",
            SweepAxis::Specificity => "s",
            SweepAxis::Margin => "T",
        }
    }
}

/// Fixed parameters of a state-space sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Template parameters; the swept axis overrides its field and `rounds`
    /// is derived from epochs.
    pub embed: EmbedParams,
    /// Epochs per run for the non-epoch axes.
    pub epochs: usize,
    /// Rounds per epoch; defaults to one round per corpus document.
    pub rounds_per_epoch: Option<usize>,
    /// Snapshot cadence in epochs.
    pub checkpoint_every: usize,
    pub target_clause: ProbeTarget,
    pub seed: u64,
}

/// One summarized checkpoint of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Epoch at which the snapshot was taken.
    pub epoch: usize,
    /// Rounds completed at the snapshot.
    pub round: usize,
    pub summary: DepthSummary,
}

/// Sweep rows plus per-value failures; a failing cell does not abort the
/// sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, Error)>,
}

/// One embedding run per axis value (shared seed), snapshots at the
/// configured epoch cadence, summaries per literal group.
pub fn run_sweep(
    index: &CorpusIndex,
    target: u32,
    axis: SweepAxis,
    values: &[f64],
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    if cfg.checkpoint_every == 0 {
        return Err(Error::invalid("checkpoint_every", "must be >= 1"));
    }
    let rounds_per_epoch = cfg.rounds_per_epoch.unwrap_or_else(|| index.len().max(1));
    if rounds_per_epoch == 0 {
        return Err(Error::invalid("rounds_per_epoch", "must be >= 1"));
    }

    let cells: Vec<(f64, Result<Vec<SweepRow>>)> = values
        .par_iter()
        .map(|&value| {
            let outcome = run_cell(index, target, axis, value, cfg, rounds_per_epoch);
            (value, outcome)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (value, outcome) in cells {
        match outcome {
            Ok(mut cell_rows) => rows.append(&mut cell_rows),
            Err(e) => failures.push((value, e)),
        }
    }
    Ok(SweepOutcome { rows, failures })
}

fn run_cell(
    index: &CorpusIndex,
    target: u32,
    axis: SweepAxis,
    value: f64,
    cfg: &SweepConfig,
    rounds_per_epoch: usize,
) -> Result<Vec<SweepRow>> {
    let mut params = cfg.embed.clone();
    let mut epochs = cfg.epochs;
    match axis {
        SweepAxis::Epochs => epochs = value as usize,
        SweepAxis::Specificity => params.model.specificity = value,
        SweepAxis::Margin => params.model.margin = value as i64,
    }
    params.rounds = epochs * rounds_per_epoch;

    let checkpoint_rounds = cfg.checkpoint_every * rounds_per_epoch;
    let mut rows = Vec::new();
    let mut probe_error = None;
    embed_word_observed(index, target, &params, cfg.seed, |round, model| {
        if probe_error.is_some() || round % checkpoint_rounds != 0 {
            return;
        }
        match summarize_target(model, cfg.target_clause) {
            Ok(summary) => rows.push(SweepRow {
                value,
                epoch: round / rounds_per_epoch,
                round,
                summary,
            }),
            Err(e) => probe_error = Some(e),
        }
    })?;
    if let Some(e) = probe_error {
        return Err(e);
    }
    Ok(rows)
}

/// Tidy CSV for a sweep: one row per (value, checkpoint, literal group).
///
/// Columns: `axis,value,checkpoint,group,mean_state,frac_included,N,seed`.
pub fn write_sweep_csv<W: Write>(
    axis: SweepAxis,
    rows: &[SweepRow],
    boundary: u32,
    seed: u64,
    mut w: W,
) -> Result<()> {
    writeln!(w, "axis,value,checkpoint,group,mean_state,frac_included,N,seed")?;
    for row in rows {
        let s = &row.summary;
        writeln!(
            w,
            "{},{},{},original,{},{},{},{}",
            axis.label(),
            row.value,
            row.epoch,
            s.mean_state_original,
            s.frac_included_original,
            boundary,
            seed
        )?;
        writeln!(
            w,
            "{},{},{},negated,{},{},{},{}",
            axis.label(),
            row.value,
            row.epoch,
            s.mean_state_negated,
            s.frac_included_negated,
            boundary,
            seed
        )?;
    }
    Ok(())
}

/// Per-literal snapshot export: `clause_id,literal_index,is_negated,state`.
pub fn write_snapshot_csv<W: Write>(snap: &StateSnapshot, mut w: W) -> Result<()> {
    writeln!(w, "clause_id,literal_index,is_negated,state")?;
    for e in &snap.entries {
        writeln!(
            w,
            "{},{},{},{}",
            snap.clause,
            e.literal,
            u8::from(e.is_negated),
            e.state
        )?;
    }
    Ok(())
}

/// Histogram export of a snapshot: occupancy count per state value, split by
/// literal group. Only occupied states are written.
pub fn write_histogram_csv<W: Write>(snap: &StateSnapshot, mut w: W) -> Result<()> {
    let max_state = 2 * snap.boundary as usize;
    let mut counts = vec![[0usize; 2]; max_state];
    for e in &snap.entries {
        counts[e.state as usize][e.is_negated as usize] += 1;
    }
    writeln!(w, "state,count_original,count_negated")?;
    for (state, c) in counts.iter().enumerate() {
        if c[0] + c[1] > 0 {
            writeln!(w, "{state},{},{}", c[0], c[1])?;
        }
    }
    Ok(())
}
