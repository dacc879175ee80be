//! Tsetlin Automaton state banks and the feedback operations that move
//! literals through the state space.
//!
//! Each (clause, literal) pair owns a 2N-state counter. States `0..N-1` are
//! the *forgotten* region: the literal does not participate in the clause.
//! States `N..2N-1` are the *memorized* region: the literal is included in
//! the conjunction. Training moves literals across the boundary `N` through
//! three mechanisms:
//!
//! * **memorization** — true literals of a firing clause step up,
//! * **forgetting** — literals step down at rate `1/s`,
//! * **invalidation** — false literals of a wrongly firing clause step up
//!   deterministically until the clause rejects the input.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Clause evaluation context.
///
/// An empty clause (no literal included) outputs 1 while learning, so fresh
/// clauses receive feedback and can grow, but 0 while predicting, so vacuous
/// clauses cast no vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    Learn,
    Predict,
}

/// The input vector X: `2m` literal bits for a vocabulary of `m` features.
///
/// Index `i < m` carries the feature itself, index `m + i` its negation, so
/// `bits[m + i] == !bits[i]` always holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralVector {
    bits: Vec<bool>,
    vocab_size: usize,
}

impl LiteralVector {
    /// Encodes a feature-presence vector of length `m` into `2m` literals.
    pub fn from_presence(presence: &[bool]) -> Result<Self> {
        if presence.is_empty() {
            return Err(Error::invalid("presence", "zero-length input"));
        }
        let m = presence.len();
        let mut bits = Vec::with_capacity(2 * m);
        bits.extend_from_slice(presence);
        bits.extend(presence.iter().map(|&b| !b));
        Ok(Self {
            bits,
            vocab_size: m,
        })
    }

    /// Encodes a sparse feature-id set over a vocabulary of size `m`.
    pub fn from_feature_ids(ids: &[u32], vocab_size: usize) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::invalid("vocab_size", "must be >= 1"));
        }
        let mut presence = vec![false; vocab_size];
        for &id in ids {
            let idx = id as usize;
            if idx >= vocab_size {
                return Err(Error::IndexOutOfBounds {
                    index: idx,
                    len: vocab_size,
                });
            }
            presence[idx] = true;
        }
        Self::from_presence(&presence)
    }

    /// Vocabulary size `m`.
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Number of literals, `2m`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction: m >= 1
    }

    /// Value of literal `k` (`k < 2m`).
    pub fn bit(&self, literal: usize) -> bool {
        self.bits[literal]
    }

    /// All `2m` literal bits.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Mutable view of one clause's state row; all state motion funnels through
/// here so the included-literal count stays consistent and saturation at
/// `[0, 2N-1]` is enforced in one place.
pub(crate) struct ClauseView<'a> {
    pub row: &'a mut [u32],
    pub included: &'a mut u32,
    pub boundary: u32,
    pub max_state: u32,
}

impl ClauseView<'_> {
    #[inline]
    fn step_up(&mut self, k: usize) {
        let s = &mut self.row[k];
        if *s < self.max_state {
            *s += 1;
            if *s == self.boundary {
                *self.included += 1;
            }
        }
    }

    #[inline]
    fn step_down(&mut self, k: usize) {
        let s = &mut self.row[k];
        if *s > 0 {
            if *s == self.boundary {
                *self.included -= 1;
            }
            *s -= 1;
        }
    }

    /// Type I feedback with a precomputed clause output.
    ///
    /// Draw order is fixed: one draw per literal in index order (boosted
    /// increments draw nothing), so runs replay exactly.
    pub fn type_i(
        &mut self,
        x: &LiteralVector,
        fires: bool,
        s: f64,
        boost_true_positive: bool,
        rng: &mut ChaCha8Rng,
    ) {
        let p_memorize = (s - 1.0) / s;
        let p_forget = 1.0 / s;
        if fires {
            for k in 0..x.len() {
                if x.bit(k) {
                    if boost_true_positive || rng.random::<f64>() < p_memorize {
                        self.step_up(k);
                    }
                } else if rng.random::<f64>() < p_forget {
                    self.step_down(k);
                }
            }
        } else {
            for k in 0..x.len() {
                if rng.random::<f64>() < p_forget {
                    self.step_down(k);
                }
            }
        }
    }

    /// Type II feedback with a precomputed clause output: every false literal
    /// still in the forgotten region steps up by one, so the clause moves
    /// toward rejecting this input.
    pub fn type_ii(&mut self, x: &LiteralVector, fires: bool) {
        if !fires {
            return;
        }
        for k in 0..x.len() {
            if !x.bit(k) && self.row[k] < self.boundary {
                self.step_up(k);
            }
        }
    }
}

/// `n` clauses × `2m` Tsetlin Automaton states, each in `[0, 2N-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseBank {
    states: Vec<u32>,
    /// Per-clause count of states at or above the boundary.
    included: Vec<u32>,
    clauses: usize,
    vocab_size: usize,
    boundary: u32,
}

impl ClauseBank {
    /// Fresh bank with every literal at state `N-1`, the highest forgotten
    /// state: one step below inclusion, so clauses start empty but a single
    /// invalidation can pull a literal in.
    ///
    /// `seed` is reserved for stochastic initialization variants; the default
    /// rule is deterministic.
    pub fn new(clauses: usize, vocab_size: usize, boundary: u32, seed: u64) -> Result<Self> {
        Self::with_init_state(clauses, vocab_size, boundary, boundary - 1, seed)
    }

    /// Bank with an explicit initial state, for sensitivity checks around the
    /// inclusion boundary.
    pub fn with_init_state(
        clauses: usize,
        vocab_size: usize,
        boundary: u32,
        init_state: u32,
        _seed: u64,
    ) -> Result<Self> {
        if clauses == 0 {
            return Err(Error::invalid("clauses", "must be >= 1"));
        }
        if vocab_size == 0 {
            return Err(Error::invalid("vocab_size", "must be >= 1"));
        }
        if boundary < 2 {
            return Err(Error::invalid("boundary", "must be >= 2"));
        }
        if boundary > 1 << 30 {
            return Err(Error::invalid("boundary", "must be <= 2^30"));
        }
        let max_state = 2 * boundary - 1;
        if init_state > max_state {
            return Err(Error::invalid(
                "init_state",
                format!("must be <= 2N-1 = {max_state}"),
            ));
        }
        let width = 2 * vocab_size;
        let per_clause_included = if init_state >= boundary { width as u32 } else { 0 };
        Ok(Self {
            states: vec![init_state; clauses * width],
            included: vec![per_clause_included; clauses],
            clauses,
            vocab_size,
            boundary,
        })
    }

    /// Rebuilds a bank from raw states (for persistence).
    pub(crate) fn from_states(
        states: Vec<u32>,
        clauses: usize,
        vocab_size: usize,
        boundary: u32,
    ) -> Result<Self> {
        let width = 2 * vocab_size;
        if states.len() != clauses * width {
            return Err(Error::BadFile(format!(
                "state grid has {} entries, expected {}",
                states.len(),
                clauses * width
            )));
        }
        let max_state = 2 * boundary - 1;
        if let Some(s) = states.iter().find(|&&s| s > max_state) {
            return Err(Error::BadFile(format!(
                "state {s} exceeds 2N-1 = {max_state}"
            )));
        }
        let included = states
            .chunks(width)
            .map(|row| row.iter().filter(|&&s| s >= boundary).count() as u32)
            .collect();
        Ok(Self {
            states,
            included,
            clauses,
            vocab_size,
            boundary,
        })
    }

    pub fn clauses(&self) -> usize {
        self.clauses
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Number of literals per clause, `2m`.
    pub fn width(&self) -> usize {
        2 * self.vocab_size
    }

    /// Inclusion boundary `N`.
    pub fn boundary(&self) -> u32 {
        self.boundary
    }

    /// Highest state, `2N-1`.
    pub fn max_state(&self) -> u32 {
        2 * self.boundary - 1
    }

    pub fn state(&self, clause: usize, literal: usize) -> u32 {
        self.states[clause * self.width() + literal]
    }

    /// One clause's `2m` states.
    pub fn clause_states(&self, clause: usize) -> &[u32] {
        let w = self.width();
        &self.states[clause * w..(clause + 1) * w]
    }

    /// Raw state grid, row-major by clause.
    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Sets one state directly (instrumentation and tests); keeps the
    /// included-literal count consistent and enforces bounds.
    pub fn set_state(&mut self, clause: usize, literal: usize, state: u32) -> Result<()> {
        self.check_clause(clause)?;
        if literal >= self.width() {
            return Err(Error::IndexOutOfBounds {
                index: literal,
                len: self.width(),
            });
        }
        if state > self.max_state() {
            return Err(Error::invalid(
                "state",
                format!("must be <= 2N-1 = {}", self.max_state()),
            ));
        }
        let w = self.width();
        let old = self.states[clause * w + literal];
        let was_in = old >= self.boundary;
        let is_in = state >= self.boundary;
        self.states[clause * w + literal] = state;
        match (was_in, is_in) {
            (false, true) => self.included[clause] += 1,
            (true, false) => self.included[clause] -= 1,
            _ => {}
        }
        Ok(())
    }

    fn check_clause(&self, clause: usize) -> Result<()> {
        if clause >= self.clauses {
            return Err(Error::IndexOutOfBounds {
                index: clause,
                len: self.clauses,
            });
        }
        Ok(())
    }

    fn check_input(&self, x: &LiteralVector) -> Result<()> {
        if x.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Mutable access to the state grid and per-clause included counts for
    /// clause-partitioned updates.
    pub(crate) fn raw_parts_mut(&mut self) -> (&mut [u32], &mut [u32]) {
        (&mut self.states, &mut self.included)
    }

    pub(crate) fn view(&mut self, clause: usize) -> ClauseView<'_> {
        let w = self.width();
        ClauseView {
            row: &mut self.states[clause * w..(clause + 1) * w],
            included: &mut self.included[clause],
            boundary: self.boundary,
            max_state: 2 * self.boundary - 1,
        }
    }

    pub(crate) fn output_unchecked(
        &self,
        clause: usize,
        x: &LiteralVector,
        mode: EvaluationMode,
    ) -> bool {
        if self.included[clause] == 0 {
            return mode == EvaluationMode::Learn;
        }
        self.clause_states(clause)
            .iter()
            .zip(x.bits())
            .all(|(&s, &b)| s < self.boundary || b)
    }

    /// Conjunction of the clause's included literals over `x`.
    pub fn clause_output(
        &self,
        clause: usize,
        x: &LiteralVector,
        mode: EvaluationMode,
    ) -> Result<bool> {
        self.check_clause(clause)?;
        self.check_input(x)?;
        Ok(self.output_unchecked(clause, x, mode))
    }

    /// Indices of literals with state at or above the boundary, ascending.
    pub fn included_literals(&self, clause: usize) -> Result<Vec<usize>> {
        self.check_clause(clause)?;
        Ok(self
            .clause_states(clause)
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= self.boundary)
            .map(|(k, _)| k)
            .collect())
    }

    /// Cached included-literal count for one clause.
    pub fn included_count(&self, clause: usize) -> u32 {
        self.included[clause]
    }

    /// Type I feedback: memorization and forgetting.
    ///
    /// If the clause fires on `x`, true literals step up with probability
    /// `(s-1)/s` (probability 1 when `boost_true_positive` is set) and false
    /// literals step down with probability `1/s`. If it does not fire, every
    /// literal steps down with probability `1/s`.
    pub fn type_i(
        &mut self,
        clause: usize,
        x: &LiteralVector,
        s: f64,
        boost_true_positive: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        if !(s >= 1.0) {
            return Err(Error::invalid("s", format!("must be >= 1, got {s}")));
        }
        self.check_clause(clause)?;
        self.check_input(x)?;
        let fires = self.output_unchecked(clause, x, EvaluationMode::Learn);
        self.view(clause).type_i(x, fires, s, boost_true_positive, rng);
        Ok(())
    }

    /// Type II feedback: invalidation. Applied only when the clause fires;
    /// every false literal below the boundary steps up by exactly one.
    pub fn type_ii(&mut self, clause: usize, x: &LiteralVector) -> Result<()> {
        self.check_clause(clause)?;
        self.check_input(x)?;
        let fires = self.output_unchecked(clause, x, EvaluationMode::Learn);
        self.view(clause).type_ii(x, fires);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::clause_rng;

    fn x_from(presence: &[bool]) -> LiteralVector {
        LiteralVector::from_presence(presence).unwrap()
    }

    #[test]
    fn encode_single_present_feature() {
        let x = x_from(&[true, false, false]);
        assert_eq!(
            x.bits(),
            &[true, false, false, false, true, true],
            "X = [1,0,0, 0,1,1]"
        );
    }

    #[test]
    fn encode_all_absent() {
        let x = x_from(&[false, false]);
        assert_eq!(x.bits(), &[false, false, true, true]);
    }

    #[test]
    fn encode_mixed() {
        let x = x_from(&[true, true, false, true]);
        assert_eq!(
            x.bits(),
            &[true, true, false, true, false, false, true, false]
        );
    }

    #[test]
    fn encode_rejects_empty() {
        assert!(LiteralVector::from_presence(&[]).is_err());
    }

    #[test]
    fn encode_from_feature_ids() {
        let x = LiteralVector::from_feature_ids(&[0, 2], 3).unwrap();
        assert_eq!(x.bits(), &[true, false, true, false, true, false]);
        assert!(LiteralVector::from_feature_ids(&[3], 3).is_err());
    }

    #[test]
    fn init_bank_states() {
        let bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        assert_eq!(bank.states(), &[3, 3, 3, 3]);

        let bank = ClauseBank::new(2, 1, 2, 0).unwrap();
        assert_eq!(bank.states(), &[1, 1, 1, 1]);
    }

    #[test]
    fn init_bank_has_no_included_literals() {
        let bank = ClauseBank::new(3, 4, 16, 7).unwrap();
        for j in 0..3 {
            assert!(bank.included_literals(j).unwrap().is_empty());
            assert_eq!(bank.included_count(j), 0);
        }
    }

    #[test]
    fn init_bank_rejects_zero_dimensions() {
        assert!(ClauseBank::new(0, 2, 4, 0).is_err());
        assert!(ClauseBank::new(1, 0, 4, 0).is_err());
        assert!(ClauseBank::new(1, 2, 1, 0).is_err());
    }

    #[test]
    fn included_literals_threshold() {
        // States [N, N-1, 2N-1, N-1] with N=4: literals 0 and 2 included.
        let mut bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        bank.set_state(0, 0, 4).unwrap();
        bank.set_state(0, 1, 3).unwrap();
        bank.set_state(0, 2, 7).unwrap();
        assert_eq!(bank.included_literals(0).unwrap(), vec![0, 2]);
        assert_eq!(bank.included_count(0), 2);
    }

    #[test]
    fn included_and_forgotten_partition_the_literals() {
        let mut bank = ClauseBank::new(1, 3, 8, 0).unwrap();
        for (k, s) in [(0, 9), (2, 8), (5, 15)] {
            bank.set_state(0, k, s).unwrap();
        }
        let included = bank.included_literals(0).unwrap();
        let forgotten: Vec<usize> = (0..bank.width())
            .filter(|k| !included.contains(k))
            .collect();
        assert_eq!(included.len() + forgotten.len(), bank.width());
        for &k in &included {
            assert!(bank.state(0, k) >= bank.boundary());
        }
        for &k in &forgotten {
            assert!(bank.state(0, k) < bank.boundary());
        }
    }

    #[test]
    fn clause_output_single_included_literal() {
        let mut bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        bank.set_state(0, 2, 4).unwrap(); // include literal 2 (= NOT feature 0)
        let x_hit = x_from(&[false, true]); // literal 2 true
        let x_miss = x_from(&[true, true]); // literal 2 false
        assert!(bank
            .clause_output(0, &x_hit, EvaluationMode::Learn)
            .unwrap());
        assert!(!bank
            .clause_output(0, &x_miss, EvaluationMode::Learn)
            .unwrap());
    }

    #[test]
    fn empty_clause_convention() {
        let bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        let x = x_from(&[true, false]);
        assert!(bank.clause_output(0, &x, EvaluationMode::Learn).unwrap());
        assert!(!bank.clause_output(0, &x, EvaluationMode::Predict).unwrap());
    }

    #[test]
    fn clause_output_conjunction_of_two() {
        // Include literals 0 and 5 with m=3; X=[1,0,0, 0,1,1] satisfies both.
        let mut bank = ClauseBank::new(1, 3, 4, 0).unwrap();
        bank.set_state(0, 0, 4).unwrap();
        bank.set_state(0, 5, 4).unwrap();
        let x = x_from(&[true, false, false]);
        assert!(bank.clause_output(0, &x, EvaluationMode::Learn).unwrap());
        assert!(bank.clause_output(0, &x, EvaluationMode::Predict).unwrap());
    }

    #[test]
    fn clause_output_rejects_dimension_mismatch() {
        let bank = ClauseBank::new(1, 3, 4, 0).unwrap();
        let x = x_from(&[true, false]);
        assert!(matches!(
            bank.clause_output(0, &x, EvaluationMode::Learn),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn type_i_certain_at_s_one_with_boost() {
        let mut bank = ClauseBank::new(1, 2, 8, 0).unwrap();
        let mut rng = clause_rng(1, 0);
        let x = x_from(&[true, false]); // literals: [1,0,0,1]
        bank.type_i(0, &x, 1.0, true, &mut rng).unwrap();
        // True literals (0, 3) up with certainty; false (1, 2) down with
        // certainty (1/s = 1).
        assert_eq!(bank.clause_states(0), &[8, 6, 6, 8]);
    }

    #[test]
    fn type_i_large_s_limit() {
        // s huge: true literals step up with probability ~1 even unboosted,
        // false literals step down with probability ~0.
        let mut bank = ClauseBank::new(1, 2, 64, 0).unwrap();
        let mut rng = clause_rng(2, 0);
        let x = x_from(&[true, false]);
        for _ in 0..50 {
            bank.type_i(0, &x, 1e12, false, &mut rng).unwrap();
        }
        assert_eq!(bank.state(0, 0), 63 + 50);
        assert_eq!(bank.state(0, 3), 63 + 50);
        assert_eq!(bank.state(0, 1), 63);
        assert_eq!(bank.state(0, 2), 63);
    }

    #[test]
    fn type_i_nonfiring_decrement_rate() {
        // Clause forced non-firing: include a literal that x sets false.
        // Every literal then steps down with probability 1/s = 0.2.
        let s = 5.0;
        let trials = 100_000u32;
        let mut bank = ClauseBank::new(1, 2, 1 << 14, 0).unwrap();
        let mut rng = clause_rng(3, 0);
        let x = x_from(&[false, false]);
        let mut downs = 0u64;
        for _ in 0..trials {
            let init = bank.boundary() - 1;
            for k in 0..bank.width() {
                bank.set_state(0, k, init).unwrap();
            }
            bank.set_state(0, 0, bank.boundary()).unwrap(); // literal 0 included, x[0]=0
            let before: Vec<u32> = bank.clause_states(0).to_vec();
            bank.type_i(0, &x, s, false, &mut rng).unwrap();
            downs += bank
                .clause_states(0)
                .iter()
                .zip(&before)
                .filter(|(a, b)| a < b)
                .count() as u64;
        }
        let rate = downs as f64 / (trials as f64 * 4.0);
        assert!(
            (rate - 0.2).abs() < 0.01,
            "decrement rate {rate} not within 0.2 +/- 0.01"
        );
    }

    #[test]
    fn type_i_rejects_s_below_one() {
        let mut bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        let mut rng = clause_rng(0, 0);
        let x = x_from(&[true, false]);
        assert!(bank.type_i(0, &x, 0.5, false, &mut rng).is_err());
    }

    #[test]
    fn type_ii_pulls_false_literal_into_clause() {
        let mut bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        let x = x_from(&[true, true]); // negated literals false
        bank.type_ii(0, &x).unwrap();
        // Literals 2 and 3 (false, at N-1) step to N and are now included;
        // the clause will reject this input from now on.
        assert_eq!(bank.clause_states(0), &[3, 3, 4, 4]);
        assert_eq!(bank.included_literals(0).unwrap(), vec![2, 3]);
        assert!(!bank.clause_output(0, &x, EvaluationMode::Learn).unwrap());
    }

    #[test]
    fn type_ii_leaves_true_literals_alone() {
        let mut bank = ClauseBank::new(1, 3, 4, 0).unwrap();
        let x = x_from(&[true, false, true]);
        bank.type_ii(0, &x).unwrap();
        for k in 0..bank.width() {
            if x.bit(k) {
                assert_eq!(bank.state(0, k), 3, "true literal {k} must not move");
            } else {
                assert_eq!(bank.state(0, k), 4, "false literal {k} steps up");
            }
        }
    }

    #[test]
    fn type_ii_noop_when_clause_does_not_fire() {
        let mut bank = ClauseBank::new(1, 2, 4, 0).unwrap();
        bank.set_state(0, 0, 4).unwrap(); // include literal 0
        let x = x_from(&[false, true]); // literal 0 false -> no fire
        let before = bank.clause_states(0).to_vec();
        bank.type_ii(0, &x).unwrap();
        assert_eq!(bank.clause_states(0), &before[..]);
    }

    #[test]
    fn feedback_is_deterministic_for_a_seed() {
        let x = x_from(&[true, false, true, false]);
        let run = |seed: u64| {
            let mut bank = ClauseBank::new(2, 4, 16, seed).unwrap();
            let mut rngs = vec![clause_rng(seed, 0), clause_rng(seed, 1)];
            for i in 0..200 {
                let j = i % 2;
                bank.type_i(j, &x, 3.0, false, &mut rngs[j]).unwrap();
                bank.type_ii(1 - j, &x).unwrap();
            }
            bank.states().to_vec()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }
}
