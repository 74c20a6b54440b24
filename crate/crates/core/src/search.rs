//! Simulated-annealing search over memory banks.
//!
//! Starting from a single-slot bank, the annealer repeatedly proposes one of
//! four neighbor moves (remove a slot, add a training exemplar as a slot,
//! mutate a slot, average two slots into one), accepts by the Metropolis
//! rule, and cools geometrically. Candidate scores come from a cached
//! exemplar-to-slot distance matrix that reproduces the from-scratch scorer
//! bit for bit; the equivalence is asserted in tests and at the end of every
//! run.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopfield::MemoryBank;
use crate::mdl::{ceil_log2, pattern_bits, GEncodingScheme, MdlScore};
use crate::patterns::{Exemplar, Pattern};
use crate::stream;

/// Geometric cooling schedule: temperature multiplies by `cooling_rate`
/// every `steps_per_temperature` steps until it falls below
/// `min_temperature` or `max_steps` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub steps_per_temperature: usize,
    pub min_temperature: f64,
    pub max_steps: usize,
}

impl AnnealSchedule {
    pub fn new(
        initial_temperature: f64,
        cooling_rate: f64,
        steps_per_temperature: usize,
        min_temperature: f64,
        max_steps: usize,
    ) -> Result<Self> {
        if !min_temperature.is_finite()
            || min_temperature <= 0.0
            || !initial_temperature.is_finite()
            || initial_temperature <= min_temperature
        {
            return Err(Error::InvalidSchedule(format!(
                "need initial_temperature > min_temperature > 0, \
                 got {initial_temperature} and {min_temperature}"
            )));
        }
        if !(cooling_rate > 0.0 && cooling_rate < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "cooling_rate must lie in (0, 1), got {cooling_rate}"
            )));
        }
        if steps_per_temperature == 0 || max_steps == 0 {
            return Err(Error::InvalidSchedule(
                "steps_per_temperature and max_steps must be positive".into(),
            ));
        }
        Ok(Self {
            initial_temperature,
            cooling_rate,
            steps_per_temperature,
            min_temperature,
            max_steps,
        })
    }
}

impl Default for AnnealSchedule {
    /// 100 bits cooling by 3% every 100 steps down to 0.01: about 30k steps.
    fn default() -> Self {
        Self {
            initial_temperature: 100.0,
            cooling_rate: 0.97,
            steps_per_temperature: 100,
            min_temperature: 0.01,
            max_steps: 200_000,
        }
    }
}

/// The four neighbor moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborOpKind {
    RemoveMemory,
    AddExemplar,
    MutateMemory,
    Crossover,
}

/// Sampling weights over the four moves, normalized to sum to 1.
///
/// Add and mutate must carry some weight between them: they are the only
/// moves available to a single-slot bank, and infeasible draws are
/// resampled, so a bank could otherwise get stuck proposing nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpWeights {
    remove: f64,
    add: f64,
    mutate: f64,
    crossover: f64,
}

impl OpWeights {
    pub fn new(remove: f64, add: f64, mutate: f64, crossover: f64) -> Result<Self> {
        let raw = [remove, add, mutate, crossover];
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidOpWeights(format!(
                "weights must be finite and non-negative, got {raw:?}"
            )));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidOpWeights("all weights are zero".into()));
        }
        if add + mutate <= 0.0 {
            return Err(Error::InvalidOpWeights(
                "add_exemplar and mutate_memory cannot both be zero".into(),
            ));
        }
        Ok(Self {
            remove: remove / sum,
            add: add / sum,
            mutate: mutate / sum,
            crossover: crossover / sum,
        })
    }

    pub fn uniform() -> Self {
        Self {
            remove: 0.25,
            add: 0.25,
            mutate: 0.25,
            crossover: 0.25,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> NeighborOpKind {
        let r: f64 = rng.gen();
        if r < self.remove {
            NeighborOpKind::RemoveMemory
        } else if r < self.remove + self.add {
            NeighborOpKind::AddExemplar
        } else if r < self.remove + self.add + self.mutate {
            NeighborOpKind::MutateMemory
        } else {
            NeighborOpKind::Crossover
        }
    }
}

impl Default for OpWeights {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Mutation move parameters: each pixel independently receives Gaussian
/// noise with probability `per_index_prob`, then is clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutateParams {
    pub per_index_prob: f64,
    pub sigma: f64,
}

impl MutateParams {
    pub fn new(per_index_prob: f64, sigma: f64) -> Result<Self> {
        if !(per_index_prob > 0.0 && per_index_prob <= 1.0) {
            return Err(Error::InvalidOpWeights(format!(
                "per_index_prob must lie in (0, 1], got {per_index_prob}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidOpWeights(format!(
                "mutation sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            per_index_prob,
            sigma,
        })
    }
}

impl Default for MutateParams {
    fn default() -> Self {
        Self {
            per_index_prob: 0.1,
            sigma: 0.2,
        }
    }
}

/// Everything the annealer needs besides the data and the initial bank.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchConfig {
    pub schedule: AnnealSchedule,
    pub op_weights: OpWeights,
    pub mutate: MutateParams,
    pub scheme: GEncodingScheme,
}

/// One row of the annealing trace, recorded after every step (plus a row
/// for the initial state at step 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub temperature: f64,
    pub slot_count: usize,
    pub g_bits: f64,
    pub d_given_g_bits: f64,
    pub total_bits: f64,
    pub best_total_bits: f64,
}

/// Final search state: where the walk ended and the best bank it ever saw.
#[derive(Debug, Clone)]
pub struct AnnealState {
    pub current: MemoryBank,
    pub current_score: MdlScore,
    pub best: MemoryBank,
    pub best_score: MdlScore,
    pub temperature: f64,
    pub step: usize,
    pub rng_seed: u64,
}

/// Result of an annealing run.
#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub state: AnnealState,
    pub trace: Vec<TraceEntry>,
}

impl AnnealOutcome {
    pub fn best(&self) -> &MemoryBank {
        &self.state.best
    }

    pub fn best_score(&self) -> MdlScore {
        self.state.best_score
    }
}

/// A proposed edit, kept separate from the bank so its score can be
/// evaluated against the distance cache before anything is copied.
#[derive(Debug, Clone)]
enum Move {
    Remove(usize),
    Add(Pattern),
    Mutate {
        slot: usize,
        pattern: Pattern,
    },
    /// `keep < drop`; the averaged pattern lands in `keep`, `drop` goes away.
    Crossover {
        keep: usize,
        drop: usize,
        merged: Pattern,
    },
}

impl Move {
    fn kind(&self) -> NeighborOpKind {
        match self {
            Move::Remove(_) => NeighborOpKind::RemoveMemory,
            Move::Add(_) => NeighborOpKind::AddExemplar,
            Move::Mutate { .. } => NeighborOpKind::MutateMemory,
            Move::Crossover { .. } => NeighborOpKind::Crossover,
        }
    }
}

/// Draws one feasible move. Remove and crossover need two slots and add
/// needs a non-empty training set; infeasible draws are resampled so the
/// realized move-type distribution stays meaningful.
fn propose_move<R: Rng>(
    memories: &[Pattern],
    exemplars: &[Exemplar],
    weights: &OpWeights,
    mutate: &MutateParams,
    rng: &mut R,
) -> Move {
    debug_assert!(!memories.is_empty());
    let k = memories.len();
    loop {
        match weights.sample(rng) {
            NeighborOpKind::RemoveMemory if k >= 2 => {
                return Move::Remove(rng.gen_range(0..k));
            }
            NeighborOpKind::AddExemplar if !exemplars.is_empty() => {
                let i = rng.gen_range(0..exemplars.len());
                return Move::Add(exemplars[i].pattern.clone());
            }
            NeighborOpKind::MutateMemory => {
                let slot = rng.gen_range(0..k);
                let normal = Normal::new(0.0, mutate.sigma).expect("validated sigma");
                let pixels = memories[slot]
                    .pixels()
                    .iter()
                    .map(|&v| {
                        if rng.gen::<f64>() < mutate.per_index_prob {
                            (v + normal.sample(rng)).clamp(0.0, 1.0)
                        } else {
                            v
                        }
                    })
                    .collect();
                return Move::Mutate {
                    slot,
                    pattern: Pattern::new(pixels).expect("clamped pixels are in range"),
                };
            }
            NeighborOpKind::Crossover if k >= 2 => {
                let a = rng.gen_range(0..k);
                let mut b = rng.gen_range(0..k - 1);
                if b >= a {
                    b += 1;
                }
                let merged = Pattern::new(
                    memories[a]
                        .pixels()
                        .iter()
                        .zip(memories[b].pixels())
                        .map(|(x, y)| (x + y) / 2.0)
                        .collect(),
                )
                .expect("average of in-range pixels is in range");
                return Move::Crossover {
                    keep: a.min(b),
                    drop: a.max(b),
                    merged,
                };
            }
            _ => continue,
        }
    }
}

/// Applies a move to a plain memory list.
fn apply_to_memories(mv: &Move, memories: &mut Vec<Pattern>) {
    match mv {
        Move::Remove(i) => {
            memories.remove(*i);
        }
        Move::Add(p) => memories.push(p.clone()),
        Move::Mutate { slot, pattern } => memories[*slot] = pattern.clone(),
        Move::Crossover { keep, drop, merged } => {
            memories[*keep] = merged.clone();
            memories.remove(*drop);
        }
    }
}

/// Public form of the neighbor proposal: a fresh bank plus the move kind.
pub fn propose_neighbor<R: Rng>(
    bank: &MemoryBank,
    exemplars: &[Exemplar],
    weights: &OpWeights,
    mutate: &MutateParams,
    rng: &mut R,
) -> (MemoryBank, NeighborOpKind) {
    let mv = propose_move(bank.memories(), exemplars, weights, mutate, rng);
    let mut memories = bank.memories().to_vec();
    apply_to_memories(&mv, &mut memories);
    (
        MemoryBank::new(memories, bank.beta()).expect("moves preserve bank validity"),
        mv.kind(),
    )
}

/// Metropolis rule: improvements always pass, a deficit of `delta_bits`
/// passes with probability `exp(-delta_bits / temperature)`.
pub fn accept<R: Rng>(delta_bits: f64, temperature: f64, rng: &mut R) -> bool {
    debug_assert!(temperature > 0.0);
    delta_bits <= 0.0 || rng.gen::<f64>() < (-delta_bits / temperature).exp()
}

/// Candidate score plus the pieces needed to commit the move cheaply.
struct CandidateEval {
    score: MdlScore,
    new_column: Option<Vec<f64>>,
    new_g: Option<f64>,
}

/// Cached exemplar-to-slot L1 distances and per-slot bank bits.
///
/// Evaluating a move touches one column of the matrix instead of rescoring
/// every pair. The accumulation order matches `mdl::mdl_score` exactly
/// (slot-major for bank bits, exemplar-major for data bits, minima scanned
/// in slot order), so cached and from-scratch scores are identical floats,
/// not merely close.
struct ScoreCache {
    rows: Vec<Vec<f64>>,
    g_slots: Vec<f64>,
    diff_mult: f64,
    scheme: GEncodingScheme,
}

impl ScoreCache {
    fn new(memories: &[Pattern], exemplars: &[Exemplar], scheme: GEncodingScheme) -> Self {
        let rows = exemplars
            .iter()
            .map(|e| memories.iter().map(|m| m.l1(&e.pattern)).collect())
            .collect();
        let g_slots = memories.iter().map(|m| pattern_bits(m, &scheme)).collect();
        Self {
            rows,
            g_slots,
            diff_mult: f64::from(ceil_log2(memories[0].size())),
            scheme,
        }
    }

    fn score(&self) -> MdlScore {
        let g: f64 = self.g_slots.iter().sum();
        let index_bits = f64::from(ceil_log2(self.g_slots.len()));
        let d: f64 = self
            .rows
            .iter()
            .map(|row| {
                let min = row.iter().copied().fold(f64::INFINITY, f64::min);
                index_bits + min * self.diff_mult
            })
            .sum();
        MdlScore::new(g, d)
    }

    fn eval(&self, mv: &Move, exemplars: &[Exemplar]) -> CandidateEval {
        match mv {
            Move::Remove(i) => {
                let g: f64 = self
                    .g_slots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j != i)
                    .map(|(_, &b)| b)
                    .sum();
                let index_bits = f64::from(ceil_log2(self.g_slots.len() - 1));
                let d: f64 = self
                    .rows
                    .iter()
                    .map(|row| {
                        let min = row
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| j != i)
                            .map(|(_, &v)| v)
                            .fold(f64::INFINITY, f64::min);
                        index_bits + min * self.diff_mult
                    })
                    .sum();
                CandidateEval {
                    score: MdlScore::new(g, d),
                    new_column: None,
                    new_g: None,
                }
            }
            Move::Add(p) => {
                let column: Vec<f64> = exemplars.iter().map(|e| p.l1(&e.pattern)).collect();
                let slot_g = pattern_bits(p, &self.scheme);
                let g = self.g_slots.iter().sum::<f64>() + slot_g;
                let index_bits = f64::from(ceil_log2(self.g_slots.len() + 1));
                let d: f64 = self
                    .rows
                    .iter()
                    .zip(&column)
                    .map(|(row, &extra)| {
                        let min = row.iter().copied().fold(f64::INFINITY, f64::min).min(extra);
                        index_bits + min * self.diff_mult
                    })
                    .sum();
                CandidateEval {
                    score: MdlScore::new(g, d),
                    new_column: Some(column),
                    new_g: Some(slot_g),
                }
            }
            Move::Mutate { slot, pattern } => {
                let column: Vec<f64> = exemplars.iter().map(|e| pattern.l1(&e.pattern)).collect();
                let slot_g = pattern_bits(pattern, &self.scheme);
                let g: f64 = self
                    .g_slots
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| if j == *slot { slot_g } else { b })
                    .sum();
                let index_bits = f64::from(ceil_log2(self.g_slots.len()));
                let d: f64 = self
                    .rows
                    .iter()
                    .zip(&column)
                    .map(|(row, &replaced)| {
                        let min = row
                            .iter()
                            .enumerate()
                            .map(|(j, &v)| if j == *slot { replaced } else { v })
                            .fold(f64::INFINITY, f64::min);
                        index_bits + min * self.diff_mult
                    })
                    .sum();
                CandidateEval {
                    score: MdlScore::new(g, d),
                    new_column: Some(column),
                    new_g: Some(slot_g),
                }
            }
            Move::Crossover { keep, drop, merged } => {
                let column: Vec<f64> = exemplars.iter().map(|e| merged.l1(&e.pattern)).collect();
                let slot_g = pattern_bits(merged, &self.scheme);
                let g: f64 = self
                    .g_slots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j != drop)
                    .map(|(j, &b)| if j == *keep { slot_g } else { b })
                    .sum();
                let index_bits = f64::from(ceil_log2(self.g_slots.len() - 1));
                let d: f64 = self
                    .rows
                    .iter()
                    .zip(&column)
                    .map(|(row, &replaced)| {
                        let min = row
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| j != drop)
                            .map(|(j, &v)| if j == *keep { replaced } else { v })
                            .fold(f64::INFINITY, f64::min);
                        index_bits + min * self.diff_mult
                    })
                    .sum();
                CandidateEval {
                    score: MdlScore::new(g, d),
                    new_column: Some(column),
                    new_g: Some(slot_g),
                }
            }
        }
    }

    fn apply(&mut self, mv: &Move, eval: CandidateEval) {
        match mv {
            Move::Remove(i) => {
                for row in &mut self.rows {
                    row.remove(*i);
                }
                self.g_slots.remove(*i);
            }
            Move::Add(_) => {
                let column = eval.new_column.expect("add carries a column");
                for (row, v) in self.rows.iter_mut().zip(column) {
                    row.push(v);
                }
                self.g_slots
                    .push(eval.new_g.expect("add carries bank bits"));
            }
            Move::Mutate { slot, .. } => {
                let column = eval.new_column.expect("mutate carries a column");
                for (row, v) in self.rows.iter_mut().zip(column) {
                    row[*slot] = v;
                }
                self.g_slots[*slot] = eval.new_g.expect("mutate carries bank bits");
            }
            Move::Crossover { keep, drop, .. } => {
                let column = eval.new_column.expect("crossover carries a column");
                for (row, v) in self.rows.iter_mut().zip(column) {
                    row[*keep] = v;
                    row.remove(*drop);
                }
                self.g_slots[*keep] = eval.new_g.expect("crossover carries bank bits");
                self.g_slots.remove(*drop);
            }
        }
    }
}

/// A single-slot bank holding one uniformly random training exemplar; the
/// annealer's starting hypothesis. Draws from its own RNG stream so the
/// pick does not disturb the annealing walk.
pub fn initial_bank(exemplars: &[Exemplar], beta: f64, seed: u64) -> Result<MemoryBank> {
    if exemplars.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = crate::rng_stream(seed, stream::INIT);
    let i = rng.gen_range(0..exemplars.len());
    MemoryBank::new(vec![exemplars[i].pattern.clone()], beta)
}

/// Runs the annealing loop and returns the best bank seen, its score, and a
/// per-step trace. Deterministic in `(exemplars, config, init, seed)`.
pub fn anneal(
    exemplars: &[Exemplar],
    config: &SearchConfig,
    init: MemoryBank,
    seed: u64,
) -> Result<AnnealOutcome> {
    if exemplars.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if exemplars[0].pattern.size() != init.pattern_size() {
        return Err(Error::SizeMismatch {
            expected: exemplars[0].pattern.size(),
            actual: init.pattern_size(),
        });
    }
    let schedule = &config.schedule;
    let beta = init.beta();
    let mut rng = crate::rng_stream(seed, stream::ANNEAL);

    let mut memories = init.memories().to_vec();
    let mut cache = ScoreCache::new(&memories, exemplars, config.scheme);
    let mut current = cache.score();
    let mut best_memories = memories.clone();
    let mut best = current;

    let mut temperature = schedule.initial_temperature;
    let mut step = 0usize;
    let mut trace = Vec::with_capacity(schedule.max_steps.min(40_000) + 1);
    trace.push(TraceEntry {
        step,
        temperature,
        slot_count: memories.len(),
        g_bits: current.g_bits,
        d_given_g_bits: current.d_given_g_bits,
        total_bits: current.total_bits,
        best_total_bits: best.total_bits,
    });

    while step < schedule.max_steps && temperature >= schedule.min_temperature {
        let mv = propose_move(
            &memories,
            exemplars,
            &config.op_weights,
            &config.mutate,
            &mut rng,
        );
        let candidate = cache.eval(&mv, exemplars);
        let delta = candidate.score.total_bits - current.total_bits;
        if accept(delta, temperature, &mut rng) {
            current = candidate.score;
            cache.apply(&mv, candidate);
            apply_to_memories(&mv, &mut memories);
            if current.total_bits < best.total_bits {
                best = current;
                best_memories = memories.clone();
            }
        }
        step += 1;
        trace.push(TraceEntry {
            step,
            temperature,
            slot_count: memories.len(),
            g_bits: current.g_bits,
            d_given_g_bits: current.d_given_g_bits,
            total_bits: current.total_bits,
            best_total_bits: best.total_bits,
        });
        if step.is_multiple_of(schedule.steps_per_temperature) {
            temperature *= schedule.cooling_rate;
        }
    }

    let best_bank = MemoryBank::new(best_memories, beta)?;
    debug_assert_eq!(
        best.total_bits,
        crate::mdl::mdl_score(&best_bank, exemplars, &config.scheme).total_bits,
        "cached score diverged from the from-scratch scorer"
    );
    let current_bank = MemoryBank::new(memories, beta)?;
    Ok(AnnealOutcome {
        state: AnnealState {
            current: current_bank,
            current_score: current,
            best: best_bank,
            best_score: best,
            temperature,
            step,
            rng_seed: seed,
        },
        trace,
    })
}
