//! Modern Hopfield memory bank with softmax attention retrieval.
//!
//! Retrieval iterates `state <- M^T softmax(beta * M * state)` until the
//! state stops moving. At high beta the update snaps to the best-matching
//! memory, so stored memories are fixed points when they are separated.

use crate::error::{Error, Result};
use crate::patterns::{DistanceMetric, Pattern};

/// Default inverse temperature for retrieval.
pub const DEFAULT_BETA: f64 = 16.0;
/// Default iteration cap for retrieval.
pub const DEFAULT_MAX_ITERATIONS: usize = 100;
/// Default max-norm convergence tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// An ordered, non-empty set of stored memories sharing one pattern size,
/// plus the retrieval inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBank {
    memories: Vec<Pattern>,
    beta: f64,
}

impl MemoryBank {
    pub fn new(memories: Vec<Pattern>, beta: f64) -> Result<Self> {
        if memories.is_empty() {
            return Err(Error::EmptyBank);
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        let size = memories[0].size();
        for m in &memories {
            if m.size() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    actual: m.size(),
                });
            }
        }
        Ok(Self { memories, beta })
    }

    pub fn memories(&self) -> &[Pattern] {
        &self.memories
    }

    pub fn slot_count(&self) -> usize {
        self.memories.len()
    }

    pub fn pattern_size(&self) -> usize {
        self.memories[0].size()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The full-memorization bank: one slot per exemplar, in dataset order.
    /// The baseline every description-length argument is made against.
    pub fn memorizing(exemplars: &[crate::patterns::Exemplar], beta: f64) -> Result<Self> {
        Self::new(exemplars.iter().map(|e| e.pattern.clone()).collect(), beta)
    }
}

/// Outcome of iterated retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub final_state: Pattern,
    /// Update steps actually performed.
    pub iterations: usize,
    /// Whether the max-norm step change dropped below tolerance in budget.
    pub converged: bool,
    /// Memory with the largest softmax weight at the final state.
    pub winner_index: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax of `beta * M * state`, computed stably.
fn attention_weights(bank: &MemoryBank, state: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = bank
        .memories
        .iter()
        .map(|m| bank.beta * dot(m.pixels(), state))
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Runs synchronous retrieval from `probe` until the state moves less than
/// `tolerance` in max norm or `max_iterations` is exhausted. The final state
/// is clamped to `[0, 1]` before being returned.
pub fn retrieve(
    bank: &MemoryBank,
    probe: &Pattern,
    max_iterations: usize,
    tolerance: f64,
) -> Result<RetrievalResult> {
    if probe.size() != bank.pattern_size() {
        return Err(Error::SizeMismatch {
            expected: bank.pattern_size(),
            actual: probe.size(),
        });
    }
    let mut state: Vec<f64> = probe.pixels().to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let weights = attention_weights(bank, &state);
        let mut next = vec![0.0; state.len()];
        for (w, m) in weights.iter().zip(&bank.memories) {
            for (n, p) in next.iter_mut().zip(m.pixels()) {
                *n += w * p;
            }
        }
        let delta = state
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        state = next;
        iterations += 1;
        if delta < tolerance {
            converged = true;
            break;
        }
    }
    let weights = attention_weights(bank, &state);
    let winner_index = weights
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &w)| {
            if w > best.1 {
                (i, w)
            } else {
                best
            }
        })
        .0;
    let clamped: Vec<f64> = state.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    Ok(RetrievalResult {
        final_state: Pattern::new(clamped).expect("clamped state is in range"),
        iterations,
        converged,
        winner_index,
    })
}

/// Index and distance of the memory nearest to `probe` under `metric`.
/// Ties break to the lowest index.
pub fn nearest_memory(bank: &MemoryBank, probe: &Pattern, metric: DistanceMetric) -> (usize, f64) {
    let mut best = (0, metric.eval(&bank.memories[0], probe));
    for (i, m) in bank.memories.iter().enumerate().skip(1) {
        let d = metric.eval(m, probe);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// L1 nearest memory; the distance the description-length code is built on.
pub(crate) fn nearest_l1(bank: &MemoryBank, probe: &Pattern) -> (usize, f64) {
    nearest_memory(bank, probe, DistanceMetric::L1)
}

/// Hopfield energy `-(1/beta) * logsumexp(beta * M * state)`. Lower is
/// closer to a stored memory; retrieval never increases it.
pub fn energy(bank: &MemoryBank, state: &Pattern) -> f64 {
    let logits: Vec<f64> = bank
        .memories
        .iter()
        .map(|m| bank.beta * dot(m.pixels(), state.pixels()))
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    -lse / bank.beta
}
