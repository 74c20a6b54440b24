//! Experiment harness: capacity-regime baselines, MDL training runs, the
//! ambiguity-filtered variant, and the condition-grid sweep with aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{retrieve, MemoryBank};
use crate::mdl::{exemplar_code, MdlScore};
use crate::patterns::{
    build_dataset, filter_ambiguous, Dataset, DistanceMetric, Exemplar, ExemplarType, NoisePreset,
    NoiseSpec, Pattern,
};
use crate::search::{anneal, initial_bank, AnnealOutcome, SearchConfig};
use crate::stream;

/// How model capacity is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// One slot per training exemplar, fitted by alternating refinement.
    Unconstrained,
    /// One slot per golden digit, fitted the same way.
    #[serde(rename = "golden")]
    GoldenCapacity,
    /// Slot count chosen by description length via annealing.
    Mdl,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Unconstrained => write!(f, "unconstrained"),
            Regime::GoldenCapacity => write!(f, "golden"),
            Regime::Mdl => write!(f, "mdl"),
        }
    }
}

/// One cell of the experimental grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub class_count: usize,
    pub exemplars_per_digit: usize,
    pub exemplar_type: ExemplarType,
    pub noise: NoisePreset,
    pub regime: Regime,
    pub seeds: Vec<u64>,
}

impl Condition {
    pub fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.class_count) {
            return Err(Error::ClassCountOutOfRange(self.class_count));
        }
        if self.exemplars_per_digit == 0 {
            return Err(Error::EmptyExemplarCount);
        }
        if self.seeds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(())
    }
}

/// Knobs shared by every run kind.
#[derive(Debug, Clone)]
pub struct ExperimentParams {
    pub beta: f64,
    pub search: SearchConfig,
    /// Distance used by the ambiguity filter in follow-up runs.
    pub filter_metric: DistanceMetric,
    /// Match each golden digit to a distinct slot (exact assignment) instead
    /// of its nearest slot. Falls back to nearest when slots are too few.
    pub one_to_one_matching: bool,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub kmeans_rounds: usize,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            beta: crate::hopfield::DEFAULT_BETA,
            search: SearchConfig::default(),
            filter_metric: DistanceMetric::L1,
            one_to_one_matching: false,
            max_iterations: crate::hopfield::DEFAULT_MAX_ITERATIONS,
            tolerance: crate::hopfield::DEFAULT_TOLERANCE,
            kmeans_rounds: 50,
        }
    }
}

/// Everything measured on one trained bank.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub final_slot_count: usize,
    pub golden_count: usize,
    /// Exemplars actually trained on (smaller than the dataset when the
    /// ambiguity filter ran first).
    pub exemplar_count: usize,
    pub mean_golden_to_memory_l2: f64,
    pub per_exemplar_assignment: Vec<usize>,
    pub exemplar_to_memory_l1_mean: f64,
    pub exemplar_to_memory_l1_median: f64,
    pub exemplar_to_golden_l1_mean: f64,
    pub exemplar_to_golden_l1_median: f64,
    /// Present for mdl-regime runs only.
    pub mdl_components: Option<MdlScore>,
}

/// Match of each golden digit to a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenMatch {
    /// Per golden digit: `(slot_index, l2_distance)`.
    pub assignments: Vec<(usize, f64)>,
    pub mean_l2: f64,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("distances are not NaN"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Sample standard deviation; 0 for fewer than two values.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Fits `k` slots to the exemplars by alternating refinement: assign each
/// exemplar to its L1-nearest slot, replace each slot by the mean of its
/// assignees, repeat until assignments stabilize or `rounds` is exhausted.
/// Slots start at `k` distinct random exemplars; a slot that loses all its
/// exemplars keeps its value.
pub fn fit_slots(
    exemplars: &[Exemplar],
    k: usize,
    rounds: usize,
    seed: u64,
) -> Result<Vec<Pattern>> {
    if exemplars.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > exemplars.len() {
        return Err(Error::SizeMismatch {
            expected: exemplars.len(),
            actual: k,
        });
    }
    let mut rng = crate::rng_stream(seed, stream::KMEANS);
    let size = exemplars[0].pattern.size();
    let picks = rand::seq::index::sample(&mut rng, exemplars.len(), k);
    let mut slots: Vec<Pattern> = picks.iter().map(|i| exemplars[i].pattern.clone()).collect();

    let mut assignment = vec![usize::MAX; exemplars.len()];
    for _ in 0..rounds {
        let mut next = vec![0usize; exemplars.len()];
        for (e_idx, e) in exemplars.iter().enumerate() {
            let mut best = (0usize, f64::INFINITY);
            for (s_idx, s) in slots.iter().enumerate() {
                let d = e.pattern.l1(s);
                if d < best.1 {
                    best = (s_idx, d);
                }
            }
            next[e_idx] = best.0;
        }
        if next == assignment {
            break;
        }
        assignment = next;
        let mut sums = vec![vec![0.0; size]; k];
        let mut counts = vec![0usize; k];
        for (e, &s) in exemplars.iter().zip(&assignment) {
            counts[s] += 1;
            for (acc, &v) in sums[s].iter_mut().zip(e.pattern.pixels()) {
                *acc += v;
            }
        }
        for (s_idx, (sum, &count)) in sums.into_iter().zip(&counts).enumerate() {
            if count > 0 {
                let pixels = sum.into_iter().map(|v| v / count as f64).collect();
                slots[s_idx] = Pattern::new(pixels).expect("means of in-range pixels");
            }
        }
    }
    Ok(slots)
}

/// Maps each golden digit to its L2-nearest slot (many-to-one; ties to the
/// lowest slot index) and reports the mean of the matched distances.
pub fn match_memories_to_golden(bank: &MemoryBank, golden: &[Pattern]) -> GoldenMatch {
    let assignments: Vec<(usize, f64)> = golden
        .iter()
        .map(|g| crate::hopfield::nearest_memory(bank, g, DistanceMetric::L2))
        .collect();
    let mean_l2 = mean(&assignments.iter().map(|a| a.1).collect::<Vec<_>>());
    GoldenMatch {
        assignments,
        mean_l2,
    }
}

/// One-to-one variant: each golden digit gets a distinct slot, chosen to
/// minimize the total L2 distance (exact assignment by subset dynamic
/// programming over the golden digits). Requires `slot_count >=
/// golden_count`; callers fall back to the nearest matching otherwise.
pub fn match_memories_one_to_one(bank: &MemoryBank, golden: &[Pattern]) -> Option<GoldenMatch> {
    let g_count = golden.len();
    let s_count = bank.slot_count();
    if g_count > s_count || g_count > 16 {
        return None;
    }
    let cost: Vec<Vec<f64>> = golden
        .iter()
        .map(|g| bank.memories().iter().map(|m| g.l2(m)).collect())
        .collect();
    let full = (1usize << g_count) - 1;
    // dp[t][mask]: best cost matching the goldens in `mask` to slots 0..t.
    let mut dp = vec![vec![f64::INFINITY; full + 1]; s_count + 1];
    dp[0][0] = 0.0;
    for t in 0..s_count {
        for mask in 0..=full {
            let base = dp[t][mask];
            if base.is_infinite() {
                continue;
            }
            // Slot t left unused.
            if base < dp[t + 1][mask] {
                dp[t + 1][mask] = base;
            }
            for (g, row) in cost.iter().enumerate() {
                if mask & (1 << g) == 0 {
                    let with = mask | (1 << g);
                    let c = base + row[t];
                    if c < dp[t + 1][with] {
                        dp[t + 1][with] = c;
                    }
                }
            }
        }
    }
    // Walk back through the stages. Equality checks are exact: each dp value
    // was produced by one of these very expressions.
    let mut assignments = vec![(usize::MAX, 0.0); g_count];
    let mut mask = full;
    for t in (0..s_count).rev() {
        if dp[t][mask] == dp[t + 1][mask] {
            continue;
        }
        let g = (0..g_count)
            .find(|&g| {
                mask & (1 << g) != 0 && dp[t][mask & !(1 << g)] + cost[g][t] == dp[t + 1][mask]
            })
            .expect("every improving stage used exactly one golden");
        assignments[g] = (t, cost[g][t]);
        mask &= !(1 << g);
    }
    debug_assert_eq!(mask, 0);
    let mean_l2 = mean(&assignments.iter().map(|a| a.1).collect::<Vec<_>>());
    Some(GoldenMatch {
        assignments,
        mean_l2,
    })
}

fn golden_match(bank: &MemoryBank, golden: &[Pattern], params: &ExperimentParams) -> GoldenMatch {
    if params.one_to_one_matching {
        if let Some(m) = match_memories_one_to_one(bank, golden) {
            return m;
        }
    }
    match_memories_to_golden(bank, golden)
}

fn dataset_for(condition: &Condition, seed: u64) -> Result<Dataset> {
    build_dataset(
        condition.class_count,
        condition.exemplars_per_digit,
        NoiseSpec::preset(condition.noise, condition.exemplar_type, seed),
    )
}

fn assemble_metrics(
    bank: &MemoryBank,
    dataset: &Dataset,
    exemplars: &[Exemplar],
    assignment: Vec<usize>,
    to_memory: Vec<f64>,
    mdl_components: Option<MdlScore>,
    params: &ExperimentParams,
) -> RunMetrics {
    let to_golden: Vec<f64> = exemplars
        .iter()
        .map(|e| e.pattern.l1(&dataset.golden().digits()[e.source_class]))
        .collect();
    let matched = golden_match(bank, dataset.golden().digits(), params);
    RunMetrics {
        final_slot_count: bank.slot_count(),
        golden_count: dataset.golden().class_count(),
        exemplar_count: exemplars.len(),
        mean_golden_to_memory_l2: matched.mean_l2,
        per_exemplar_assignment: assignment,
        exemplar_to_memory_l1_mean: mean(&to_memory),
        exemplar_to_memory_l1_median: median(&to_memory),
        exemplar_to_golden_l1_mean: mean(&to_golden),
        exemplar_to_golden_l1_median: median(&to_golden),
        mdl_components,
    }
}

/// Capacity-regime baseline: fit a fixed number of slots (one per exemplar,
/// or one per golden digit), then measure retrieval from every exemplar.
/// The exemplar-to-memory distance is to the retrieved state.
pub fn run_experiment1(
    condition: &Condition,
    params: &ExperimentParams,
    seed: u64,
) -> Result<RunMetrics> {
    let dataset = dataset_for(condition, seed)?;
    let k = match condition.regime {
        Regime::Unconstrained => dataset.len(),
        Regime::GoldenCapacity => condition.class_count,
        Regime::Mdl => return Err(Error::InvalidRegime(Regime::Mdl)),
    };
    let slots = fit_slots(dataset.exemplars(), k, params.kmeans_rounds, seed)?;
    let bank = MemoryBank::new(slots, params.beta)?;
    let mut assignment = Vec::with_capacity(dataset.len());
    let mut to_memory = Vec::with_capacity(dataset.len());
    for e in dataset.exemplars() {
        let r = retrieve(&bank, &e.pattern, params.max_iterations, params.tolerance)?;
        assignment.push(r.winner_index);
        to_memory.push(e.pattern.l1(&r.final_state));
    }
    Ok(assemble_metrics(
        &bank,
        &dataset,
        dataset.exemplars(),
        assignment,
        to_memory,
        None,
        params,
    ))
}

/// MDL training on a prepared dataset; returns the annealing outcome for
/// callers that write artifacts, plus the assembled metrics. The
/// exemplar-to-memory distance is to the coding-assigned (L1-nearest) slot.
pub fn run_mdl_on(
    dataset: &Dataset,
    exemplars: &[Exemplar],
    params: &ExperimentParams,
    seed: u64,
) -> Result<(AnnealOutcome, RunMetrics)> {
    let init = initial_bank(exemplars, params.beta, seed)?;
    let outcome = anneal(exemplars, &params.search, init, seed)?;
    let bank = outcome.best();
    let mut assignment = Vec::with_capacity(exemplars.len());
    let mut to_memory = Vec::with_capacity(exemplars.len());
    for e in exemplars {
        let code = exemplar_code(bank, &e.pattern);
        assignment.push(code.memory_index);
        to_memory.push(e.pattern.l1(&bank.memories()[code.memory_index]));
    }
    let metrics = assemble_metrics(
        bank,
        dataset,
        exemplars,
        assignment,
        to_memory,
        Some(outcome.best_score()),
        params,
    );
    Ok((outcome, metrics))
}

/// MDL training run: anneal on the condition's dataset.
pub fn run_experiment2(
    condition: &Condition,
    params: &ExperimentParams,
    seed: u64,
) -> Result<RunMetrics> {
    if condition.regime != Regime::Mdl {
        return Err(Error::InvalidRegime(condition.regime));
    }
    let dataset = dataset_for(condition, seed)?;
    run_mdl_on(&dataset, dataset.exemplars(), params, seed).map(|(_, m)| m)
}

/// MDL training after dropping ambiguous exemplars (those closer to a
/// golden digit that is not their source). Otherwise identical to
/// `run_experiment2`, including the seed.
pub fn run_followup(
    condition: &Condition,
    params: &ExperimentParams,
    seed: u64,
) -> Result<RunMetrics> {
    if condition.regime != Regime::Mdl {
        return Err(Error::InvalidRegime(condition.regime));
    }
    let dataset = dataset_for(condition, seed)?;
    let filtered = filter_ambiguous(&dataset, params.filter_metric);
    run_mdl_on(&filtered, filtered.exemplars(), params, seed).map(|(_, m)| m)
}

/// Aggregated results for one condition.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub condition: Condition,
    /// Seeds that produced metrics.
    pub completed_seeds: usize,
    pub mean_slots: Option<f64>,
    pub sd_slots: Option<f64>,
    pub mean_l2_golden: Option<f64>,
    /// Mean best total bits; mdl-regime rows only.
    pub mean_total_bits: Option<f64>,
    /// `(seed, error)` for runs that failed.
    pub failures: Vec<(u64, String)>,
}

/// A full sweep: per-condition rows plus per-run metrics for callers that
/// need more than the aggregates.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Per condition, the per-seed metrics that succeeded, in seed order.
    pub runs: Vec<Vec<(u64, RunMetrics)>>,
}

impl SweepOutcome {
    pub fn any_succeeded(&self) -> bool {
        self.rows.iter().any(|r| r.completed_seeds > 0)
    }
}

fn dispatch(
    condition: &Condition,
    params: &ExperimentParams,
    seed: u64,
    followup: bool,
) -> Result<RunMetrics> {
    match condition.regime {
        Regime::Unconstrained | Regime::GoldenCapacity => run_experiment1(condition, params, seed),
        Regime::Mdl if followup => run_followup(condition, params, seed),
        Regime::Mdl => run_experiment2(condition, params, seed),
    }
}

/// Runs every condition across its seeds (in parallel) and aggregates.
/// Failures are recorded per row; the sweep itself keeps going.
pub fn sweep(
    grid: &[Condition],
    params: &ExperimentParams,
    followup: bool,
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for condition in grid {
        condition.validate()?;
    }
    let per_condition: Vec<Vec<(u64, Result<RunMetrics>)>> = grid
        .par_iter()
        .map(|condition| {
            condition
                .seeds
                .par_iter()
                .map(|&seed| (seed, dispatch(condition, params, seed, followup)))
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(grid.len());
    let mut runs = Vec::with_capacity(grid.len());
    for (condition, seed_results) in grid.iter().zip(per_condition) {
        let mut ok: Vec<(u64, RunMetrics)> = Vec::new();
        let mut failures = Vec::new();
        for (seed, result) in seed_results {
            match result {
                Ok(m) => ok.push((seed, m)),
                Err(e) => failures.push((seed, e.to_string())),
            }
        }
        let slots: Vec<f64> = ok.iter().map(|(_, m)| m.final_slot_count as f64).collect();
        let l2: Vec<f64> = ok.iter().map(|(_, m)| m.mean_golden_to_memory_l2).collect();
        let totals: Vec<f64> = ok
            .iter()
            .filter_map(|(_, m)| m.mdl_components.map(|s| s.total_bits))
            .collect();
        rows.push(SweepRow {
            condition: condition.clone(),
            completed_seeds: ok.len(),
            mean_slots: (!slots.is_empty()).then(|| mean(&slots)),
            sd_slots: (!slots.is_empty()).then(|| std_dev(&slots)),
            mean_l2_golden: (!l2.is_empty()).then(|| mean(&l2)),
            mean_total_bits: (!totals.is_empty()).then(|| mean(&totals)),
            failures,
        });
        runs.push(ok);
    }
    Ok(SweepOutcome { rows, runs })
}

/// Builds a grid over `class_counts x exemplar_counts` with shared seeds.
pub fn build_grid(
    class_counts: &[usize],
    exemplar_counts: &[usize],
    exemplar_type: ExemplarType,
    noise: NoisePreset,
    regime: Regime,
    seeds: &[u64],
) -> Vec<Condition> {
    let mut grid = Vec::with_capacity(class_counts.len() * exemplar_counts.len());
    for &class_count in class_counts {
        for &exemplars_per_digit in exemplar_counts {
            grid.push(Condition {
                class_count,
                exemplars_per_digit,
                exemplar_type,
                noise,
                regime,
                seeds: seeds.to_vec(),
            });
        }
    }
    grid
}

/// The paper-scale grid: all ten class counts, the four exemplar counts.
pub const CANONICAL_EXEMPLAR_COUNTS: [usize; 4] = [1, 5, 10, 30];
