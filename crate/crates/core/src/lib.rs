//! Training library for minimum-description-length memory banks.
//!
//! Given noisy exemplars of prototype bitmaps, simulated annealing searches
//! over Hopfield memory banks for the one that minimizes the two-part code
//! length: bits to describe the bank plus bits to describe each exemplar as
//! (nearest memory index, pixel difference). At the right noise levels the
//! shortest code stores one memory per underlying prototype, so the bank
//! recovers the prototypes without ever being told how many there are.

pub mod error;
pub mod experiments;
pub mod hopfield;
pub mod io;
pub mod mdl;
pub mod patterns;
pub mod search;

pub use error::{Error, Result};
pub use experiments::{Condition, ExperimentParams, Regime, RunMetrics, SweepOutcome};
pub use hopfield::{nearest_memory, retrieve, MemoryBank, RetrievalResult};
pub use mdl::{ceil_log2, mdl_score, pixel_code_length, ExemplarCode, GEncodingScheme, MdlScore};
pub use patterns::{
    build_dataset, filter_ambiguous, golden_digits, Dataset, DistanceMetric, Exemplar,
    ExemplarType, GoldenSet, NoisePreset, NoiseSpec, Pattern,
};
pub use search::{anneal, initial_bank, AnnealOutcome, AnnealSchedule, SearchConfig, TraceEntry};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named ChaCha8 streams so dataset generation, annealing, and baseline
/// fitting draw from independent sequences of the same run seed.
pub(crate) mod stream {
    pub const DATASET: u64 = 0;
    pub const ANNEAL: u64 = 1;
    pub const KMEANS: u64 = 2;
    pub const INIT: u64 = 3;
}

/// Seeded RNG on a named stream. Reproducible across platforms.
pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
