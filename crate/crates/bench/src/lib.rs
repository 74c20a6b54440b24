//! Shared fixtures for the criterion benches: seeded datasets and banks so
//! every benchmark measures the same workload run to run.

use mdlhn_core::{
    build_dataset, golden_digits, Dataset, ExemplarType, MemoryBank, NoisePreset, NoiseSpec,
};

/// A seeded low-noise discrete dataset.
pub fn low_noise_dataset(classes: usize, per_digit: usize, seed: u64) -> Dataset {
    let spec = NoiseSpec::preset(NoisePreset::Low, ExemplarType::Discrete, seed);
    build_dataset(classes, per_digit, spec).expect("valid benchmark dataset")
}

/// A bank holding the first `classes` golden digits.
pub fn golden_bank(classes: usize) -> MemoryBank {
    let golden = golden_digits(classes).expect("valid class count");
    MemoryBank::new(golden.digits().to_vec(), 16.0).expect("valid benchmark bank")
}
