//! Two-part description-length scoring.
//!
//! A memory bank is judged by the total bits needed to transmit it plus the
//! bits needed to transmit every exemplar given the bank: each exemplar is
//! coded as the index of its nearest memory under L1 plus the L1 difference
//! from that memory. Banks with too many memories pay in bank bits; banks
//! with too few pay in difference bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopfield::MemoryBank;
use crate::patterns::{Exemplar, Pattern};

/// How memory-bank pixels are costed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GEncodingScheme {
    /// Flat cost per pixel regardless of value.
    FixedLength { bits_per_pixel: f64 },
    /// Cheap near 0 and 1, expensive near 0.5: `(1 + 10 v (1 - v))^2` bits.
    PreferExtreme,
}

impl GEncodingScheme {
    pub fn fixed(bits_per_pixel: f64) -> Result<Self> {
        if !bits_per_pixel.is_finite() || bits_per_pixel <= 0.0 {
            return Err(Error::InvalidScheme(format!(
                "bits_per_pixel must be positive, got {bits_per_pixel}"
            )));
        }
        Ok(GEncodingScheme::FixedLength { bits_per_pixel })
    }
}

impl Default for GEncodingScheme {
    fn default() -> Self {
        GEncodingScheme::FixedLength {
            bits_per_pixel: 1.0,
        }
    }
}

/// Code length of a single bank pixel under `scheme`.
pub fn pixel_code_length(value: f64, scheme: &GEncodingScheme) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::PixelOutOfRange(value));
    }
    Ok(pixel_bits(value, scheme))
}

fn pixel_bits(value: f64, scheme: &GEncodingScheme) -> f64 {
    match scheme {
        GEncodingScheme::FixedLength { bits_per_pixel } => *bits_per_pixel,
        GEncodingScheme::PreferExtreme => {
            let b = 1.0 + 10.0 * value * (1.0 - value);
            b * b
        }
    }
}

/// Bank description length under `scheme`, per memory then per pixel.
pub(crate) fn pattern_bits(p: &Pattern, scheme: &GEncodingScheme) -> f64 {
    p.pixels().iter().map(|&v| pixel_bits(v, scheme)).sum()
}

/// Total bits to describe the bank itself.
pub fn g_length(bank: &MemoryBank, scheme: &GEncodingScheme) -> f64 {
    bank.memories()
        .iter()
        .map(|m| pattern_bits(m, scheme))
        .sum()
}

/// Smallest `b` with `2^b >= n`, as used for fixed-width index codes.
/// `ceil_log2(1) == 0`: a single choice costs nothing to name.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n >= 1, "ceil_log2 is defined for n >= 1");
    n.next_power_of_two().trailing_zeros()
}

/// The two-part code for one exemplar: which memory, plus the difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExemplarCode {
    pub memory_index: usize,
    pub index_bits: f64,
    pub diff_bits: f64,
}

impl ExemplarCode {
    pub fn total_bits(&self) -> f64 {
        self.index_bits + self.diff_bits
    }
}

/// Codes `exemplar` against its nearest memory under L1 (ties to the lowest
/// index). Difference bits are `L1 distance * ceil_log2(pattern_size)`.
pub fn exemplar_code(bank: &MemoryBank, exemplar: &Pattern) -> ExemplarCode {
    let (memory_index, dist) = crate::hopfield::nearest_l1(bank, exemplar);
    ExemplarCode {
        memory_index,
        index_bits: f64::from(ceil_log2(bank.slot_count())),
        diff_bits: dist * f64::from(ceil_log2(bank.pattern_size())),
    }
}

/// Total bits to describe `exemplars` given the bank.
pub fn d_given_g_length(bank: &MemoryBank, exemplars: &[Exemplar]) -> f64 {
    exemplars
        .iter()
        .map(|e| exemplar_code(bank, &e.pattern).total_bits())
        .sum()
}

/// The full two-part score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdlScore {
    pub g_bits: f64,
    pub d_given_g_bits: f64,
    pub total_bits: f64,
}

impl MdlScore {
    pub fn new(g_bits: f64, d_given_g_bits: f64) -> Self {
        Self {
            g_bits,
            d_given_g_bits,
            total_bits: g_bits + d_given_g_bits,
        }
    }
}

/// Scores `bank` against `exemplars`: bank bits plus data-given-bank bits.
pub fn mdl_score(bank: &MemoryBank, exemplars: &[Exemplar], scheme: &GEncodingScheme) -> MdlScore {
    MdlScore::new(g_length(bank, scheme), d_given_g_length(bank, exemplars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Pattern;

    fn bank_of(patterns: Vec<Pattern>) -> MemoryBank {
        MemoryBank::new(patterns, 16.0).unwrap()
    }

    #[test]
    fn ceil_log2_matches_definition() {
        // Reference: smallest b with 2^b >= n, by direct search.
        for n in 1..=4096usize {
            let mut b = 0u32;
            while (1usize << b) < n {
                b += 1;
            }
            assert_eq!(ceil_log2(n), b, "n={n}");
        }
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(10), 4);
        assert_eq!(ceil_log2(81), 7);
    }

    #[test]
    fn fixed_length_is_flat() {
        let scheme = GEncodingScheme::fixed(1.0).unwrap();
        for v in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(pixel_code_length(v, &scheme).unwrap(), 1.0);
        }
        let scheme = GEncodingScheme::fixed(2.5).unwrap();
        assert_eq!(pixel_code_length(0.7, &scheme).unwrap(), 2.5);
    }

    #[test]
    fn prefer_extreme_endpoints_and_midpoint() {
        let scheme = GEncodingScheme::PreferExtreme;
        assert_eq!(pixel_code_length(0.0, &scheme).unwrap(), 1.0);
        assert_eq!(pixel_code_length(1.0, &scheme).unwrap(), 1.0);
        // (1 + 10 * 0.25)^2 = 3.5^2
        assert_eq!(pixel_code_length(0.5, &scheme).unwrap(), 12.25);
    }

    #[test]
    fn pixel_code_rejects_out_of_range() {
        let scheme = GEncodingScheme::default();
        assert!(pixel_code_length(-0.1, &scheme).is_err());
        assert!(pixel_code_length(1.1, &scheme).is_err());
        assert!(pixel_code_length(f64::NAN, &scheme).is_err());
    }

    #[test]
    fn invalid_fixed_scheme_rejected() {
        assert!(GEncodingScheme::fixed(0.0).is_err());
        assert!(GEncodingScheme::fixed(-1.0).is_err());
    }

    #[test]
    fn g_length_sums_per_pixel_costs() {
        let p = Pattern::new(vec![0.0, 1.0, 0.5]).unwrap();
        let q = Pattern::new(vec![0.5, 0.5, 0.5]).unwrap();
        let bank = bank_of(vec![p, q]);
        assert_eq!(g_length(&bank, &GEncodingScheme::default()), 6.0);
        let extreme = g_length(&bank, &GEncodingScheme::PreferExtreme);
        assert!((extreme - (1.0 + 1.0 + 12.25 + 3.0 * 12.25)).abs() < 1e-12);
    }

    #[test]
    fn exemplar_code_picks_nearest_and_charges_l1() {
        let m0 = Pattern::new(vec![0.0; 4]).unwrap();
        let m1 = Pattern::new(vec![1.0; 4]).unwrap();
        let bank = bank_of(vec![m0, m1]);
        let probe = Pattern::new(vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let code = exemplar_code(&bank, &probe);
        assert_eq!(code.memory_index, 1);
        assert_eq!(code.index_bits, 1.0); // ceil_log2(2)
        assert_eq!(code.diff_bits, 1.0 * 2.0); // L1 = 1, ceil_log2(4) = 2
    }

    #[test]
    fn single_slot_index_is_free() {
        let m = Pattern::new(vec![0.0; 81]).unwrap();
        let bank = bank_of(vec![m]);
        let probe = Pattern::new(vec![1.0; 81]).unwrap();
        let code = exemplar_code(&bank, &probe);
        assert_eq!(code.index_bits, 0.0);
        assert_eq!(code.diff_bits, 81.0 * 7.0);
    }

    #[test]
    fn nearest_ties_break_to_lowest_index() {
        let m0 = Pattern::new(vec![0.0, 0.0]).unwrap();
        let m1 = Pattern::new(vec![1.0, 1.0]).unwrap();
        let bank = bank_of(vec![m0, m1]);
        // Equidistant from both memories.
        let probe = Pattern::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(exemplar_code(&bank, &probe).memory_index, 0);
    }

    #[test]
    fn score_is_sum_of_parts() {
        let golden = crate::patterns::golden_digits(3).unwrap();
        let bank = bank_of(golden.digits().to_vec());
        let dataset = crate::patterns::build_dataset(
            3,
            5,
            crate::patterns::NoiseSpec::new(0.05, crate::patterns::ExemplarType::Discrete, 7)
                .unwrap(),
        )
        .unwrap();
        let scheme = GEncodingScheme::default();
        let score = mdl_score(&bank, dataset.exemplars(), &scheme);
        assert_eq!(score.total_bits, score.g_bits + score.d_given_g_bits);
        assert_eq!(score.g_bits, 3.0 * 81.0);
        assert!(score.d_given_g_bits >= 0.0);
    }

    #[test]
    fn memorization_codes_every_exemplar_for_index_bits_only() {
        let dataset = crate::patterns::build_dataset(
            10,
            5,
            crate::patterns::NoiseSpec::new(0.05, crate::patterns::ExemplarType::Discrete, 19)
                .unwrap(),
        )
        .unwrap();
        let bank = MemoryBank::memorizing(dataset.exemplars(), 16.0).unwrap();
        let score = mdl_score(&bank, dataset.exemplars(), &GEncodingScheme::default());
        assert_eq!(score.g_bits, 50.0 * 81.0);
        assert_eq!(score.d_given_g_bits, 50.0 * 6.0);
    }

    #[test]
    fn junk_memory_strictly_raises_the_total() {
        let dataset = crate::patterns::build_dataset(
            2,
            5,
            crate::patterns::NoiseSpec::new(0.05, crate::patterns::ExemplarType::Discrete, 23)
                .unwrap(),
        )
        .unwrap();
        let golden = crate::patterns::golden_digits(2).unwrap();
        let two = bank_of(golden.digits().to_vec());
        let base = mdl_score(&two, dataset.exemplars(), &GEncodingScheme::default());
        // Three junk slots push the index code from 1 bit to 3 and add bank
        // bits, while never being nearest to anything.
        let mut memories = golden.digits().to_vec();
        for _ in 0..3 {
            memories.push(Pattern::new(vec![0.5; 81]).unwrap());
        }
        let junk = bank_of(memories);
        let bloated = mdl_score(&junk, dataset.exemplars(), &GEncodingScheme::default());
        assert!(bloated.total_bits > base.total_bits);
        assert_eq!(bloated.g_bits, base.g_bits + 3.0 * 81.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn pattern(size: usize) -> impl Strategy<Value = Pattern> {
            proptest::collection::vec(0.0..=1.0f64, size).prop_map(|px| Pattern::new(px).unwrap())
        }

        proptest! {
            /// The chosen index minimizes diff bits over all slots: diff
            /// cost is a fixed positive multiple of L1 distance.
            #[test]
            fn exemplar_code_minimizes_diff_bits(
                memories in proptest::collection::vec(pattern(8), 1..7),
                probe in pattern(8),
            ) {
                let bank = MemoryBank::new(memories.clone(), 16.0).unwrap();
                let code = exemplar_code(&bank, &probe);
                let mult = f64::from(ceil_log2(8));
                for m in &memories {
                    prop_assert!(code.diff_bits <= m.l1(&probe) * mult + 1e-12);
                }
                prop_assert_eq!(code.index_bits, f64::from(ceil_log2(memories.len())));
            }

            /// Total = parts, and everything is finite and non-negative.
            #[test]
            fn scores_decompose_and_stay_finite(
                memories in proptest::collection::vec(pattern(8), 1..5),
                probes in proptest::collection::vec(pattern(8), 1..6),
            ) {
                let bank = MemoryBank::new(memories, 16.0).unwrap();
                let exemplars: Vec<crate::patterns::Exemplar> = probes
                    .into_iter()
                    .map(|pattern| crate::patterns::Exemplar { pattern, source_class: 0 })
                    .collect();
                for scheme in [GEncodingScheme::default(), GEncodingScheme::PreferExtreme] {
                    let score = mdl_score(&bank, &exemplars, &scheme);
                    prop_assert_eq!(score.total_bits, score.g_bits + score.d_given_g_bits);
                    prop_assert!(score.g_bits >= 0.0 && score.g_bits.is_finite());
                    prop_assert!(score.d_given_g_bits >= 0.0 && score.d_given_g_bits.is_finite());
                }
            }
        }
    }
}
