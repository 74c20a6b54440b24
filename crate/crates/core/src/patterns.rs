//! Pixel patterns, the bundled golden-digit font, and the Gaussian noise
//! models that turn golden digits into training exemplars.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the canonical digit bitmaps.
pub const DIGIT_SIDE: usize = 9;
/// Pixel count of the canonical digit bitmaps (9x9).
pub const DIGIT_PIXELS: usize = DIGIT_SIDE * DIGIT_SIDE;

/// The canonical 9x9 digit font, one block per digit 0-9.
/// All golden-digit results are defined against this file.
const FONT_SRC: &str = include_str!("../data/golden_digits.txt");

/// A fixed-length sequence of pixel values in `[0, 1]`.
///
/// The unit of both stored memories and training exemplars. Length is fixed
/// at construction and every pixel is validated against the `[0, 1]` bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pixels: Vec<f64>,
}

impl Pattern {
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::SizeMismatch {
                expected: 1,
                actual: 0,
            });
        }
        for &v in &pixels {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::PixelOutOfRange(v));
            }
        }
        Ok(Self { pixels })
    }

    /// Builds a bitmap pattern from 0/1 bits.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| f64::from(b.min(1))).collect())
    }

    pub fn size(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// True when every pixel is exactly 0 or 1.
    pub fn is_bitmap(&self) -> bool {
        self.pixels.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn l1(&self, other: &Pattern) -> f64 {
        assert_eq!(self.size(), other.size(), "pattern size mismatch");
        self.pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn l2(&self, other: &Pattern) -> f64 {
        assert_eq!(self.size(), other.size(), "pattern size mismatch");
        self.pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Distance used for nearest-neighbor lookups and ambiguity filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    L1,
    L2,
}

impl DistanceMetric {
    pub fn eval(&self, a: &Pattern, b: &Pattern) -> f64 {
        match self {
            DistanceMetric::L1 => a.l1(b),
            DistanceMetric::L2 => a.l2(b),
        }
    }
}

/// The ground-truth prototype bitmaps exemplars are generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenSet {
    digits: Vec<Pattern>,
}

impl GoldenSet {
    /// Validates that all members are bitmaps of equal size and pairwise distinct.
    pub fn new(digits: Vec<Pattern>) -> Result<Self> {
        if digits.is_empty() || digits.len() > 10 {
            return Err(Error::ClassCountOutOfRange(digits.len()));
        }
        let size = digits[0].size();
        for d in &digits {
            if d.size() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    actual: d.size(),
                });
            }
            if !d.is_bitmap() {
                return Err(Error::PixelOutOfRange(
                    *d.pixels()
                        .iter()
                        .find(|&&v| v != 0.0 && v != 1.0)
                        .unwrap_or(&f64::NAN),
                ));
            }
        }
        for i in 0..digits.len() {
            for j in (i + 1)..digits.len() {
                if digits[i] == digits[j] {
                    return Err(Error::InvalidScheme(format!(
                        "golden digits {i} and {j} are identical"
                    )));
                }
            }
        }
        Ok(Self { digits })
    }

    pub fn class_count(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[Pattern] {
        &self.digits
    }

    /// Index of the nearest golden digit to `p`; ties go to the lowest index.
    pub fn nearest(&self, p: &Pattern, metric: DistanceMetric) -> (usize, f64) {
        let mut best = (0, metric.eval(&self.digits[0], p));
        for (i, d) in self.digits.iter().enumerate().skip(1) {
            let dist = metric.eval(d, p);
            if dist < best.1 {
                best = (i, dist);
            }
        }
        best
    }
}

/// Returns the first `class_count` canonical 9x9 digit bitmaps from the
/// bundled font. Deterministic; the font ships with the crate.
pub fn golden_digits(class_count: usize) -> Result<GoldenSet> {
    if !(1..=10).contains(&class_count) {
        return Err(Error::ClassCountOutOfRange(class_count));
    }
    let all = crate::io::parse_font_str(FONT_SRC, "<bundled>")?;
    GoldenSet::new(all.into_iter().take(class_count).collect())
}

/// Whether exemplars keep their continuous pixel values or are rounded to bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExemplarType {
    Discrete,
    Continuous,
}

/// Named noise presets. The paper-scale experiments use `low` and `medium`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePreset {
    Low,
    Medium,
}

impl NoisePreset {
    /// Gaussian variance for the preset. Low flips roughly 1.3% of bitmap
    /// pixels after rounding; medium flips roughly 16%.
    pub fn variance(&self) -> f64 {
        match self {
            NoisePreset::Low => 0.05,
            NoisePreset::Medium => 0.25,
        }
    }
}

impl std::fmt::Display for NoisePreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoisePreset::Low => write!(f, "low"),
            NoisePreset::Medium => write!(f, "medium"),
        }
    }
}

impl std::fmt::Display for ExemplarType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExemplarType::Discrete => write!(f, "discrete"),
            ExemplarType::Continuous => write!(f, "continuous"),
        }
    }
}

/// Noise model for exemplar generation: i.i.d. Gaussian per pixel, clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
    pub exemplar_type: ExemplarType,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, exemplar_type: ExemplarType, seed: u64) -> Result<Self> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidVariance(variance));
        }
        Ok(Self {
            variance,
            exemplar_type,
            seed,
        })
    }

    pub fn preset(preset: NoisePreset, exemplar_type: ExemplarType, seed: u64) -> Self {
        Self {
            variance: preset.variance(),
            exemplar_type,
            seed,
        }
    }
}

/// A noisy training instance together with the golden digit it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub pattern: Pattern,
    pub source_class: usize,
}

/// The training corpus: exemplars plus the golden set and noise metadata
/// they were generated from.
#[derive(Debug, Clone)]
pub struct Dataset {
    exemplars: Vec<Exemplar>,
    golden: GoldenSet,
    spec: NoiseSpec,
    exemplars_per_digit: usize,
}

impl Dataset {
    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    pub fn golden(&self) -> &GoldenSet {
        &self.golden
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn exemplars_per_digit(&self) -> usize {
        self.exemplars_per_digit
    }

    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }

    /// Rebuilds a dataset from parts; used by the file loaders.
    pub fn from_parts(
        exemplars: Vec<Exemplar>,
        golden: GoldenSet,
        spec: NoiseSpec,
        exemplars_per_digit: usize,
    ) -> Result<Self> {
        for e in &exemplars {
            if e.source_class >= golden.class_count() {
                return Err(Error::ClassCountOutOfRange(e.source_class));
            }
        }
        Ok(Self {
            exemplars,
            golden,
            spec,
            exemplars_per_digit,
        })
    }
}

/// Adds clamped Gaussian noise to every pixel of `golden`:
/// `clamp(g + N(0, variance), 0, 1)`.
pub fn make_continuous_exemplar<R: Rng>(
    golden: &Pattern,
    source_class: usize,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Exemplar {
    debug_assert_eq!(spec.exemplar_type, ExemplarType::Continuous);
    Exemplar {
        pattern: noisy_pattern(golden, spec.variance, rng),
        source_class,
    }
}

/// Continuous exemplar rounded half-up to 0/1 per pixel.
pub fn make_discrete_exemplar<R: Rng>(
    golden: &Pattern,
    source_class: usize,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Exemplar {
    debug_assert_eq!(spec.exemplar_type, ExemplarType::Discrete);
    let continuous = noisy_pattern(golden, spec.variance, rng);
    let pixels = continuous
        .pixels()
        .iter()
        .map(|&v| if v >= 0.5 { 1.0 } else { 0.0 })
        .collect();
    Exemplar {
        pattern: Pattern::new(pixels).expect("rounded pixels are bits"),
        source_class,
    }
}

fn noisy_pattern<R: Rng>(golden: &Pattern, variance: f64, rng: &mut R) -> Pattern {
    let normal = Normal::new(0.0, variance.sqrt()).expect("validated variance");
    let pixels = golden
        .pixels()
        .iter()
        .map(|&v| (v + normal.sample(rng)).clamp(0.0, 1.0))
        .collect();
    Pattern::new(pixels).expect("clamped pixels are in range")
}

/// Builds the training corpus: `exemplars_per_digit` noisy exemplars of each
/// of the first `class_count` golden digits, in class-major order.
///
/// A pure function of `(class_count, exemplars_per_digit, spec.seed)`.
pub fn build_dataset(
    class_count: usize,
    exemplars_per_digit: usize,
    spec: NoiseSpec,
) -> Result<Dataset> {
    if exemplars_per_digit == 0 {
        return Err(Error::EmptyExemplarCount);
    }
    let golden = golden_digits(class_count)?;
    let mut rng = crate::rng_stream(spec.seed, crate::stream::DATASET);
    let mut exemplars = Vec::with_capacity(class_count * exemplars_per_digit);
    for (class, digit) in golden.digits().iter().enumerate() {
        for _ in 0..exemplars_per_digit {
            let e = match spec.exemplar_type {
                ExemplarType::Continuous => make_continuous_exemplar(digit, class, &spec, &mut rng),
                ExemplarType::Discrete => make_discrete_exemplar(digit, class, &spec, &mut rng),
            };
            exemplars.push(e);
        }
    }
    Ok(Dataset {
        exemplars,
        golden,
        spec,
        exemplars_per_digit,
    })
}

/// Drops exemplars whose nearest golden digit under `metric` is not their
/// source digit. Ties count as ambiguous and are removed.
pub fn filter_ambiguous(dataset: &Dataset, metric: DistanceMetric) -> Dataset {
    let golden = dataset.golden();
    let exemplars = dataset
        .exemplars()
        .iter()
        .filter(|e| {
            let d_source = metric.eval(&e.pattern, &golden.digits()[e.source_class]);
            golden
                .digits()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != e.source_class)
                .all(|(_, g)| d_source < metric.eval(&e.pattern, g))
        })
        .cloned()
        .collect();
    Dataset {
        exemplars,
        golden: dataset.golden.clone(),
        spec: dataset.spec,
        exemplars_per_digit: dataset.exemplars_per_digit,
    }
}
