//! Tool configuration: a TOML file with one section per library area.
//!
//! Every field has a default, so an empty file (or no file) is a valid
//! configuration. Command-line flags override file values; the conversion
//! methods then run the library constructors, so all component invariants
//! are enforced after parsing.

use std::path::{Path, PathBuf};

use mdlhn_core::{
    experiments::{build_grid, ExperimentParams},
    io,
    search::{MutateParams, OpWeights},
    AnnealSchedule, Condition, DistanceMetric, Error, ExemplarType, GEncodingScheme, NoisePreset,
    NoiseSpec, Regime, Result, SearchConfig,
};
use serde::{Deserialize, Serialize};

/// Dataset shape and noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub classes: usize,
    pub per_digit: usize,
    #[serde(rename = "type")]
    pub exemplar_type: ExemplarType,
    pub noise: NoisePreset,
    /// Gaussian variance; overrides the preset when set.
    pub variance: Option<f64>,
    pub seed: u64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            classes: 10,
            per_digit: 10,
            exemplar_type: ExemplarType::Discrete,
            noise: NoisePreset::Low,
            variance: None,
            seed: 0,
        }
    }
}

/// Memory-bank encoding cost model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingSection {
    pub scheme: SchemeName,
    /// Cost per pixel under the fixed-length scheme.
    pub bits_per_pixel: f64,
}

impl Default for EncodingSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::Fixed,
            bits_per_pixel: 1.0,
        }
    }
}

/// Named encoding scheme, as written in config files and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Fixed,
    Extreme,
}

/// Cooling schedule for the annealer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub steps_per_temperature: usize,
    pub min_temperature: f64,
    pub max_steps: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        let s = AnnealSchedule::default();
        Self {
            initial_temperature: s.initial_temperature,
            cooling_rate: s.cooling_rate,
            steps_per_temperature: s.steps_per_temperature,
            min_temperature: s.min_temperature,
            max_steps: s.max_steps,
        }
    }
}

/// Raw (unnormalized) neighbor-move weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpsSection {
    pub remove: f64,
    pub add: f64,
    pub mutate: f64,
    pub crossover: f64,
}

impl Default for OpsSection {
    fn default() -> Self {
        Self {
            remove: 1.0,
            add: 1.0,
            mutate: 1.0,
            crossover: 1.0,
        }
    }
}

/// Mutation move parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutateSection {
    pub per_index_prob: f64,
    pub sigma: f64,
}

impl Default for MutateSection {
    fn default() -> Self {
        let m = MutateParams::default();
        Self {
            per_index_prob: m.per_index_prob,
            sigma: m.sigma,
        }
    }
}

/// Retrieval dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopfieldSection {
    pub beta: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for HopfieldSection {
    fn default() -> Self {
        let p = ExperimentParams::default();
        Self {
            beta: p.beta,
            max_iterations: p.max_iterations,
            tolerance: p.tolerance,
        }
    }
}

/// Sweep grid: the cross product of class counts and exemplar counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub class_counts: Vec<usize>,
    pub exemplar_counts: Vec<usize>,
    pub regime: Regime,
    /// Drop ambiguous exemplars before training.
    pub followup: bool,
    /// Distance used by the ambiguity filter.
    pub filter_metric: DistanceMetric,
    /// Match golden digits to distinct slots when measuring recovery.
    pub one_to_one: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            class_counts: (1..=10).collect(),
            exemplar_counts: mdlhn_core::experiments::CANONICAL_EXEMPLAR_COUNTS.to_vec(),
            regime: Regime::Mdl,
            followup: false,
            filter_metric: DistanceMetric::L1,
            one_to_one: false,
        }
    }
}

/// Where artifacts go and which seeds a sweep runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub seeds: Vec<u64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            seeds: (0..10).collect(),
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub encoding: EncodingSection,
    pub schedule: ScheduleSection,
    pub ops: OpsSection,
    pub mutate: MutateSection,
    pub hopfield: HopfieldSection,
    pub grid: GridSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses a TOML string; unknown keys are errors.
    pub fn from_toml(src: &str, label: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Parse {
            path: label.to_string(),
            line: e
                .span()
                .map(|s| src[..s.start].lines().count())
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    /// Serializes back to TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Loads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Self::from_toml(&io::read_file(p)?, &p.display().to_string()),
        }
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        match self.data.variance {
            Some(v) => NoiseSpec::new(v, self.data.exemplar_type, self.data.seed),
            None => Ok(NoiseSpec::preset(
                self.data.noise,
                self.data.exemplar_type,
                self.data.seed,
            )),
        }
    }

    pub fn scheme(&self) -> Result<GEncodingScheme> {
        match self.encoding.scheme {
            SchemeName::Fixed => GEncodingScheme::fixed(self.encoding.bits_per_pixel),
            SchemeName::Extreme => Ok(GEncodingScheme::PreferExtreme),
        }
    }

    pub fn schedule(&self) -> Result<AnnealSchedule> {
        let s = &self.schedule;
        AnnealSchedule::new(
            s.initial_temperature,
            s.cooling_rate,
            s.steps_per_temperature,
            s.min_temperature,
            s.max_steps,
        )
    }

    pub fn op_weights(&self) -> Result<OpWeights> {
        let o = &self.ops;
        OpWeights::new(o.remove, o.add, o.mutate, o.crossover)
    }

    pub fn mutate_params(&self) -> Result<MutateParams> {
        MutateParams::new(self.mutate.per_index_prob, self.mutate.sigma)
    }

    pub fn search_config(&self) -> Result<SearchConfig> {
        Ok(SearchConfig {
            schedule: self.schedule()?,
            op_weights: self.op_weights()?,
            mutate: self.mutate_params()?,
            scheme: self.scheme()?,
        })
    }

    pub fn experiment_params(&self) -> Result<ExperimentParams> {
        if !self.hopfield.beta.is_finite() || self.hopfield.beta <= 0.0 {
            return Err(Error::InvalidBeta(self.hopfield.beta));
        }
        Ok(ExperimentParams {
            beta: self.hopfield.beta,
            search: self.search_config()?,
            filter_metric: self.grid.filter_metric,
            one_to_one_matching: self.grid.one_to_one,
            max_iterations: self.hopfield.max_iterations,
            tolerance: self.hopfield.tolerance,
            kmeans_rounds: ExperimentParams::default().kmeans_rounds,
        })
    }

    /// Grid for a sweep; every condition shares the output seed list.
    pub fn conditions(&self) -> Result<Vec<Condition>> {
        let grid = build_grid(
            &self.grid.class_counts,
            &self.grid.exemplar_counts,
            self.data.exemplar_type,
            self.data.noise,
            self.grid.regime,
            &self.output.seeds,
        );
        for c in &grid {
            c.validate()?;
        }
        Ok(grid)
    }
}
