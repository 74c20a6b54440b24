//! Command-line front end: dataset generation (`gen`), bank scoring
//! (`score`), single annealing runs (`train`), and condition-grid sweeps
//! with plots (`sweep`).
//!
//! Exit codes: 0 success, 1 usage or input-parse error, 2 runtime failure.
//! Every command is deterministic given its configuration and seed.

mod config;
mod plot;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mdlhn_core::{
    build_dataset,
    experiments::{run_mdl_on, sweep, SweepRow},
    filter_ambiguous, io, mdl_score, ExemplarType, NoisePreset, Regime,
};

use config::{RunConfig, SchemeName};

#[derive(Parser, Debug)]
#[command(
    name = "mdlhn",
    version,
    about = "Minimum-description-length training for modern Hopfield memory banks"
)]
struct Cli {
    /// RNG seed; overrides the config seed and, for sweeps, the seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// TOML configuration file (flags override file values).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory artifacts are written to.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Memory-bank encoding cost model.
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeName>,

    /// Noise preset for generated exemplars.
    #[arg(long, global = true, value_enum)]
    noise: Option<NoiseArg>,

    /// Exemplar kind.
    #[arg(long = "type", global = true, value_enum)]
    exemplar_type: Option<TypeArg>,

    /// Capacity regime for sweep rows.
    #[arg(long, global = true, value_enum)]
    regime: Option<RegimeArg>,

    /// Drop ambiguous exemplars before training.
    #[arg(long, global = true)]
    followup: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a noisy-digit dataset and a golden-font snapshot.
    Gen {
        /// Number of digit classes (1-10).
        #[arg(long)]
        classes: Option<usize>,
        /// Exemplars generated per class.
        #[arg(long)]
        per_digit: Option<usize>,
    },
    /// Score a stored memory bank against a dataset file.
    Score {
        /// Memory-bank CSV.
        bank: PathBuf,
        /// Dataset CSV.
        dataset: PathBuf,
        /// Label for the report line (defaults to the bank file stem).
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Anneal a memory bank on a generated dataset; write bank, trace, and
    /// metrics files.
    Train {
        /// Number of digit classes (1-10).
        #[arg(long)]
        classes: Option<usize>,
        /// Exemplars generated per class.
        #[arg(long)]
        per_digit: Option<usize>,
    },
    /// Run every grid condition and write a results table plus plots.
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Low,
    Medium,
}

impl From<NoiseArg> for NoisePreset {
    fn from(a: NoiseArg) -> Self {
        match a {
            NoiseArg::Low => NoisePreset::Low,
            NoiseArg::Medium => NoisePreset::Medium,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TypeArg {
    Discrete,
    Continuous,
}

impl From<TypeArg> for ExemplarType {
    fn from(a: TypeArg) -> Self {
        match a {
            TypeArg::Discrete => ExemplarType::Discrete,
            TypeArg::Continuous => ExemplarType::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Unconstrained,
    Golden,
    Mdl,
}

impl From<RegimeArg> for Regime {
    fn from(a: RegimeArg) -> Self {
        match a {
            RegimeArg::Unconstrained => Regime::Unconstrained,
            RegimeArg::Golden => Regime::GoldenCapacity,
            RegimeArg::Mdl => Regime::Mdl,
        }
    }
}

/// Failures split by exit code: bad input (1) versus failed execution (2).
enum CliError {
    Usage(String),
    Runtime(String),
}

type CliResult<T> = Result<T, CliError>;

/// Maps input-side library errors (config, parameters, input files) to
/// usage failures.
fn usage<T>(r: mdlhn_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

/// Maps execution-side library errors (writes, runs) to runtime failures.
fn runtime<T>(r: mdlhn_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Runtime(e.to_string()))
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let mut cfg = usage(RunConfig::load(cli.config.as_deref()))?;
    apply_overrides(&mut cfg, cli);
    match &cli.command {
        Command::Gen { classes, per_digit } => cmd_gen(&cfg, *classes, *per_digit),
        Command::Score {
            bank,
            dataset,
            run_id,
        } => cmd_score(&cfg, bank, dataset, run_id.as_deref()),
        Command::Train { classes, per_digit } => cmd_train(&cfg, *classes, *per_digit),
        Command::Sweep => cmd_sweep(&cfg),
    }
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.data.seed = seed;
        cfg.output.seeds = vec![seed];
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output.dir = dir.clone();
    }
    if let Some(scheme) = cli.scheme {
        cfg.encoding.scheme = scheme;
    }
    if let Some(noise) = cli.noise {
        cfg.data.noise = noise.into();
        // An explicit preset flag beats a variance override from the file.
        cfg.data.variance = None;
    }
    if let Some(t) = cli.exemplar_type {
        cfg.data.exemplar_type = t.into();
    }
    if let Some(r) = cli.regime {
        cfg.grid.regime = r.into();
    }
    if cli.followup {
        cfg.grid.followup = true;
    }
}

/// Creates the artifact directory and snapshots the effective configuration
/// (file values plus flag overrides) into it, so any run can be replayed.
fn prepare_out_dir<'a>(cfg: &RunConfig, dir: &'a Path) -> CliResult<&'a Path> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    runtime(io::write_file(&dir.join("config.toml"), &cfg.to_toml()))?;
    Ok(dir)
}

fn cmd_gen(cfg: &RunConfig, classes: Option<usize>, per_digit: Option<usize>) -> CliResult<()> {
    let classes = classes.unwrap_or(cfg.data.classes);
    let per_digit = per_digit.unwrap_or(cfg.data.per_digit);
    let spec = usage(cfg.noise_spec())?;
    let dataset = usage(build_dataset(classes, per_digit, spec))?;

    let dir = prepare_out_dir(cfg, &cfg.output.dir)?;
    let dataset_path = dir.join("dataset.csv");
    runtime(io::write_dataset(&dataset_path, dataset.exemplars()))?;
    let font_path = dir.join("golden.txt");
    runtime(io::write_font(&font_path, dataset.golden().digits()))?;

    println!(
        "wrote {} ({} exemplars)",
        dataset_path.display(),
        dataset.len()
    );
    println!(
        "wrote {} ({} golden digits)",
        font_path.display(),
        dataset.golden().class_count()
    );
    Ok(())
}

fn cmd_score(
    cfg: &RunConfig,
    bank_path: &Path,
    dataset_path: &Path,
    run_id: Option<&str>,
) -> CliResult<()> {
    let bank = usage(io::read_bank(bank_path))?;
    let exemplars = usage(io::read_dataset(dataset_path))?;
    for e in &exemplars {
        if e.pattern.size() != bank.pattern_size() {
            return Err(CliError::Usage(format!(
                "bank memories have {} pixels but a dataset exemplar has {}",
                bank.pattern_size(),
                e.pattern.size()
            )));
        }
    }
    let scheme = usage(cfg.scheme())?;
    let score = mdl_score(&bank, &exemplars, &scheme);
    let fallback = bank_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bank".to_string());
    let run_id = run_id.unwrap_or(&fallback);
    println!("{}", io::SCORE_HEADER);
    println!(
        "{}",
        io::format_score_line(run_id, bank.slot_count(), &score)
    );
    Ok(())
}

fn cmd_train(cfg: &RunConfig, classes: Option<usize>, per_digit: Option<usize>) -> CliResult<()> {
    let classes = classes.unwrap_or(cfg.data.classes);
    let per_digit = per_digit.unwrap_or(cfg.data.per_digit);
    let spec = usage(cfg.noise_spec())?;
    let params = usage(cfg.experiment_params())?;
    let dataset = usage(build_dataset(classes, per_digit, spec))?;
    let dataset = if cfg.grid.followup {
        filter_ambiguous(&dataset, cfg.grid.filter_metric)
    } else {
        dataset
    };

    let (outcome, metrics) = runtime(run_mdl_on(
        &dataset,
        dataset.exemplars(),
        &params,
        cfg.data.seed,
    ))?;

    let dir = prepare_out_dir(cfg, &cfg.output.dir)?;
    runtime(io::write_bank(&dir.join("bank.csv"), outcome.best()))?;
    runtime(io::write_trace(&dir.join("trace.csv"), &outcome.trace))?;
    let json = serde_json::to_string_pretty(&metrics)
        .map_err(|e| CliError::Runtime(format!("cannot serialize metrics: {e}")))?;
    runtime(io::write_file(&dir.join("metrics.json"), &json))?;

    println!("{}", io::SCORE_HEADER);
    println!(
        "{}",
        io::format_score_line("train", metrics.final_slot_count, &outcome.best_score())
    );
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    let params = usage(cfg.experiment_params())?;
    let grid = usage(cfg.conditions())?;
    let outcome = runtime(sweep(&grid, &params, cfg.grid.followup))?;

    let dir = prepare_out_dir(cfg, &cfg.output.dir)?;
    let results_path = dir.join("results.csv");
    runtime(io::write_results(&results_path, &outcome.rows))?;

    // Filtering only applies to description-length training runs.
    let filtered = cfg.grid.followup && cfg.grid.regime == Regime::Mdl;
    let title = format!(
        "{} {} {}{}: mean slots vs golden digits",
        cfg.data.exemplar_type,
        cfg.data.noise,
        cfg.grid.regime,
        if filtered { " filtered" } else { "" }
    );
    let rows: Vec<&SweepRow> = outcome.rows.iter().collect();
    let svg = plot::render_slot_plot(&rows, &title);
    let plot_path = dir.join(format!(
        "slots_{}_{}_{}{}.svg",
        cfg.data.exemplar_type,
        cfg.data.noise,
        cfg.grid.regime,
        if filtered { "_filtered" } else { "" }
    ));
    runtime(io::write_file(&plot_path, &svg))?;

    println!("wrote {}", results_path.display());
    println!("wrote {}", plot_path.display());
    let failures: usize = outcome.rows.iter().map(|r| r.failures.len()).sum();
    if failures > 0 {
        eprintln!("{failures} run(s) failed; see results table");
    }
    if !outcome.any_succeeded() {
        return Err(CliError::Runtime("every sweep run failed".into()));
    }
    Ok(())
}
