//! Batch command-line front end.
//!
//! Every subcommand is non-interactive and writes exactly one artifact: a
//! report (to `--out`, the config's `[output] path`, or stdout) or, for
//! `gen`, a dataset file. Exit codes: 0 success, 1 runtime failure,
//! 2 configuration failure.

mod config;

pub use config::{synth_from, DataSource, RawConfig, RunConfig};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval;
use crate::io::{self, generate_synthetic, load_dataset, save_dataset, Dataset, Report, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "sgfb", version, about = "Sparse group filter bank EEG classification")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output path; overrides the config's [output] path.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed override ([eval] seed, or [synth] seed for gen).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validate the pipeline with fixed λ and λ1.
    Run,
    /// Write a synthetic dataset (EEGB) to --out.
    Gen,
    /// Summarize a dataset header.
    Inspect {
        /// Dataset file; defaults to the config's [dataset] path.
        path: Option<PathBuf>,
    },
    /// Nested cross-validation over the λ × λ1 grid.
    Gridsearch,
    /// Accuracy as a function of the training-set fraction.
    Fractions,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        1
    }
}

/// Single-line diagnostic: `error kind=<kind> exit=<code>: <message>`.
pub fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!("error kind={} exit={}: {msg}", e.kind(), exit_code(e))
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            eprintln!("error kind=usage exit=2: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}

/// Runs a parsed command on a pool with the requested thread count.
pub fn execute(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen => cmd_gen(cli),
        Command::Inspect { path } => cmd_inspect(cli, path.as_deref()),
        Command::Run | Command::Gridsearch | Command::Fractions => {
            let cfg = load_run_config(cli)?;
            let dataset = load_source(&cfg)?;
            let report = match cli.command {
                Command::Run => run_report(&cfg, &dataset)?,
                Command::Gridsearch => gridsearch_report(&cfg, &dataset)?,
                _ => fractions_report(&cfg, &dataset)?,
            };
            emit(&report, cli.out.as_deref().or(cfg.output.as_deref()))
        }
    }
}

fn load_run_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::MissingKey("--config".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.eval.seed = seed;
    }
    Ok(cfg)
}

/// Loads or generates the dataset and checks the pipeline against it.
pub fn load_source(cfg: &RunConfig) -> Result<Dataset> {
    let dataset = match &cfg.source {
        DataSource::File(p) => load_dataset(p)?,
        DataSource::Synthetic(s) => generate_synthetic(s)?,
    };
    let as_config = |key: &str, e: Error| Error::ConfigValue { key: key.into(), message: e.to_string() };
    cfg.pipeline.validate(dataset.fs_hz).map_err(|e| as_config("filterbank", e))?;
    eval::window_samples(&dataset, cfg.eval.window).map_err(|e| as_config("window", e))?;
    for class in [1, 2] {
        if dataset.class_count(class) < cfg.eval.folds {
            return Err(Error::Folds(format!(
                "class {class} has {} trials, fewer than {} folds",
                dataset.class_count(class),
                cfg.eval.folds
            )));
        }
    }
    Ok(dataset)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => io::write_report(report, p),
        None => {
            let text = report.to_text()?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn dataset_entries(d: &Dataset) -> Vec<(String, String)> {
    vec![
        ("subject".into(), d.subject_id.clone()),
        ("class1".into(), d.class_names[0].clone()),
        ("class2".into(), d.class_names[1].clone()),
        ("channels".into(), d.channels().to_string()),
        ("samples_per_trial".into(), d.samples().to_string()),
        ("trials".into(), d.trials.len().to_string()),
        ("trials_class1".into(), d.class_count(1).to_string()),
        ("trials_class2".into(), d.class_count(2).to_string()),
        ("fs_hz".into(), d.fs_hz.to_string()),
        ("cue_offset_s".into(), d.cue_offset_s.to_string()),
        ("duration_s".into(), d.duration_s().to_string()),
    ]
}

fn header(command: &str, cfg: &RunConfig, d: &Dataset) -> Report {
    let mut r = Report::new();
    r.push_kv("run", [("command", command.to_string()), ("positive_class", d.class_names[0].clone())]);
    r.push_kv("config", cfg.echo());
    r.push_kv("dataset", dataset_entries(d));
    r
}

pub fn run_report(cfg: &RunConfig, d: &Dataset) -> Result<Report> {
    let cv = eval::kfold_cv(d, &cfg.pipeline, &cfg.eval)?;
    let mut r = header("run", cfg, d);
    eval::push_cv(&mut r, &cv);
    if cfg.timings {
        eval::push_timings(&mut r, &cv.timings);
    }
    Ok(r)
}

pub fn gridsearch_report(cfg: &RunConfig, d: &Dataset) -> Result<Report> {
    let g = eval::grid_search(d, &cfg.pipeline, &cfg.eval)?;
    let mut r = header("gridsearch", cfg, d);
    eval::push_grid(&mut r, &g);
    if cfg.timings {
        eval::push_timings(&mut r, &g.outer.timings);
    }
    Ok(r)
}

pub fn fractions_report(cfg: &RunConfig, d: &Dataset) -> Result<Report> {
    let f = eval::fraction_experiment(d, &cfg.pipeline, &cfg.eval)?;
    let mut r = header("fractions", cfg, d);
    eval::push_fractions(&mut r, &f);
    if cfg.timings {
        eval::push_timings(&mut r, &f.timings);
    }
    Ok(r)
}

fn cmd_gen(cli: &Cli) -> Result<()> {
    let mut synth = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            synth_from(&RawConfig::parse(&text)?)?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = cli.seed {
        synth.seed = seed;
    }
    let out = cli.out.as_deref().ok_or_else(|| Error::MissingKey("--out".into()))?;
    save_dataset(&generate_synthetic(&synth)?, out)
}

fn cmd_inspect(cli: &Cli, path: Option<&Path>) -> Result<()> {
    let path = match path {
        Some(p) => p.to_path_buf(),
        None => {
            let cfg_path = cli.config.as_deref().ok_or_else(|| Error::MissingKey("dataset.path".into()))?;
            let text = std::fs::read_to_string(cfg_path).map_err(|e| Error::io(cfg_path, e))?;
            let raw = RawConfig::parse(&text)?;
            let rel = raw.get("dataset.path").ok_or_else(|| Error::MissingKey("dataset.path".into()))?;
            cfg_path.parent().unwrap_or(Path::new(".")).join(rel)
        }
    };
    let d = load_dataset(&path)?;
    let mut r = Report::new();
    r.push_kv("run", [("command", "inspect")]);
    r.push_kv("dataset", dataset_entries(&d));
    emit(&r, cli.out.as_deref())
}
