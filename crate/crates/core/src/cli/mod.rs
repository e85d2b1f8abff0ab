//! Command-line front end.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use report::{emit_report, SWEEP_FILE};

use crate::data::{generate, FourierProjection, GeneratorSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::harness::analysis::{DEFAULT_SWEEP_ALPHAS, DEFAULT_SWEEP_NVS};
use crate::harness::{
    consistency_smoke, run_experiment, sweep, verify_theorem1, write_results, ExperimentConfig,
};
use crate::seed::{rng_for, Purpose};
use crate::wrappers::LearnerKind;

/// Environment variable naming the directory holding the MNIST IDX files.
pub const MNIST_DIR_ENV: &str = "MNIST_DIR";

/// Largest final-error gap tolerated between MT_SIMPLE and SL by `verify`.
pub const CONSISTENCY_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "monotone", version, about = "Monotone learner wrappers and learning-curve experiments")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file or preset name (first-experiment, table1-peaking,
    /// table1-dipping, table1-mnist).
    #[arg(long)]
    pub config: String,
    /// Override a config key, e.g. `--set runs=2 --set plan.val_per_round=8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write rounds.csv, summary.csv and summary.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid over alpha and the validation size with validation rows
    /// kept out of training.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        nvs: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and check MT_HT's monotonicity guarantee and
    /// MT_SIMPLE's final error against SL.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn result files into tables and plot data.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated sample as CSV (features x0.. then label).
    GenData {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// How a successfully executed command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&args.config, &args.overrides)?;
    apply_mnist_env(&mut config.source);
    Ok(config)
}

fn apply_mnist_env(source: &mut SourceSpec) {
    if let SourceSpec::Mnist(p) = source {
        if p.dir.is_none() {
            p.dir = std::env::var_os(MNIST_DIR_ENV).map(PathBuf::from);
        }
    }
}

fn out_dir(out: Option<PathBuf>, config: &ExperimentConfig) -> Result<PathBuf> {
    out.or_else(|| config.out_dir.clone())
        .ok_or_else(|| Error::config("out_dir", "give --out or set out_dir in the config"))
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run { config, out } => {
            let config = load_config(&config)?;
            let dir = out_dir(out, &config)?;
            let results = run_experiment(&config)?;
            write_results(&dir, &results)?;
            for s in &results.stats {
                log::info!(
                    "{:<9} aulc {:.4} ({:.4})  fraction {:.4} ({:.4})",
                    s.learner.id(),
                    s.aulc_mean,
                    s.aulc_std,
                    s.fraction_mean,
                    s.fraction_std
                );
            }
            Ok(Outcome::Success)
        }
        Command::Sweep {
            config,
            alphas,
            nvs,
            out,
        } => {
            let config = load_config(&config)?;
            let dir = out_dir(out, &config)?;
            let alphas = alphas.unwrap_or_else(|| DEFAULT_SWEEP_ALPHAS.to_vec());
            let nvs = nvs.unwrap_or_else(|| DEFAULT_SWEEP_NVS.to_vec());
            let results = sweep(&config, &alphas, &nvs)?;
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join(SWEEP_FILE), serde_json::to_vec_pretty(&results)?)?;
            Ok(Outcome::Success)
        }
        Command::Verify { config, out } => {
            let config = load_config(&config)?;
            let dir = out_dir(out, &config)?;
            let results = run_experiment(&config)?;
            write_results(&dir, &results)?;
            let mut passed = true;
            let mut lines = Vec::new();
            let monotonicity = if config.has(LearnerKind::MtHt) {
                let t = verify_theorem1(&results)?;
                lines.push(format!(
                    "MT_HT monotone runs: {}/{} observed {:.4}, bound (1-alpha)^n = {:.3e}{} [{}]",
                    t.monotone_runs,
                    t.runs,
                    t.observed_monotone_fraction,
                    t.bound,
                    if t.vacuous { " (check is vacuous)" } else { "" },
                    if t.run_check_passed { "pass" } else { "FAIL" }
                ));
                lines.push(format!(
                    "MT_HT non-monotone decisions: {}/{} = {:.4} vs alpha {} [{}]",
                    t.nonmonotone_decisions,
                    t.decisions,
                    t.decision_rate,
                    t.alpha,
                    if t.decision_check_passed { "pass" } else { "FAIL" }
                ));
                passed &= t.passed;
                Some(t)
            } else {
                None
            };
            let consistency = consistency_smoke(&results);
            for e in &consistency.entries {
                let gap = e.gap_to_standard.map_or(String::new(), |g| format!(", gap to SL {g:+.4}"));
                lines.push(format!(
                    "{}: final error {:.4}, frozen before round {} in {}/{} runs{}",
                    e.learner.id(),
                    e.final_error_mean,
                    consistency.rounds / 2,
                    e.frozen_runs,
                    e.last_update_rounds.len(),
                    gap
                ));
            }
            if let Some(gap) = consistency.entry(LearnerKind::MtSimple).and_then(|e| e.gap_to_standard) {
                let ok = gap.abs() <= CONSISTENCY_TOLERANCE;
                lines.push(format!(
                    "MT_SIMPLE final error within {CONSISTENCY_TOLERANCE} of SL [{}]",
                    if ok { "pass" } else { "FAIL" }
                ));
                passed &= ok;
            }
            let report = serde_json::json!({
                "passed": passed,
                "monotonicity": monotonicity,
                "consistency": consistency,
            });
            std::fs::write(dir.join("verify.json"), serde_json::to_vec_pretty(&report)?)?;
            let mut stdout = std::io::stdout().lock();
            for l in lines {
                writeln!(stdout, "{l}")?;
            }
            Ok(if passed { Outcome::Success } else { Outcome::ChecksFailed })
        }
        Command::Report { input, out } => {
            emit_report(&input, &out)?;
            Ok(Outcome::Success)
        }
        Command::GenData { spec, count, out } => {
            gen_data(&spec, count, &out)?;
            Ok(Outcome::Success)
        }
    }
}

fn gen_data(spec_path: &Path, count: usize, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_path)?;
    let mut spec: GeneratorSpec =
        toml::from_str(&text).map_err(|e| Error::config(spec_path.display().to_string(), e.message().to_string()))?;
    apply_mnist_env(&mut spec.source);
    spec.source.validate()?;
    let data = match spec.source.synthetic() {
        Some(source) => generate(&source, count, spec.seed)?,
        None => {
            let SourceSpec::Mnist(params) = &spec.source else { unreachable!() };
            let paths = params.paths()?;
            let pool = crate::data::load_mnist(&paths.train_images, &paths.train_labels)?;
            if count == 0 || count > pool.len() {
                return Err(Error::InsufficientRows {
                    needed: count,
                    available: pool.len(),
                });
            }
            let mut rng = rng_for(spec.seed, Purpose::Batches);
            let rows = rand::seq::index::sample(&mut rng, pool.len(), count).into_vec();
            let mut rng = rng_for(spec.seed, Purpose::Projection);
            FourierProjection::draw(pool.n_features(), params.features, params.bandwidth, &mut rng)?
                .apply(&pool.select(&rows))?
        }
    };
    let mut w = csv::Writer::from_path(out)?;
    let mut header: Vec<String> = (0..data.n_features()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.labels()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
