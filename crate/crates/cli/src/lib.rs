//! Command-line front end for `confrule`.
//!
//! Every command reads a TOML run configuration (see [`config`]) and writes its artifacts
//! under the configured output directory.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use confrule::eval::Approach;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "confrule", version, about = "Confidence-gated rule induction")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Replaces the split, learner and iteration seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replaces the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, build the vocabulary and cache the vectorized dataset.
    Prep,
    /// Learn a rule set.
    Train {
        #[arg(long, conflicts_with = "iterative", required_unless_present = "iterative")]
        baseline: bool,
        #[arg(long)]
        iterative: bool,
    },
    /// Threshold sweep of rule files on the test split (default: every trained rule set).
    Eval { rules: Vec<PathBuf> },
    /// Train both approaches, then evaluate them.
    Compare,
    /// Print rules whose confidence exceeds `--min-voc`.
    Rules {
        rules: PathBuf,
        #[arg(long, default_value_t = f64::NEG_INFINITY, allow_negative_numbers = true)]
        min_voc: f64,
    },
    /// Generate a synthetic corpus from a TOML spec.
    Synth { spec: PathBuf },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::config("--config is required for this command"))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_overrides(cli.seed, cli.out.as_deref());
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth { spec } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            commands::synth(spec, &out)
        }
        Command::Rules { rules, min_voc } => {
            print!("{}", commands::list_rules(&commands::read_rules(rules)?, *min_voc));
            Ok(())
        }
        Command::Prep => {
            let cfg = load_config(&cli)?;
            let (_, summary) = commands::prep(&cfg)?;
            commands::print_prep(&summary);
            Ok(())
        }
        Command::Train { baseline, .. } => {
            let cfg = load_config(&cli)?;
            let (data, _) = commands::prep(&cfg)?;
            let sp = commands::split_dataset(&cfg, &data)?;
            let approach = if *baseline { Approach::Baseline } else { Approach::Iterative };
            commands::print_train(&commands::train(&cfg, &data, &sp, approach)?);
            Ok(())
        }
        Command::Eval { rules } => {
            let cfg = load_config(&cli)?;
            let (data, _) = commands::prep(&cfg)?;
            let sp = commands::split_dataset(&cfg, &data)?;
            let files = if rules.is_empty() { commands::default_rule_files(&cfg) } else { rules.clone() };
            print!("{}", commands::eval(&cfg, &data, &sp, &files)?);
            Ok(())
        }
        Command::Compare => {
            let cfg = load_config(&cli)?;
            let (data, summary) = commands::prep(&cfg)?;
            commands::print_prep(&summary);
            let sp = commands::split_dataset(&cfg, &data)?;
            for approach in [Approach::Baseline, Approach::Iterative] {
                commands::print_train(&commands::train(&cfg, &data, &sp, approach)?);
            }
            print!("{}", commands::eval(&cfg, &data, &sp, &commands::default_rule_files(&cfg))?);
            Ok(())
        }
    }
}
