//! Command-line runner: dataset generation, training, evaluation, the QAOA
//! and brute-force baselines, and the gradient-variance benchmark.
//!
//! Every command takes `--config`, `--seed` and `--out`. Exit codes: 0 on
//! success, 2 for configuration errors, 3 for failures while running.

pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod manifest;
pub mod training;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hqrl_core::hamiltonians::io::Dataset;
use serde_json::Value;

use config::{parse_override, resolve, smoke_profile, ExperimentConfig};
use error::{CliError, Result};
use manifest::RunDir;

#[derive(Debug, Parser)]
#[command(name = "hqrl", version, about = "Hamiltonian-based quantum reinforcement learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train and validation instance sets.
    GenData(CommonArgs),
    /// Train one agent per seed.
    Train(CommonArgs),
    /// Evaluate trained agents and a random policy on validation instances.
    Evaluate(CommonArgs),
    /// Gradient variance of every ansatz kind versus qubit count.
    BenchVariance(CommonArgs),
    /// Optimize QAOA on validation instances.
    Qaoa(CommonArgs),
    /// Exact optima of the training instances.
    BruteForce(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Named preset applied after the config file (`smoke`).
    #[arg(long)]
    pub profile: Option<String>,
    /// Override one key, e.g. `--set qaoa.p=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

impl CommonArgs {
    /// Profile first, then shorthands, then `--set`, so later flags win.
    pub fn overrides(&self) -> Result<Vec<(String, Value)>> {
        let mut ov = match self.profile.as_deref() {
            None => Vec::new(),
            Some("smoke") => smoke_profile(),
            Some(p) => return Err(CliError::config(format!("unknown profile '{p}' (known: smoke)"))),
        };
        let path = |p: &Path| Value::from(p.to_string_lossy().into_owned());
        let short = [
            ("problem", self.problem.clone().map(Value::from)),
            ("seed", self.seed.map(Value::from)),
            ("size", self.size.map(Value::from)),
            ("total_steps", self.steps.map(Value::from)),
            ("seeds", self.seeds.map(Value::from)),
            ("dataset", self.dataset.as_deref().map(path)),
            ("checkpoint", self.checkpoint.as_deref().map(path)),
        ];
        ov.extend(short.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        for s in &self.set {
            ov.push(parse_override(s)?);
        }
        Ok(ov)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        resolve(self.config.as_deref(), &self.overrides()?)
    }
}

fn gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    for (split, stream, count) in [
        ("train", data::TRAIN_STREAM, cfg.count),
        ("validation", data::VALIDATION_STREAM, cfg.validation_count),
    ] {
        let ds = data::generate(cfg, stream, count)?;
        Dataset::write(&out.join(split), &ds.manifest, &ds.instances)?;
    }
    Ok(())
}

pub fn execute(command: &Command) -> Result<()> {
    let (name, args) = match command {
        Command::GenData(a) => ("gen-data", a),
        Command::Train(a) => ("train", a),
        Command::Evaluate(a) => ("evaluate", a),
        Command::BenchVariance(a) => ("bench-variance", a),
        Command::Qaoa(a) => ("qaoa", a),
        Command::BruteForce(a) => ("brute-force", a),
    };
    let cfg = args.resolve()?;
    let out = &args.out;
    let run = RunDir::open(out, name, &cfg)?;
    match command {
        Command::GenData(_) => gen_data(&cfg, out)?,
        Command::Train(_) => {
            for s in training::run(&cfg, out)? {
                let ratio = s.final_ratio.map_or("-".into(), |r| format!("{r:.4}"));
                println!("seed {}: {} steps, final-window ratio {ratio}", s.seed, s.steps);
            }
        }
        Command::Evaluate(_) => {
            for r in evaluation::run(&cfg, out)? {
                let ratio = r.mean_ratio.map_or("-".into(), |x| format!("{x:.4}"));
                println!(
                    "{} ({}): ratio {ratio}, p_optimal {:.3}, p_valid {:.3}, step reward {:.4e}",
                    r.source, r.policy, r.p_optimal, r.p_valid, r.mean_step_reward
                );
            }
        }
        Command::BenchVariance(_) => {
            for f in baselines::bench_variance(&cfg, out)?.1 {
                println!("{:?}: log-variance slope {:.3}", f.kind, f.slope);
            }
        }
        Command::Qaoa(_) => {
            for s in baselines::qaoa(&cfg, out)? {
                println!(
                    "{}: p_optimal {:.3}, p_valid {:.3} over {} instances",
                    s.encoding, s.p_optimal, s.p_valid, s.instances
                );
            }
        }
        Command::BruteForce(_) => {
            baselines::brute(&cfg, out)?;
        }
    }
    run.finish()
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help, --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::config(e.to_string().trim_end().to_string())),
    };
    execute(&cli.command)
}
