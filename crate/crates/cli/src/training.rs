//! `train`: one resumable run per seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hqrl_core::hamiltonians::io::ProblemKind;
use hqrl_rl::envs::Environment;
use hqrl_rl::train::{
    final_window_ratio, final_window_step_reward, Checkpoint, RunRecord, Trainer,
};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::{read_json, write_csv, write_json};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub step: u64,
    /// Seconds since the run started, summed over resumed sessions.
    pub wall_time: f64,
}

/// Checkpoint plus the metrics logged so far.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + DeserializeOwned")]
pub struct SavedRun<S> {
    pub checkpoint: Checkpoint<S>,
    pub records: Vec<RunRecord>,
    pub timing: Vec<TimingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub steps: u64,
    pub episodes: u64,
    pub final_ratio: Option<f64>,
    pub final_step_reward: Option<f64>,
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

pub fn seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.seeds as u64).map(|i| cfg.seed + i).collect()
}

/// Trains (or finishes training) one seed, checkpointing every
/// `checkpoint_every` steps.
pub fn train_seed<E>(env: E, cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedSummary>
where
    E: Environment + Clone + Sync,
{
    fs::create_dir_all(dir)?;
    let ckpt_path = dir.join(CHECKPOINT_FILE);
    let tc = cfg.train_config();
    let (mut trainer, mut records, mut timing) = if ckpt_path.exists() {
        let saved: SavedRun<E::State> = read_json(&ckpt_path)?;
        if saved.checkpoint.seed != seed {
            return Err(CliError::runtime(format!(
                "{} belongs to seed {}, expected {seed}",
                ckpt_path.display(),
                saved.checkpoint.seed
            )));
        }
        (Trainer::resume(env, tc, saved.checkpoint)?, saved.records, saved.timing)
    } else {
        (Trainer::new(env, tc, seed)?, Vec::new(), Vec::new())
    };

    let offset = timing.last().map_or(0.0, |t| t.wall_time);
    let start = Instant::now();
    while trainer.step_count() < cfg.total_steps {
        let until = (trainer.step_count() + cfg.checkpoint_every).min(cfg.total_steps);
        trainer.run_until(until, &mut |r| {
            records.push(r.clone());
            timing.push(TimingRow {
                step: r.step,
                wall_time: offset + start.elapsed().as_secs_f64(),
            });
            Ok(())
        })?;
        let saved = SavedRun {
            checkpoint: trainer.checkpoint(),
            records: records.clone(),
            timing: timing.clone(),
        };
        write_json(&ckpt_path, &saved)?;
    }
    write_csv(&dir.join("metrics.csv"), &records)?;
    write_csv(&dir.join("timing.csv"), &timing)?;

    let episodes = trainer.episodes();
    Ok(SeedSummary {
        seed,
        steps: trainer.step_count(),
        episodes: episodes.len() as u64,
        final_ratio: final_window_ratio(episodes, cfg.total_steps, cfg.final_window),
        final_step_reward: final_window_step_reward(episodes, cfg.total_steps, cfg.final_window),
    })
}

fn train_all<E>(env: E, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SeedSummary>>
where
    E: Environment + Clone + Sync + Send,
{
    seeds(cfg)
        .into_par_iter()
        .map(|s| train_seed(env.clone(), cfg, s, &seed_dir(out, s)))
        .collect()
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SeedSummary>> {
    let ds = data::training_set(cfg)?;
    let rows = match cfg.problem {
        ProblemKind::Maxcut => train_all(data::maxcut_env(&ds)?, cfg, out)?,
        ProblemKind::Knapsack => train_all(data::knapsack_env(&ds, cfg)?, cfg, out)?,
        ProblemKind::Ucp => train_all(data::ucp_env(&ds, cfg)?, cfg, out)?,
    };
    write_csv(&out.join("summary.csv"), &rows)?;
    Ok(rows)
}
