//! `evaluate`: trained agents and a random policy on held-out instances.

use std::path::{Path, PathBuf};

use hqrl_core::hamiltonians::io::ProblemKind;
use hqrl_rl::envs::{Environment, Observation};
use hqrl_rl::train::{evaluate, probe_hamiltonian, Actor, AgentState, EvalSummary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::{read_json, write_csv};
use crate::training::CHECKPOINT_FILE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub source: String,
    pub policy: String,
    pub episodes: u64,
    pub mean_return: f64,
    pub mean_step_reward: f64,
    pub mean_ratio: Option<f64>,
    pub p_optimal: f64,
    pub p_valid: f64,
}

impl EvalRow {
    fn new(source: &str, policy: &str, s: EvalSummary) -> Self {
        Self {
            source: source.to_string(),
            policy: policy.to_string(),
            episodes: s.episodes,
            mean_return: s.mean_return,
            mean_step_reward: s.mean_step_reward,
            mean_ratio: s.mean_ratio,
            p_optimal: s.p_optimal,
            p_valid: s.p_valid,
        }
    }
}

/// Checkpoint files named by `path`: a checkpoint file, a seed directory or
/// a train output directory.
fn checkpoint_files(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    if path.is_file() {
        let label = path
            .parent()
            .and_then(|p| p.file_name())
            .map_or("checkpoint".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![(label, path.to_path_buf())]);
    }
    if path.join(CHECKPOINT_FILE).is_file() {
        return checkpoint_files(&path.join(CHECKPOINT_FILE));
    }
    let mut found = Vec::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path)? {
            let p = entry?.path().join(CHECKPOINT_FILE);
            if p.is_file() {
                found.extend(checkpoint_files(&p)?);
            }
        }
    }
    if found.is_empty() {
        return Err(CliError::config(format!("no checkpoint found at {}", path.display())));
    }
    found.sort();
    Ok(found)
}

/// The agent inside a saved run or a bare trainer checkpoint.
pub fn load_agent(path: &Path) -> Result<AgentState> {
    let v: Value = read_json(path)?;
    let agent = v
        .get("checkpoint")
        .and_then(|c| c.get("agent"))
        .or_else(|| v.get("agent"))
        .ok_or_else(|| CliError::runtime(format!("{} holds no agent", path.display())))?;
    serde_json::from_value(agent.clone())
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

/// Refuses agents whose parameter shapes do not fit the environment.
fn check_dimensions<E: Environment + Clone>(agent: &AgentState, env: &E) -> Result<()> {
    let ham = probe_hamiltonian(env)?;
    let (model, scaling) = match agent {
        AgentState::Qdqn { agent, .. } => (agent.config.model, None),
        AgentState::Qpg { agent, .. } => (
            agent.config.model,
            Some((agent.scaling.len(), agent.config.scaling.len(env.num_actions()))),
        ),
    };
    let expected = model.param_count(&ham);
    if agent.params().len() != expected {
        return Err(CliError::runtime(format!(
            "agent has {} circuit parameters but this dataset needs {expected}",
            agent.params().len()
        )));
    }
    if let Some((got, want)) = scaling {
        if got != want {
            return Err(CliError::runtime(format!(
                "agent has {got} output scales but this dataset needs {want}"
            )));
        }
    }
    Ok(())
}

/// Greedy/sampled rows for every agent, then one random-policy row.
pub fn evaluate_env<E, F>(
    env: &mut E,
    agents: &[(String, AgentState)],
    starts: usize,
    cfg: &ExperimentConfig,
    mut reset: F,
) -> Result<Vec<EvalRow>>
where
    E: Environment + Clone,
    F: FnMut(&mut E, usize, &mut ChaCha8Rng) -> hqrl_rl::Result<Observation>,
{
    let mut rows = Vec::new();
    for (label, agent) in agents {
        check_dimensions(agent, env)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (actor, policy, episodes) = match agent {
            AgentState::Qdqn { agent, .. } => (Actor::Greedy(agent), "greedy", 1),
            AgentState::Qpg { agent, .. } => (
                Actor::Sample(agent, agent.config.temperature.final_value()),
                "sample",
                cfg.episodes_per_instance,
            ),
        };
        // a greedy policy is deterministic on fixed starts; contexts are not
        let episodes = if starts == 1 { cfg.episodes_per_instance } else { episodes };
        let s = evaluate(env, actor, starts, episodes, &mut reset, &mut rng)?;
        rows.push(EvalRow::new(label, policy, s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = evaluate(env, Actor::Random, starts, cfg.episodes_per_instance, &mut reset, &mut rng)?;
    rows.push(EvalRow::new("random", "random", s));
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<EvalRow>> {
    let path = cfg
        .checkpoint
        .as_deref()
        .ok_or_else(|| CliError::config("evaluate needs --checkpoint"))?;
    let agents = checkpoint_files(path)?
        .into_iter()
        .map(|(label, p)| Ok((label, load_agent(&p)?)))
        .collect::<Result<Vec<_>>>()?;
    let ds = data::validation_set(cfg)?;
    let n = ds.instances.len();
    let rows = match cfg.problem {
        ProblemKind::Maxcut => {
            let mut env = data::maxcut_env(&ds)?;
            evaluate_env(&mut env, &agents, n, cfg, |e, i, _| e.reset_to(i))?
        }
        ProblemKind::Knapsack => {
            let mut env = data::knapsack_env(&ds, cfg)?;
            evaluate_env(&mut env, &agents, n, cfg, |e, i, _| e.reset_to(i))?
        }
        ProblemKind::Ucp => {
            let mut env = data::ucp_env(&ds, cfg)?.tracking_optimum(true);
            evaluate_env(&mut env, &agents, 1, cfg, |e, _, rng| e.reset(rng))?
        }
    };
    write_csv(&out.join("eval.csv"), &rows)?;
    Ok(rows)
}
