//! The training loop, its checkpoints and greedy/random evaluation.

use std::sync::Arc;

use hqrl_core::hamiltonians::IsingHamiltonian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::agents::{
    Model, QdqnAgent, QdqnConfig, QpgAgent, QpgConfig, ReplayBuffer, Trajectory,
    TrajectoryStep, Transition,
};
use crate::envs::{Action, Environment, EpisodeOutcome, Observation};
use crate::error::{Error, Result};

/// Consecutive zero-length episodes tolerated before giving up.
const MAX_EMPTY_RESETS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AgentConfig {
    Qdqn(QdqnConfig),
    Qpg(QpgConfig),
}

impl AgentConfig {
    pub fn model(&self) -> Model {
        match self {
            AgentConfig::Qdqn(c) => c.model,
            AgentConfig::Qpg(c) => c.model,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            AgentConfig::Qdqn(c) => c.validate(),
            AgentConfig::Qpg(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub agent: AgentConfig,
    pub total_steps: u64,
    pub log_every: u64,
    /// Treat every step as its own one-step episode for the policy
    /// gradient (contextual bandits).
    pub bandit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AgentState {
    Qdqn {
        agent: QdqnAgent,
        replay: ReplayBuffer<Transition>,
    },
    Qpg {
        agent: QpgAgent,
        pending: Vec<Trajectory>,
        current: Trajectory,
    },
}

impl AgentState {
    pub fn params(&self) -> &[f64] {
        match self {
            AgentState::Qdqn { agent, .. } => &agent.params,
            AgentState::Qpg { agent, .. } => &agent.params,
        }
    }
}

/// Metrics flushed every `log_every` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub step: u64,
    pub episode: u64,
    pub mean_step_reward: f64,
    pub mean_return: Option<f64>,
    pub approx_ratio: Option<f64>,
    pub epsilon: Option<f64>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    /// Training step at which the episode ended.
    pub end_step: u64,
    pub steps: u64,
    pub ret: f64,
    pub outcome: EpisodeOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Window {
    reward_sum: f64,
    steps: u64,
    returns: Vec<f64>,
    ratios: Vec<f64>,
}

/// Everything needed to continue a run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + DeserializeOwned")]
pub struct Checkpoint<S> {
    pub seed: u64,
    pub step: u64,
    pub episode: u64,
    pub rng: ChaCha8Rng,
    pub env: Option<S>,
    pub agent: AgentState,
    episode_return: f64,
    episode_steps: u64,
    window: Window,
    pub episodes: Vec<EpisodeSummary>,
}

pub struct Trainer<E: Environment> {
    env: E,
    cfg: TrainConfig,
    st: Checkpoint<E::State>,
}

/// Encoding Hamiltonian of some reachable observation, for sizing the
/// parameter vector. Uses its own RNG so the training stream is untouched.
pub fn probe_hamiltonian<E: Environment + Clone>(env: &E) -> Result<Arc<IsingHamiltonian<f64>>> {
    let mut probe = env.clone();
    let obs = probe.reset(&mut ChaCha8Rng::seed_from_u64(0))?;
    probe.hamiltonian(&obs)
}

impl<E: Environment + Clone + Sync> Trainer<E> {
    pub fn new(env: E, cfg: TrainConfig, seed: u64) -> Result<Self> {
        let errs = cfg.agent.validate();
        if !errs.is_empty() {
            return Err(Error::Invalid(errs.join("; ")));
        }
        if cfg.log_every == 0 {
            return Err(Error::Invalid("log_every must be >= 1".into()));
        }
        let ham = probe_hamiltonian(&env)?;
        let count = cfg.agent.model().param_count(&ham);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = match &cfg.agent {
            AgentConfig::Qdqn(c) => AgentState::Qdqn {
                replay: ReplayBuffer::new(c.replay_capacity)?,
                agent: QdqnAgent::new(c.clone(), count, &mut rng),
            },
            AgentConfig::Qpg(c) => AgentState::Qpg {
                agent: QpgAgent::new(c.clone(), count, env.num_actions(), &mut rng),
                pending: Vec::new(),
                current: Trajectory::default(),
            },
        };
        Ok(Self {
            env,
            cfg,
            st: Checkpoint {
                seed,
                step: 0,
                episode: 0,
                rng,
                env: None,
                agent,
                episode_return: 0.0,
                episode_steps: 0,
                window: Window::default(),
                episodes: Vec::new(),
            },
        })
    }

    /// Continues from `checkpoint`; `env` must hold the same problem data.
    pub fn resume(mut env: E, cfg: TrainConfig, checkpoint: Checkpoint<E::State>) -> Result<Self> {
        if let Some(s) = checkpoint.env.clone() {
            env.restore(s)?;
        }
        Ok(Self {
            env,
            cfg,
            st: checkpoint,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint<E::State> {
        let mut c = self.st.clone();
        c.env = self.env.state();
        c
    }

    pub fn step_count(&self) -> u64 {
        self.st.step
    }

    pub fn agent(&self) -> &AgentState {
        &self.st.agent
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn episodes(&self) -> &[EpisodeSummary] {
        &self.st.episodes
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Runs until `total_steps`, handing each record to `sink`.
    pub fn run(&mut self, sink: &mut dyn FnMut(&RunRecord) -> Result<()>) -> Result<()> {
        self.run_until(self.cfg.total_steps, sink)
    }

    pub fn run_until(
        &mut self,
        until: u64,
        sink: &mut dyn FnMut(&RunRecord) -> Result<()>,
    ) -> Result<()> {
        while self.st.step < until.min(self.cfg.total_steps) {
            self.step_once()?;
            if self.st.step.is_multiple_of(self.cfg.log_every) {
                let rec = self.record();
                sink(&rec)?;
            }
        }
        Ok(())
    }

    fn begin_episode(&mut self) -> Result<()> {
        for _ in 0..MAX_EMPTY_RESETS {
            self.env.reset(&mut self.st.rng)?;
            self.st.episode_return = 0.0;
            self.st.episode_steps = 0;
            if !self.env.is_done() {
                return Ok(());
            }
            // nothing to decide in this instance
            self.finish_episode();
        }
        Err(Error::Invalid(format!(
            "{MAX_EMPTY_RESETS} consecutive episodes ended at reset"
        )))
    }

    fn finish_episode(&mut self) {
        if let Some(outcome) = self.env.outcome() {
            self.st.episodes.push(EpisodeSummary {
                end_step: self.st.step,
                steps: self.st.episode_steps,
                ret: self.st.episode_return,
                outcome,
            });
            self.st.window.returns.push(self.st.episode_return);
            if let Some(r) = outcome.ratio() {
                self.st.window.ratios.push(r);
            }
        }
        self.st.episode += 1;
    }

    fn step_once(&mut self) -> Result<()> {
        if self.env.is_done() {
            self.begin_episode()?;
        }
        let obs = self.env.observation()?;
        let ham = self.env.hamiltonian(&obs)?;
        let step = self.st.step;
        let st = &mut self.st;
        let (reward, done) = match &mut st.agent {
            AgentState::Qdqn { agent, replay } => {
                let eps = agent.config.epsilon.value(step);
                let a = agent.act(&ham, &obs, eps, &mut st.rng)?;
                let res = self.env.step(&Action::Index(a))?;
                replay.push(Transition {
                    obs,
                    action: a,
                    reward: res.reward,
                    next_obs: res.observation,
                    done: res.done,
                });
                if step + 1 >= agent.config.learning_starts && replay.len() >= agent.config.batch_size {
                    let batch = replay.sample(agent.config.batch_size, &mut st.rng);
                    agent.update(&batch, &self.env)?;
                }
                (res.reward, res.done)
            }
            AgentState::Qpg {
                agent,
                pending,
                current,
            } => {
                let beta = agent.config.temperature.value(step);
                let action = agent.policy(&ham, &obs, beta)?.sample(&mut st.rng);
                let res = self.env.step(&action)?;
                current.steps.push(TrajectoryStep {
                    obs,
                    action,
                    reward: res.reward,
                    beta,
                });
                if self.cfg.bandit || res.done {
                    current.complete = true;
                    pending.push(std::mem::take(current));
                }
                if pending.len() >= agent.config.episodes_per_update {
                    agent.update(pending, &self.env)?;
                    pending.clear();
                }
                (res.reward, res.done)
            }
        };
        self.st.step += 1;
        self.st.episode_steps += 1;
        self.st.episode_return += reward;
        self.st.window.reward_sum += reward;
        self.st.window.steps += 1;
        if done {
            self.finish_episode();
        }
        Ok(())
    }

    fn record(&mut self) -> RunRecord {
        let w = std::mem::take(&mut self.st.window);
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let (epsilon, temperature) = match &self.st.agent {
            AgentState::Qdqn { agent, .. } => (Some(agent.config.epsilon.value(self.st.step)), None),
            AgentState::Qpg { agent, .. } => (None, Some(agent.config.temperature.value(self.st.step))),
        };
        RunRecord {
            seed: self.st.seed,
            step: self.st.step,
            episode: self.st.episode,
            mean_step_reward: if w.steps == 0 {
                0.0
            } else {
                w.reward_sum / w.steps as f64
            },
            mean_return: mean(&w.returns),
            approx_ratio: mean(&w.ratios),
            epsilon,
            temperature,
        }
    }
}

/// Mean approximation ratio of episodes ending in the last `window` steps.
pub fn final_window_ratio(episodes: &[EpisodeSummary], total_steps: u64, window: u64) -> Option<f64> {
    let from = total_steps.saturating_sub(window);
    let r: Vec<f64> = episodes
        .iter()
        .filter(|e| e.end_step > from)
        .filter_map(|e| e.outcome.ratio())
        .collect();
    (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
}

/// Mean per-step reward of episodes ending in the last `window` steps.
pub fn final_window_step_reward(episodes: &[EpisodeSummary], total_steps: u64, window: u64) -> Option<f64> {
    let from = total_steps.saturating_sub(window);
    let (sum, n) = episodes
        .iter()
        .filter(|e| e.end_step > from)
        .fold((0.0, 0u64), |(s, n), e| (s + e.ret, n + e.steps));
    (n > 0).then(|| sum / n as f64)
}

/// How actions are chosen during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Actor<'a> {
    /// `epsilon = 0` argmax over Q-values.
    Greedy(&'a QdqnAgent),
    /// Sample from the policy at inverse temperature `beta`.
    Sample(&'a QpgAgent, f64),
    /// Uniform over unmasked actions; fair coins for on/off vectors.
    Random,
}

impl Actor<'_> {
    pub fn act<R: Rng + ?Sized>(
        &self,
        ham: &IsingHamiltonian<f64>,
        obs: &Observation,
        rng: &mut R,
    ) -> Result<Action> {
        match self {
            Actor::Greedy(a) => Ok(Action::Index(a.act(ham, obs, 0.0, rng)?)),
            Actor::Sample(a, beta) => Ok(a.policy(ham, obs, *beta)?.sample(rng)),
            // unit commitment is the only environment with a context and
            // whole-vector actions
            Actor::Random if obs.context.is_some() => {
                Ok(Action::Bits((0..obs.mask.len()).map(|_| rng.gen::<bool>()).collect()))
            }
            Actor::Random => {
                let avail: Vec<usize> = obs.available().collect();
                if avail.is_empty() {
                    return Err(Error::EmptyMask);
                }
                Ok(Action::Index(avail[rng.gen_range(0..avail.len())]))
            }
        }
    }
}

/// Aggregate over evaluation episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: u64,
    pub mean_return: f64,
    pub mean_step_reward: f64,
    pub mean_ratio: Option<f64>,
    pub p_optimal: f64,
    pub p_valid: f64,
}

/// Plays `episodes` episodes from each start produced by `reset` and
/// averages the outcomes.
pub fn evaluate<E, R, F>(
    env: &mut E,
    actor: Actor<'_>,
    starts: usize,
    episodes: usize,
    mut reset: F,
    rng: &mut R,
) -> Result<EvalSummary>
where
    E: Environment,
    R: Rng + ?Sized,
    F: FnMut(&mut E, usize, &mut R) -> Result<Observation>,
{
    let mut total = 0u64;
    let mut ret_sum = 0.0;
    let mut step_sum = 0u64;
    let mut ratios = Vec::new();
    let mut optimal = 0u64;
    let mut valid = 0u64;
    for i in 0..starts {
        for _ in 0..episodes {
            let mut obs = reset(env, i, rng)?;
            let mut ret = 0.0;
            while !env.is_done() {
                let ham = env.hamiltonian(&obs)?;
                let a = actor.act(&ham, &obs, rng)?;
                let r = env.step(&a)?;
                ret += r.reward;
                step_sum += 1;
                obs = r.observation;
            }
            let out = env
                .outcome()
                .ok_or_else(|| Error::Invalid("finished episode has no outcome".into()))?;
            total += 1;
            ret_sum += ret;
            ratios.extend(out.ratio());
            optimal += u64::from(out.optimal);
            valid += u64::from(out.valid);
        }
    }
    if total == 0 {
        return Ok(EvalSummary::default());
    }
    let t = total as f64;
    Ok(EvalSummary {
        episodes: total,
        mean_return: ret_sum / t,
        mean_step_reward: if step_sum == 0 { 0.0 } else { ret_sum / step_sum as f64 },
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        p_optimal: optimal as f64 / t,
        p_valid: valid as f64 / t,
    })
}
