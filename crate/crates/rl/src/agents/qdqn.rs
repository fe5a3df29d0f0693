use hqrl_core::ansatz::{init_params, AnsatzKind};
use hqrl_core::hamiltonians::IsingHamiltonian;
use hqrl_core::optim::Adam;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{HeadKind, Model};
use super::schedule::Schedule;
use crate::envs::{Environment, Observation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdqnConfig {
    pub model: Model,
    pub lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Copy the online parameters to the target network every this many
    /// updates.
    pub target_sync: u64,
    pub epsilon: Schedule,
    /// Environment steps collected before the first update.
    pub learning_starts: u64,
}

impl Default for QdqnConfig {
    fn default() -> Self {
        Self {
            model: Model::new(AnsatzKind::SgeSgv, 5, HeadKind::NodeX),
            lr: 1e-2,
            gamma: 0.99,
            batch_size: 32,
            replay_capacity: 10_000,
            target_sync: 100,
            epsilon: Schedule::linear(1.0, 0.01, 10_000),
            learning_starts: 32,
        }
    }
}

impl QdqnConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.model.layers == 0 {
            errs.push("layers must be >= 1".into());
        }
        if matches!(self.model.head, HeadKind::BernoulliZ) {
            errs.push("Q-learning needs a per-action head, not bernoulli_z".into());
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            errs.push(format!("lr must be > 0, got {}", self.lr));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            errs.push(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if self.batch_size == 0 {
            errs.push("batch_size must be >= 1".into());
        }
        if self.replay_capacity == 0 {
            errs.push("replay_capacity must be >= 1".into());
        }
        if self.target_sync == 0 {
            errs.push("target_sync must be >= 1".into());
        }
        if let Err(e) = self.epsilon.validate("epsilon") {
            errs.push(e.to_string());
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Observation,
    pub done: bool,
}

/// Q-learning with `Q(s, a) = <O_a>` and no output scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdqnAgent {
    pub config: QdqnConfig,
    pub params: Vec<f64>,
    pub target: Vec<f64>,
    pub adam: Adam<f64>,
    pub updates: u64,
}

/// `Q(s, .)` for every action, masked or not.
pub fn qdqn_q_values(
    model: &Model,
    params: &[f64],
    ham: &IsingHamiltonian<f64>,
    obs: &Observation,
) -> Result<Vec<f64>> {
    model.values(params, ham, obs)
}

/// With probability `epsilon` a uniform unmasked action, otherwise the
/// unmasked argmax (lowest index on ties).
pub fn epsilon_greedy<R: Rng + ?Sized>(
    q: &[f64],
    mask: &[bool],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    let available: Vec<usize> = (0..q.len()).filter(|&i| mask.get(i) == Some(&true)).collect();
    if available.is_empty() {
        return Err(Error::EmptyMask);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(available[rng.gen_range(0..available.len())]);
    }
    Ok(masked_argmax(q, &available))
}

pub(crate) fn masked_argmax(q: &[f64], available: &[usize]) -> usize {
    let mut best = available[0];
    for &i in &available[1..] {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

impl QdqnAgent {
    pub fn new<R: Rng + ?Sized>(config: QdqnConfig, param_count: usize, rng: &mut R) -> Self {
        let params: Vec<f64> = init_params(param_count, rng);
        Self {
            adam: Adam::new(param_count, config.lr),
            target: params.clone(),
            params,
            config,
            updates: 0,
        }
    }

    pub fn q_values(&self, ham: &IsingHamiltonian<f64>, obs: &Observation) -> Result<Vec<f64>> {
        qdqn_q_values(&self.config.model, &self.params, ham, obs)
    }

    pub fn target_q_values(&self, ham: &IsingHamiltonian<f64>, obs: &Observation) -> Result<Vec<f64>> {
        qdqn_q_values(&self.config.model, &self.target, ham, obs)
    }

    pub fn act<R: Rng + ?Sized>(
        &self,
        ham: &IsingHamiltonian<f64>,
        obs: &Observation,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<usize> {
        let q = self.q_values(ham, obs)?;
        epsilon_greedy(&q, &obs.mask, epsilon, rng)
    }

    /// TD target `r + gamma max_a' Q_target(s', a')`, or `r` when terminal.
    pub fn td_target<E: Environment>(&self, t: &Transition, env: &E) -> Result<f64> {
        if t.done {
            return Ok(t.reward);
        }
        let ham = env.hamiltonian(&t.next_obs)?;
        let q = self.target_q_values(&ham, &t.next_obs)?;
        let available: Vec<usize> = t.next_obs.available().collect();
        if available.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(t.reward + self.config.gamma * q[masked_argmax(&q, &available)])
    }

    /// Mean squared TD error over `batch` and its gradient.
    pub fn loss_and_gradient<E: Environment + Sync>(
        &self,
        batch: &[&Transition],
        env: &E,
    ) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::Invalid("empty replay batch".into()));
        }
        let model = self.config.model;
        let k = batch.len() as f64;
        let parts = batch
            .par_iter()
            .map(|t| {
                let y = self.td_target(t, env)?;
                let ham = env.hamiltonian(&t.obs)?;
                let fwd = model.forward(&self.params, &ham, &t.obs)?;
                let delta = y - fwd.values[t.action];
                let mut coeffs = vec![0.0; fwd.values.len()];
                coeffs[t.action] = -2.0 * delta / k;
                let g = model.weighted_gradient(&fwd, &self.params, &coeffs)?;
                Ok((delta * delta / k, g))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.params.len()];
        for (l, g) in parts {
            loss += l;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok((loss, grad))
    }

    /// One Adam step on the TD loss; syncs the target network every
    /// `target_sync` updates. Returns the loss before the step.
    pub fn update<E: Environment + Sync>(&mut self, batch: &[&Transition], env: &E) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(batch, env)?;
        self.adam.step(&mut self.params, &grad)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_sync) {
            self.target.clone_from(&self.params);
        }
        Ok(loss)
    }
}
