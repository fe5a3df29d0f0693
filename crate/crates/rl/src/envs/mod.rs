//! Episodic environments for MaxCut, unit commitment and knapsack.
//!
//! Every environment keeps its mutable episode state in a small serializable
//! struct so that training can be checkpointed mid-episode. Problem data
//! (instances, their normalized Hamiltonians and optima) is shared behind an
//! `Arc`.

mod knapsack;
mod maxcut;
mod trace;
mod ucp;

pub use knapsack::{KnapsackData, KnapsackEnv, KnapsackState, Masking};
pub use maxcut::{MaxCutData, MaxCutEnv, MaxCutState};
pub use trace::{TraceStep, TraceWriter};
pub use ucp::{UcpEnv, UcpState, UCP_HORIZON};

use std::sync::Arc;

use hqrl_core::hamiltonians::IsingHamiltonian;
use hqrl_core::Annotations;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Assign one variable (MaxCut node, knapsack item).
    Index(usize),
    /// Set every variable at once (unit commitment).
    Bits(Vec<bool>),
}

/// Per-step data of the unit-commitment bandit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpContext {
    pub powers: Vec<f64>,
    pub demand: f64,
}

/// What an agent sees. The encoded Hamiltonian is resolved through
/// [`Environment::hamiltonian`], which keeps observations cheap to store in a
/// replay buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub instance: usize,
    /// Assigned variables; `None` when the environment has no annotations.
    pub assigned: Option<Vec<bool>>,
    pub mask: Vec<bool>,
    pub context: Option<UcpContext>,
}

impl Observation {
    pub fn annotations(&self) -> Option<Annotations> {
        self.assigned.as_ref().map(|a| {
            let mut ann = Annotations::all_free(a.len());
            for (i, _) in a.iter().enumerate().filter(|p| *p.1) {
                ann.assign(i);
            }
            ann
        })
    }

    pub fn available(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|p| *p.1).map(|p| p.0)
    }

    pub fn num_available(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub action_mask: Vec<bool>,
}

/// Result of a finished episode in terms of the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub objective: f64,
    pub optimum: Option<f64>,
    pub valid: bool,
    pub optimal: bool,
}

impl EpisodeOutcome {
    /// `objective / optimum` for a positive optimum.
    pub fn ratio(&self) -> Option<f64> {
        self.optimum.filter(|&o| o > 0.0).map(|o| self.objective / o)
    }
}

pub trait Environment {
    type State: Clone + Serialize + DeserializeOwned;

    fn num_actions(&self) -> usize;

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation>;

    fn observation(&self) -> Result<Observation>;

    fn step(&mut self, action: &Action) -> Result<StepResult>;

    fn is_done(&self) -> bool;

    /// Normalized encoding Hamiltonian for `obs`.
    fn hamiltonian(&self, obs: &Observation) -> Result<Arc<IsingHamiltonian<f64>>>;

    /// Available once the episode is over.
    fn outcome(&self) -> Option<EpisodeOutcome>;

    fn state(&self) -> Option<Self::State>;

    fn restore(&mut self, state: Self::State) -> Result<()>;
}

pub(crate) fn check_index(action: usize, mask: &[bool]) -> Result<()> {
    match mask.get(action) {
        None => Err(Error::ActionRange {
            action,
            num_actions: mask.len(),
        }),
        Some(false) => Err(Error::MaskedAction { action }),
        Some(true) => Ok(()),
    }
}

pub(crate) fn expect_index(action: &Action) -> Result<usize> {
    match action {
        Action::Index(i) => Ok(*i),
        Action::Bits(_) => Err(Error::Invalid("expected a single-index action".into())),
    }
}

pub(crate) fn objective_is_optimal(objective: f64, optimum: f64) -> bool {
    (objective - optimum).abs() <= 1e-9 * optimum.abs().max(1.0)
}
