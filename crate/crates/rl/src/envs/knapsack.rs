use std::sync::Arc;

use hqrl_core::hamiltonians::{knapsack_qubo_unbalanced, IsingHamiltonian};
use hqrl_core::KnapsackInstance;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_index, expect_index, objective_is_optimal, Action, Environment, EpisodeOutcome,
    Observation, StepResult,
};
use crate::error::{Error, Result};

/// Instances with their normalized unbalanced-penalty encodings and optima.
#[derive(Debug, Clone)]
pub struct KnapsackData {
    pub instances: Vec<KnapsackInstance>,
    pub hams: Vec<Arc<IsingHamiltonian<f64>>>,
    pub optima: Vec<f64>,
}

impl KnapsackData {
    pub fn new(instances: Vec<KnapsackInstance>, lambda1: f64, lambda2: f64) -> Result<Self> {
        let optima = instances
            .par_iter()
            .map(|k| k.optimum().map(|r| r.1))
            .collect::<hqrl_core::Result<Vec<_>>>()?;
        Self::with_optima(instances, optima, lambda1, lambda2)
    }

    pub fn with_optima(
        instances: Vec<KnapsackInstance>,
        optima: Vec<f64>,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Invalid("knapsack dataset is empty".into()));
        }
        if optima.len() != instances.len() {
            return Err(Error::Invalid(format!(
                "{} optima for {} instances",
                optima.len(),
                instances.len()
            )));
        }
        let n = instances[0].len();
        if instances.iter().any(|k| k.len() != n) {
            return Err(Error::Invalid("mixed item counts in one dataset".into()));
        }
        let hams = instances
            .iter()
            .map(|k| {
                Ok(Arc::new(
                    knapsack_qubo_unbalanced::<f64>(k, lambda1, lambda2)?
                        .to_ising()
                        .normalized(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            instances,
            hams,
            optima,
        })
    }

    pub fn num_items(&self) -> usize {
        self.instances[0].len()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// How the capacity constraint is enforced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Masking {
    /// Items that would exceed the capacity are masked out.
    #[default]
    Hard,
    /// Only selected items are masked; overfilling ends the episode with
    /// reward 0.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackState {
    pub instance: usize,
    pub selected: Vec<bool>,
    pub done: bool,
}

/// Items are added one per step. Intermediate rewards are 0; the terminal
/// reward is the selected value, or 0 for an overweight selection (soft
/// masking only).
#[derive(Debug, Clone)]
pub struct KnapsackEnv {
    data: Arc<KnapsackData>,
    masking: Masking,
    state: Option<KnapsackState>,
}

impl KnapsackEnv {
    pub fn new(data: Arc<KnapsackData>, masking: Masking) -> Self {
        Self {
            data,
            masking,
            state: None,
        }
    }

    pub fn data(&self) -> &Arc<KnapsackData> {
        &self.data
    }

    pub fn reset_to(&mut self, instance: usize) -> Result<Observation> {
        if instance >= self.data.len() {
            return Err(Error::Invalid(format!(
                "instance {instance} out of range for {} instances",
                self.data.len()
            )));
        }
        let mut s = KnapsackState {
            instance,
            selected: vec![false; self.data.num_items()],
            done: false,
        };
        s.done = !self.mask(&s).iter().any(|&m| m);
        self.state = Some(s);
        self.observation()
    }

    fn mask(&self, s: &KnapsackState) -> Vec<bool> {
        if s.done {
            return vec![false; s.selected.len()];
        }
        let inst = &self.data.instances[s.instance];
        let load = inst.total_weight(&s.selected);
        s.selected
            .iter()
            .zip(&inst.weights)
            .map(|(&sel, &w)| {
                !sel && (self.masking == Masking::Soft || load + w <= inst.capacity)
            })
            .collect()
    }

    fn current(&self) -> Result<&KnapsackState> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::Invalid("environment was never reset".into()))
    }

    fn observe(&self, s: &KnapsackState) -> Observation {
        Observation {
            instance: s.instance,
            assigned: Some(s.selected.clone()),
            mask: self.mask(s),
            context: None,
        }
    }
}

impl Environment for KnapsackEnv {
    type State = KnapsackState;

    fn num_actions(&self) -> usize {
        self.data.num_items()
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let i = rng.gen_range(0..self.data.len());
        self.reset_to(i)
    }

    fn observation(&self) -> Result<Observation> {
        Ok(self.observe(self.current()?))
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        let a = expect_index(action)?;
        let mut s = self.current()?.clone();
        if s.done {
            return Err(Error::EpisodeOver);
        }
        check_index(a, &self.mask(&s))?;
        s.selected[a] = true;
        let inst = &self.data.instances[s.instance];
        let feasible = inst.is_feasible(&s.selected);
        s.done = !feasible || !self.mask(&s).iter().any(|&m| m);
        let reward = if s.done && feasible {
            inst.total_value(&s.selected)
        } else {
            0.0
        };
        let observation = self.observe(&s);
        self.state = Some(s);
        Ok(StepResult {
            action_mask: observation.mask.clone(),
            done: self.is_done(),
            observation,
            reward,
        })
    }

    fn is_done(&self) -> bool {
        self.state.as_ref().is_none_or(|s| s.done)
    }

    fn hamiltonian(&self, obs: &Observation) -> Result<Arc<IsingHamiltonian<f64>>> {
        self.data
            .hams
            .get(obs.instance)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("no knapsack instance {}", obs.instance)))
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let s = self.state.as_ref().filter(|s| s.done)?;
        let inst = &self.data.instances[s.instance];
        let valid = inst.is_feasible(&s.selected);
        let objective = if valid {
            inst.total_value(&s.selected)
        } else {
            0.0
        };
        let optimum = self.data.optima[s.instance];
        Some(EpisodeOutcome {
            objective,
            optimum: Some(optimum),
            valid,
            optimal: valid && objective_is_optimal(objective, optimum),
        })
    }

    fn state(&self) -> Option<KnapsackState> {
        self.state.clone()
    }

    fn restore(&mut self, state: KnapsackState) -> Result<()> {
        if state.instance >= self.data.len() || state.selected.len() != self.data.num_items() {
            return Err(Error::Invalid("knapsack state does not match the dataset".into()));
        }
        self.state = Some(state);
        Ok(())
    }
}
