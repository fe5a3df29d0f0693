use std::sync::Arc;

use hqrl_core::hamiltonians::{maxcut_ising, IsingHamiltonian};
use hqrl_core::WeightedGraph;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_index, expect_index, objective_is_optimal, Action, Environment, EpisodeOutcome,
    Observation, StepResult,
};
use crate::error::{Error, Result};

/// Graphs with their normalized Ising encodings and maximum cuts.
#[derive(Debug, Clone)]
pub struct MaxCutData {
    pub graphs: Vec<WeightedGraph>,
    pub hams: Vec<Arc<IsingHamiltonian<f64>>>,
    pub optima: Vec<f64>,
}

impl MaxCutData {
    /// Computes optima by enumeration.
    pub fn new(graphs: Vec<WeightedGraph>) -> Result<Self> {
        let optima = graphs
            .par_iter()
            .map(|g| g.max_cut().map(|r| r.1))
            .collect::<hqrl_core::Result<Vec<_>>>()?;
        Self::with_optima(graphs, optima)
    }

    pub fn with_optima(graphs: Vec<WeightedGraph>, optima: Vec<f64>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::Invalid("MaxCut dataset is empty".into()));
        }
        if optima.len() != graphs.len() {
            return Err(Error::Invalid(format!(
                "{} optima for {} graphs",
                optima.len(),
                graphs.len()
            )));
        }
        let n = graphs[0].num_nodes;
        for g in &graphs {
            g.validate()?;
            if g.num_nodes != n {
                return Err(Error::Invalid(format!(
                    "mixed graph sizes {} and {n} in one dataset",
                    g.num_nodes
                )));
            }
        }
        let hams = graphs
            .iter()
            .map(|g| Arc::new(maxcut_ising::<f64>(g).normalized()))
            .collect();
        Ok(Self {
            graphs,
            hams,
            optima,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graphs[0].num_nodes
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCutState {
    pub instance: usize,
    /// `true` = moved to set 1.
    pub partition: Vec<bool>,
    pub step: usize,
    pub last_cut: f64,
    pub best_cut: f64,
    pub done: bool,
}

/// Nodes start in set 0 and are moved to set 1 one at a time. The reward is
/// the change in cut weight; the episode ends when that change is not
/// positive or every node has moved. The reported solution is the best
/// partition seen, i.e. the one before the terminating move.
#[derive(Debug, Clone)]
pub struct MaxCutEnv {
    data: Arc<MaxCutData>,
    state: Option<MaxCutState>,
}

impl MaxCutEnv {
    pub fn new(data: Arc<MaxCutData>) -> Self {
        Self { data, state: None }
    }

    pub fn data(&self) -> &Arc<MaxCutData> {
        &self.data
    }

    pub fn reset_to(&mut self, instance: usize) -> Result<Observation> {
        if instance >= self.data.len() {
            return Err(Error::Invalid(format!(
                "instance {instance} out of range for {} graphs",
                self.data.len()
            )));
        }
        let n = self.data.num_nodes();
        self.state = Some(MaxCutState {
            instance,
            partition: vec![false; n],
            step: 0,
            last_cut: 0.0,
            best_cut: 0.0,
            done: false,
        });
        self.observation()
    }

    fn current(&self) -> Result<&MaxCutState> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::Invalid("environment was never reset".into()))
    }
}

fn observe(s: &MaxCutState) -> Observation {
    Observation {
        instance: s.instance,
        assigned: Some(s.partition.clone()),
        mask: if s.done {
            vec![false; s.partition.len()]
        } else {
            s.partition.iter().map(|&p| !p).collect()
        },
        context: None,
    }
}

impl Environment for MaxCutEnv {
    type State = MaxCutState;

    fn num_actions(&self) -> usize {
        self.data.num_nodes()
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let i = rng.gen_range(0..self.data.len());
        self.reset_to(i)
    }

    fn observation(&self) -> Result<Observation> {
        Ok(observe(self.current()?))
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        let v = expect_index(action)?;
        let data = self.data.clone();
        let s = self
            .state
            .as_mut()
            .ok_or_else(|| Error::Invalid("environment was never reset".into()))?;
        if s.done {
            return Err(Error::EpisodeOver);
        }
        let mask: Vec<bool> = s.partition.iter().map(|&p| !p).collect();
        check_index(v, &mask)?;
        s.partition[v] = true;
        s.step += 1;
        let cut = data.graphs[s.instance].cut_value(&s.partition);
        let reward = cut - s.last_cut;
        s.last_cut = cut;
        s.best_cut = s.best_cut.max(cut);
        s.done = reward <= 0.0 || s.partition.iter().all(|&p| p);
        let observation = observe(s);
        Ok(StepResult {
            action_mask: observation.mask.clone(),
            observation,
            reward,
            done: s.done,
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
            .ok_or_else(|| Error::Invalid(format!("no graph {}", obs.instance)))
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let s = self.state.as_ref().filter(|s| s.done)?;
        let optimum = self.data.optima[s.instance];
        Some(EpisodeOutcome {
            objective: s.best_cut,
            optimum: Some(optimum),
            valid: true,
            optimal: objective_is_optimal(s.best_cut, optimum),
        })
    }

    fn state(&self) -> Option<MaxCutState> {
        self.state.clone()
    }

    fn restore(&mut self, state: MaxCutState) -> Result<()> {
        if state.instance >= self.data.len() || state.partition.len() != self.data.num_nodes() {
            return Err(Error::Invalid("MaxCut state does not match the dataset".into()));
        }
        self.state = Some(state);
        Ok(())
    }
}
