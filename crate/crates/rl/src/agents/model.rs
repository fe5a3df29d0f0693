use hqrl_core::ansatz::{build, param_count, AnsatzKind};
use hqrl_core::hamiltonians::IsingHamiltonian;
use hqrl_core::statesim::{adjoint_gradient, run_circuit, CircuitTemplate, Observable, StateVector};
use serde::{Deserialize, Serialize};

use crate::envs::Observation;
use crate::error::Result;

/// Which observables turn the circuit state into per-action values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// `<X_v>` per node.
    NodeX,
    /// `sum_u J_uv <Z_u Z_v>` over the couplings incident to node `v`.
    EdgeZz,
    /// `<Z_i>` per item, one softmax over items.
    ItemZ,
    /// `<Z_i>` per variable, an independent Bernoulli per variable.
    BernoulliZ,
}

impl HeadKind {
    pub fn observables(&self, ham: &IsingHamiltonian<f64>) -> Vec<Observable<f64>> {
        let n = ham.n;
        match self {
            HeadKind::NodeX => (0..n).map(Observable::x).collect(),
            HeadKind::ItemZ | HeadKind::BernoulliZ => (0..n).map(Observable::z).collect(),
            HeadKind::EdgeZz => {
                let mut obs = vec![Observable::new(); n];
                for (&(i, j), &c) in &ham.couplings {
                    obs[i].add_scaled(&Observable::zz(i, j), c);
                    obs[j].add_scaled(&Observable::zz(i, j), c);
                }
                obs
            }
        }
    }
}

/// Ansatz plus measurement head: maps (Hamiltonian, annotations, params) to
/// one expectation value per action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub ansatz: AnsatzKind,
    pub layers: usize,
    pub head: HeadKind,
}

/// A forward pass kept around for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub template: CircuitTemplate<f64>,
    pub state: StateVector<f64>,
    pub observables: Vec<Observable<f64>>,
    pub values: Vec<f64>,
}

impl Model {
    pub fn new(ansatz: AnsatzKind, layers: usize, head: HeadKind) -> Self {
        Self {
            ansatz,
            layers,
            head,
        }
    }

    /// Term-wise ansatzes need the same term list for every instance, so a
    /// Hamiltonian with any coupling (field) gets explicit zeros for all
    /// missing couplings (fields).
    pub fn align(&self, ham: &IsingHamiltonian<f64>) -> IsingHamiltonian<f64> {
        let mut h = ham.clone();
        if matches!(self.ansatz, AnsatzKind::MgeSgv | AnsatzKind::MgeMgv) {
            if !h.couplings.is_empty() {
                for i in 0..h.n {
                    for j in i + 1..h.n {
                        h.couplings.entry((i, j)).or_insert(0.0);
                    }
                }
            }
            if !h.fields.is_empty() {
                for i in 0..h.n {
                    h.fields.entry(i).or_insert(0.0);
                }
            }
        }
        h
    }

    pub fn param_count(&self, ham: &IsingHamiltonian<f64>) -> usize {
        param_count(self.ansatz, &self.align(ham), self.layers)
    }

    pub fn forward(
        &self,
        params: &[f64],
        ham: &IsingHamiltonian<f64>,
        obs: &Observation,
    ) -> Result<Forward> {
        let ham = self.align(ham);
        let template = build(self.ansatz, &ham, obs.annotations().as_ref(), self.layers)?;
        let state = run_circuit(&template, params)?;
        let observables = self.head.observables(&ham);
        let values = observables
            .iter()
            .map(|o| state.expectation(o))
            .collect::<hqrl_core::Result<Vec<_>>>()?;
        Ok(Forward {
            template,
            state,
            observables,
            values,
        })
    }

    pub fn values(
        &self,
        params: &[f64],
        ham: &IsingHamiltonian<f64>,
        obs: &Observation,
    ) -> Result<Vec<f64>> {
        Ok(self.forward(params, ham, obs)?.values)
    }

    /// Gradient of `sum_b coeffs[b] <O_b>` with respect to the circuit
    /// parameters, in one reverse sweep.
    pub fn weighted_gradient(&self, fwd: &Forward, params: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut combined = Observable::new();
        for (o, &c) in fwd.observables.iter().zip(coeffs) {
            if c != 0.0 {
                combined.add_scaled(o, c);
            }
        }
        if combined.is_empty() {
            return Ok(vec![0.0; params.len()]);
        }
        Ok(adjoint_gradient(&fwd.template, params, &fwd.state, &combined)?)
    }
}
