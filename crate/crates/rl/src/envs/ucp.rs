use std::sync::Arc;

use hqrl_core::hamiltonians::{brute_force, ucp_qubo, IsingHamiltonian};
use hqrl_core::UcpInstance;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Action, Environment, EpisodeOutcome, Observation, StepResult, UcpContext};
use crate::error::{Error, Result};

/// Steps per unit-commitment episode.
pub const UCP_HORIZON: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpState {
    pub demands: Vec<f64>,
    /// One power vector per step, drawn at reset.
    pub powers: Vec<Vec<f64>>,
    pub step: usize,
    pub total_reward: f64,
    /// Sum of per-step optimal rewards, when tracked.
    pub total_optimal: Option<f64>,
    pub all_optimal: bool,
}

/// A sequence of contextual bandits: each step draws fresh generator powers
/// and a demand, the action switches every generator on or off, and the
/// reward is the negative penalized cost.
#[derive(Debug, Clone)]
pub struct UcpEnv {
    instance: Arc<UcpInstance>,
    lambda_eq: f64,
    track_optimum: bool,
    state: Option<UcpState>,
}

impl UcpEnv {
    pub fn new(instance: Arc<UcpInstance>, lambda_eq: f64) -> Result<Self> {
        instance.validate()?;
        if lambda_eq.is_nan() || lambda_eq < 0.0 {
            return Err(Error::Invalid(format!("penalty {lambda_eq} must be >= 0")));
        }
        Ok(Self {
            instance,
            lambda_eq,
            track_optimum: false,
            state: None,
        })
    }

    /// Also enumerate the best action each step (exponential in the
    /// generator count).
    pub fn tracking_optimum(mut self, on: bool) -> Self {
        self.track_optimum = on;
        self
    }

    pub fn instance(&self) -> &UcpInstance {
        &self.instance
    }

    pub fn lambda_eq(&self) -> f64 {
        self.lambda_eq
    }

    /// `-(cost + lambda_eq residual^2)` for `x` in `context`.
    pub fn reward_of(&self, context: &UcpContext, x: &[bool]) -> f64 {
        -self
            .instance
            .penalized_cost(&context.powers, x, context.demand, self.lambda_eq)
    }

    /// Largest achievable reward in `context`.
    pub fn optimal_reward(&self, context: &UcpContext) -> Result<f64> {
        let q = ucp_qubo::<f64>(&self.instance, &context.powers, context.demand, self.lambda_eq)?;
        Ok(-brute_force(&q)?.value)
    }

    fn current(&self) -> Result<&UcpState> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::Invalid("environment was never reset".into()))
    }

    fn context(s: &UcpState) -> Option<UcpContext> {
        (s.step < UCP_HORIZON).then(|| UcpContext {
            powers: s.powers[s.step].clone(),
            demand: s.demands[s.step],
        })
    }

    fn observe(&self, s: &UcpState) -> Observation {
        let done = s.step >= UCP_HORIZON;
        Observation {
            instance: 0,
            assigned: None,
            mask: vec![!done; self.instance.len()],
            context: Self::context(s),
        }
    }
}

impl Environment for UcpEnv {
    type State = UcpState;

    fn num_actions(&self) -> usize {
        self.instance.len()
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let demands = (0..UCP_HORIZON)
            .map(|_| self.instance.sample_demand(rng))
            .collect();
        let powers = (0..UCP_HORIZON)
            .map(|_| self.instance.sample_powers(rng))
            .collect();
        self.state = Some(UcpState {
            demands,
            powers,
            step: 0,
            total_reward: 0.0,
            total_optimal: self.track_optimum.then_some(0.0),
            all_optimal: true,
        });
        self.observation()
    }

    fn observation(&self) -> Result<Observation> {
        Ok(self.observe(self.current()?))
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        let x = match action {
            Action::Bits(x) => x,
            Action::Index(_) => {
                return Err(Error::Invalid("unit commitment expects a full on/off vector".into()))
            }
        };
        let mut s = self.current()?.clone();
        let ctx = Self::context(&s).ok_or(Error::EpisodeOver)?;
        if x.len() != self.instance.len() {
            return Err(hqrl_core::Error::Dimension {
                what: "unit commitment action",
                expected: self.instance.len(),
                got: x.len(),
            }
            .into());
        }
        let reward = self.reward_of(&ctx, x);
        s.total_reward += reward;
        if let Some(t) = s.total_optimal.as_mut() {
            let best = self.optimal_reward(&ctx)?;
            *t += best;
            s.all_optimal &= reward >= best - 1e-9 * best.abs().max(1.0);
        }
        s.step += 1;
        let observation = self.observe(&s);
        let done = s.step >= UCP_HORIZON;
        self.state = Some(s);
        Ok(StepResult {
            action_mask: observation.mask.clone(),
            observation,
            reward,
            done,
        })
    }

    fn is_done(&self) -> bool {
        self.state.as_ref().is_none_or(|s| s.step >= UCP_HORIZON)
    }

    fn hamiltonian(&self, obs: &Observation) -> Result<Arc<IsingHamiltonian<f64>>> {
        let ctx = obs
            .context
            .as_ref()
            .ok_or_else(|| Error::Invalid("observation has no unit-commitment context".into()))?;
        let q = ucp_qubo::<f64>(&self.instance, &ctx.powers, ctx.demand, self.lambda_eq)?;
        Ok(Arc::new(q.to_ising().normalized()))
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let s = self.state.as_ref().filter(|s| s.step >= UCP_HORIZON)?;
        Some(EpisodeOutcome {
            objective: s.total_reward,
            optimum: s.total_optimal,
            valid: true,
            optimal: s.total_optimal.is_some() && s.all_optimal,
        })
    }

    fn state(&self) -> Option<UcpState> {
        self.state.clone()
    }

    fn restore(&mut self, state: UcpState) -> Result<()> {
        let n = self.instance.len();
        if state.demands.len() != UCP_HORIZON
            || state.powers.len() != UCP_HORIZON
            || state.powers.iter().any(|p| p.len() != n)
        {
            return Err(Error::Invalid("unit-commitment state does not match the instance".into()));
        }
        self.state = Some(state);
        Ok(())
    }
}
