use hqrl_core::ansatz::{init_params, AnsatzKind};
use hqrl_core::hamiltonians::IsingHamiltonian;
use hqrl_core::optim::Adam;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Forward, HeadKind, Model};
use super::schedule::Schedule;
use crate::envs::{Action, Environment, Observation};
use crate::error::{Error, Result};

/// Squashing for the per-variable head.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BernoulliLink {
    /// `P(x_i = 1) = logistic(beta w_i <Z_i>)`.
    #[default]
    Logistic,
    /// `P(x_i = 1) = (1 - <Z_i>) / 2`, the Born probability of measuring 1.
    Born,
}

const BORN_FLOOR: f64 = 1e-9;

/// Trainable output scalings `w` multiplying the head values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// `w = 1`, not trained.
    #[default]
    None,
    /// One `w` shared by every observable; keeps node permutations
    /// equivariant.
    Global,
    /// One `w` per observable.
    PerObservable,
}

impl ScalingMode {
    /// Number of trainable output scales for `num_actions` observables.
    pub fn len(&self, num_actions: usize) -> usize {
        match self {
            ScalingMode::None => 0,
            ScalingMode::Global => 1,
            ScalingMode::PerObservable => num_actions,
        }
    }
}

/// `w_i`: all ones when empty, the shared value when of length one.
fn scale_of(scaling: &[f64], i: usize) -> f64 {
    match scaling {
        [] => 1.0,
        [w] => *w,
        _ => scaling.get(i).copied().unwrap_or(1.0),
    }
}

fn add_scaling_grad(d: &mut [f64], i: usize, g: f64) {
    match d.len() {
        0 => {}
        1 => d[0] += g,
        _ => {
            if let Some(x) = d.get_mut(i) {
                *x += g;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpgConfig {
    pub model: Model,
    pub lr_circuit: f64,
    pub lr_scaling: f64,
    pub gamma: f64,
    pub scaling: ScalingMode,
    /// Shared inverse temperature `beta`.
    pub temperature: Schedule,
    /// Decay of the moving-average return baseline; `None` disables it.
    pub baseline_decay: Option<f64>,
    pub episodes_per_update: usize,
    pub link: BernoulliLink,
}

impl Default for QpgConfig {
    fn default() -> Self {
        Self {
            model: Model::new(AnsatzKind::SgeSgv, 5, HeadKind::NodeX),
            lr_circuit: 1e-2,
            lr_scaling: 1e-1,
            gamma: 0.99,
            scaling: ScalingMode::None,
            temperature: Schedule::constant(1.0),
            baseline_decay: Some(0.99),
            episodes_per_update: 10,
            link: BernoulliLink::Logistic,
        }
    }
}

impl QpgConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.model.layers == 0 {
            errs.push("layers must be >= 1".into());
        }
        if [self.lr_circuit, self.lr_scaling].iter().any(|l| l.is_nan() || *l <= 0.0) {
            errs.push("learning rates must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            errs.push(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if let Some(d) = self.baseline_decay {
            if !(0.0..1.0).contains(&d) {
                errs.push(format!("baseline_decay must be in [0, 1), got {d}"));
            }
        }
        if self.episodes_per_update == 0 {
            errs.push("episodes_per_update must be >= 1".into());
        }
        if let Err(e) = self.temperature.validate("temperature") {
            errs.push(e.to_string());
        }
        errs
    }
}

/// Action distribution of a policy head.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// One probability per action; masked actions have probability 0.
    Categorical(Vec<f64>),
    /// Independent `P(x_i = 1)`.
    Bernoulli(Vec<f64>),
}

impl Policy {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            Policy::Categorical(p) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last = 0;
                for (i, &pi) in p.iter().enumerate() {
                    if pi > 0.0 {
                        acc += pi;
                        last = i;
                        if u < acc {
                            return Action::Index(i);
                        }
                    }
                }
                Action::Index(last)
            }
            Policy::Bernoulli(p) => Action::Bits(p.iter().map(|&pi| rng.gen::<f64>() < pi).collect()),
        }
    }

    /// Most likely action.
    pub fn mode(&self) -> Action {
        match self {
            Policy::Categorical(p) => {
                let mut best = 0;
                for i in 1..p.len() {
                    if p[i] > p[best] {
                        best = i;
                    }
                }
                Action::Index(best)
            }
            Policy::Bernoulli(p) => Action::Bits(p.iter().map(|&pi| pi > 0.5).collect()),
        }
    }

    pub fn log_prob(&self, action: &Action) -> Result<f64> {
        match (self, action) {
            (Policy::Categorical(p), Action::Index(a)) => {
                let pa = *p.get(*a).ok_or(Error::ActionRange {
                    action: *a,
                    num_actions: p.len(),
                })?;
                if pa == 0.0 {
                    return Err(Error::MaskedAction { action: *a });
                }
                Ok(pa.ln())
            }
            (Policy::Bernoulli(p), Action::Bits(x)) if x.len() == p.len() => Ok(p
                .iter()
                .zip(x)
                .map(|(&pi, &xi)| if xi { pi.ln() } else { (1.0 - pi).ln() })
                .sum()),
            _ => Err(Error::Invalid("action does not match the policy head".into())),
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Distribution from head values `e`, scalings `w` (empty = all ones) and
/// inverse temperature `beta`.
pub fn policy_from_values(
    head: HeadKind,
    link: BernoulliLink,
    values: &[f64],
    scaling: &[f64],
    beta: f64,
    mask: &[bool],
) -> Result<Policy> {
    let w = |i: usize| scale_of(scaling, i);
    match head {
        HeadKind::BernoulliZ => Ok(Policy::Bernoulli(
            values
                .iter()
                .enumerate()
                .map(|(i, &e)| match link {
                    BernoulliLink::Logistic => logistic(beta * w(i) * e),
                    BernoulliLink::Born => ((1.0 - e) / 2.0).clamp(BORN_FLOOR, 1.0 - BORN_FLOOR),
                })
                .collect(),
        )),
        _ => {
            let logits: Vec<Option<f64>> = values
                .iter()
                .enumerate()
                .map(|(i, &e)| mask.get(i).copied().unwrap_or(false).then(|| beta * w(i) * e))
                .collect();
            let max = logits
                .iter()
                .flatten()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(Error::EmptyMask);
            }
            let exps: Vec<f64> = logits
                .iter()
                .map(|l| l.map_or(0.0, |l| (l - max).exp()))
                .collect();
            let z: f64 = exps.iter().sum();
            Ok(Policy::Categorical(exps.iter().map(|e| e / z).collect()))
        }
    }
}

/// Derivatives of `log pi(action)` with respect to each head value and each
/// scaling.
pub fn log_prob_sensitivities(
    policy: &Policy,
    link: BernoulliLink,
    action: &Action,
    values: &[f64],
    scaling: &[f64],
    beta: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = |i: usize| scale_of(scaling, i);
    let n = values.len();
    let mut d_values = vec![0.0; n];
    let mut d_scaling = vec![0.0; scaling.len()];
    match (policy, action) {
        (Policy::Categorical(p), Action::Index(a)) => {
            if p.get(*a).copied().unwrap_or(0.0) == 0.0 {
                return Err(Error::MaskedAction { action: *a });
            }
            for b in 0..n {
                if p[b] == 0.0 && b != *a {
                    continue;
                }
                let g = f64::from(u8::from(b == *a)) - p[b];
                d_values[b] = beta * w(b) * g;
                add_scaling_grad(&mut d_scaling, b, beta * values[b] * g);
            }
        }
        (Policy::Bernoulli(p), Action::Bits(x)) if x.len() == n => {
            for i in 0..n {
                let xi = f64::from(u8::from(x[i]));
                match link {
                    BernoulliLink::Logistic => {
                        let g = xi - p[i];
                        d_values[i] = beta * w(i) * g;
                        add_scaling_grad(&mut d_scaling, i, beta * values[i] * g);
                    }
                    BernoulliLink::Born => {
                        let raw = (1.0 - values[i]) / 2.0;
                        if raw > BORN_FLOOR && raw < 1.0 - BORN_FLOOR {
                            d_values[i] = if x[i] { -0.5 / p[i] } else { 0.5 / (1.0 - p[i]) };
                        }
                    }
                }
            }
        }
        _ => return Err(Error::Invalid("action does not match the policy head".into())),
    }
    Ok((d_values, d_scaling))
}

/// Distribution over actions for `obs`.
pub fn qpg_policy(
    config: &QpgConfig,
    params: &[f64],
    scaling: &[f64],
    beta: f64,
    ham: &IsingHamiltonian<f64>,
    obs: &Observation,
) -> Result<Policy> {
    let values = config.model.values(params, ham, obs)?;
    policy_from_values(config.model.head, config.link, &values, scaling, beta, &obs.mask)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub obs: Observation,
    pub action: Action,
    pub reward: f64,
    /// Inverse temperature the action was sampled with.
    pub beta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub complete: bool,
}

impl Trajectory {
    /// `G_t = sum_k gamma^k r_{t+k}` for every step.
    pub fn returns(&self, gamma: f64) -> Vec<f64> {
        let mut g = 0.0;
        let mut out = vec![0.0; self.steps.len()];
        for (t, s) in self.steps.iter().enumerate().rev() {
            g = s.reward + gamma * g;
            out[t] = g;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub mean_return: f64,
    pub baseline: f64,
    pub grad_norm: f64,
}

/// REINFORCE with a moving-average baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpgAgent {
    pub config: QpgConfig,
    pub params: Vec<f64>,
    pub scaling: Vec<f64>,
    pub adam_circuit: Adam<f64>,
    pub adam_scaling: Adam<f64>,
    pub baseline: Option<f64>,
    pub updates: u64,
}

impl QpgAgent {
    pub fn new<R: Rng + ?Sized>(
        config: QpgConfig,
        param_count: usize,
        num_actions: usize,
        rng: &mut R,
    ) -> Self {
        let params: Vec<f64> = init_params(param_count, rng);
        let scaling = vec![1.0; config.scaling.len(num_actions)];
        Self {
            adam_circuit: Adam::new(param_count, config.lr_circuit),
            adam_scaling: Adam::new(scaling.len(), config.lr_scaling),
            params,
            scaling,
            config,
            baseline: None,
            updates: 0,
        }
    }

    pub fn policy(&self, ham: &IsingHamiltonian<f64>, obs: &Observation, beta: f64) -> Result<Policy> {
        qpg_policy(&self.config, &self.params, &self.scaling, beta, ham, obs)
    }

    /// Gradients of `log pi(action | obs)` with respect to the circuit
    /// parameters and the scalings.
    pub fn log_prob_gradient(
        &self,
        fwd: &Forward,
        obs: &Observation,
        action: &Action,
        beta: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let policy = policy_from_values(
            self.config.model.head,
            self.config.link,
            &fwd.values,
            &self.scaling,
            beta,
            &obs.mask,
        )?;
        let (dv, ds) =
            log_prob_sensitivities(&policy, self.config.link, action, &fwd.values, &self.scaling, beta)?;
        let gc = self.config.model.weighted_gradient(fwd, &self.params, &dv)?;
        Ok((gc, ds))
    }

    /// Policy-gradient estimate `mean_episodes sum_t grad log pi (G_t - b)`
    /// (ascent direction).
    pub fn policy_gradient<E: Environment + Sync>(
        &self,
        trajectories: &[Trajectory],
        env: &E,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if trajectories.is_empty() {
            return Err(Error::Invalid("no trajectories to learn from".into()));
        }
        if trajectories.iter().any(|t| !t.complete) {
            return Err(Error::IncompleteTrajectory);
        }
        let b = self.baseline.unwrap_or(0.0);
        let mut items = Vec::new();
        let mut all_returns = Vec::new();
        for t in trajectories {
            for (s, g) in t.steps.iter().zip(t.returns(self.config.gamma)) {
                items.push((s, g - b));
                all_returns.push(g);
            }
        }
        let model = self.config.model;
        let parts = items
            .par_iter()
            .map(|(s, adv)| {
                if *adv == 0.0 {
                    return Ok(None);
                }
                let ham = env.hamiltonian(&s.obs)?;
                let fwd = model.forward(&self.params, &ham, &s.obs)?;
                let (gc, gs) = self.log_prob_gradient(&fwd, &s.obs, &s.action, s.beta)?;
                Ok(Some((gc, gs, *adv)))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = trajectories.len() as f64;
        let mut gc = vec![0.0; self.params.len()];
        let mut gs = vec![0.0; self.scaling.len()];
        for (c, s, adv) in parts.into_iter().flatten() {
            for (a, v) in gc.iter_mut().zip(&c) {
                *a += adv * v / k;
            }
            for (a, v) in gs.iter_mut().zip(&s) {
                *a += adv * v / k;
            }
        }
        Ok((gc, gs, all_returns))
    }

    /// One ascent step on the batch, then the baseline update.
    pub fn update<E: Environment + Sync>(
        &mut self,
        trajectories: &[Trajectory],
        env: &E,
    ) -> Result<UpdateStats> {
        let (gc, gs, returns) = self.policy_gradient(trajectories, env)?;
        let grad_norm = gc.iter().chain(&gs).map(|g| g * g).sum::<f64>().sqrt();
        let neg_c: Vec<f64> = gc.iter().map(|g| -g).collect();
        let neg_s: Vec<f64> = gs.iter().map(|g| -g).collect();
        self.adam_circuit.step(&mut self.params, &neg_c)?;
        if !self.scaling.is_empty() {
            self.adam_scaling.step(&mut self.scaling, &neg_s)?;
        }
        self.updates += 1;
        if let Some(d) = self.config.baseline_decay {
            for &g in &returns {
                self.baseline = Some(match self.baseline {
                    None => g,
                    Some(b) => d * b + (1.0 - d) * g,
                });
            }
        }
        let mean_return = if returns.is_empty() {
            0.0
        } else {
            returns.iter().sum::<f64>() / returns.len() as f64
        };
        Ok(UpdateStats {
            mean_return,
            baseline: self.baseline.unwrap_or(0.0),
            grad_norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_temperature_is_uniform_over_mask() {
        let p = policy_from_values(
            HeadKind::NodeX,
            BernoulliLink::Logistic,
            &[0.3, -0.2, 0.9, 0.1],
            &[],
            0.0,
            &[true, false, true, true],
        )
        .unwrap();
        let Policy::Categorical(p) = p else { panic!() };
        assert_eq!(p[1], 0.0);
        for i in [0, 2, 3] {
            assert!((p[i] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_available_action_is_certain() {
        let p = policy_from_values(
            HeadKind::ItemZ,
            BernoulliLink::Logistic,
            &[0.3, -0.2],
            &[],
            7.0,
            &[false, true],
        )
        .unwrap();
        assert_eq!(p, Policy::Categorical(vec![0.0, 1.0]));
        assert!(policy_from_values(HeadKind::ItemZ, BernoulliLink::Logistic, &[0.1], &[], 1.0, &[false]).is_err());
    }

    #[test]
    fn zero_logits_give_fair_coins() {
        let p = policy_from_values(
            HeadKind::BernoulliZ,
            BernoulliLink::Logistic,
            &[0.0, 0.4],
            &[2.0, 0.0],
            1.0,
            &[true, true],
        )
        .unwrap();
        assert_eq!(p, Policy::Bernoulli(vec![0.5, 0.5]));
        let born = policy_from_values(HeadKind::BernoulliZ, BernoulliLink::Born, &[-1.0, 0.0], &[], 1.0, &[true; 2])
            .unwrap();
        let Policy::Bernoulli(b) = born else { panic!() };
        assert!((b[0] - 1.0).abs() < 1e-8 && b[1] == 0.5);
    }

    #[test]
    fn sampling_never_emits_masked_actions() {
        let p = policy_from_values(
            HeadKind::NodeX,
            BernoulliLink::Logistic,
            &[5.0, -5.0, 0.0],
            &[],
            3.0,
            &[false, true, true],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            assert_ne!(p.sample(&mut rng), Action::Index(0));
        }
        assert!(p.log_prob(&Action::Index(0)).is_err());
    }

    #[test]
    fn sensitivities_match_finite_differences() {
        let values = [0.3, -0.7, 0.1];
        let scaling = [1.2, 0.8, -0.5];
        let mask = [true, true, true];
        let beta = 1.7;
        for head in [HeadKind::NodeX, HeadKind::BernoulliZ] {
            let action = match head {
                HeadKind::BernoulliZ => Action::Bits(vec![true, false, true]),
                _ => Action::Index(1),
            };
            let lp = |v: &[f64], s: &[f64]| {
                policy_from_values(head, BernoulliLink::Logistic, v, s, beta, &mask)
                    .unwrap()
                    .log_prob(&action)
                    .unwrap()
            };
            let p = policy_from_values(head, BernoulliLink::Logistic, &values, &scaling, beta, &mask).unwrap();
            let (dv, ds) =
                log_prob_sensitivities(&p, BernoulliLink::Logistic, &action, &values, &scaling, beta).unwrap();
            let h = 1e-6;
            for i in 0..3 {
                let mut v = values;
                v[i] += h;
                let up = lp(&v, &scaling);
                v[i] -= 2.0 * h;
                let fd = (up - lp(&v, &scaling)) / (2.0 * h);
                assert!((fd - dv[i]).abs() < 1e-8, "{head:?} value {i}");
                let mut s = scaling;
                s[i] += h;
                let up = lp(&values, &s);
                s[i] -= 2.0 * h;
                let fd = (up - lp(&values, &s)) / (2.0 * h);
                assert!((fd - ds[i]).abs() < 1e-8, "{head:?} scaling {i}");
            }
        }
    }

    #[test]
    fn global_scaling_sensitivity_sums_over_actions() {
        let values = [0.3, -0.7, 0.1, 0.9];
        let mask = [true, false, true, true];
        let beta = 2.3;
        let action = Action::Index(2);
        let lp = |w: f64| {
            policy_from_values(HeadKind::NodeX, BernoulliLink::Logistic, &values, &[w], beta, &mask)
                .unwrap()
                .log_prob(&action)
                .unwrap()
        };
        let p = policy_from_values(HeadKind::NodeX, BernoulliLink::Logistic, &values, &[0.6], beta, &mask).unwrap();
        let (_, ds) = log_prob_sensitivities(&p, BernoulliLink::Logistic, &action, &values, &[0.6], beta).unwrap();
        let h = 1e-6;
        let fd = (lp(0.6 + h) - lp(0.6 - h)) / (2.0 * h);
        assert_eq!(ds.len(), 1);
        assert!((fd - ds[0]).abs() < 1e-8);
    }

    #[test]
    fn discounted_returns() {
        let step = |r: f64| TrajectoryStep {
            obs: Observation {
                instance: 0,
                assigned: None,
                mask: vec![true],
                context: None,
            },
            action: Action::Index(0),
            reward: r,
            beta: 1.0,
        };
        let t = Trajectory {
            steps: vec![step(1.0), step(0.0), step(2.0)],
            complete: true,
        };
        assert_eq!(t.returns(0.5), vec![1.5, 1.0, 2.0]);
        assert_eq!(t.returns(0.0), vec![1.0, 0.0, 2.0]);
    }
}
