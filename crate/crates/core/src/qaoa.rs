//! p-layer QAOA over an Ising Hamiltonian.
//!
//! Layer `l` applies `RZZ(2 gamma_l J_ij)`, `RZ(2 gamma_l h_i)` and
//! `RX(2 beta_l)`, i.e. `exp(-i gamma_l H_C)` followed by
//! `exp(-i beta_l sum X)`. Parameters are laid out `[gamma_1, beta_1, ...]`.

use std::f64::consts::FRAC_PI_4;
use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, IterState, State, KV};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{evaluate_problem, IsingHamiltonian, ProblemInstance};
use crate::optim::Adam;
use crate::real::Real;
use crate::statesim::{
    adjoint_gradient, run_circuit, BoundGate, CircuitTemplate, GateKind, Observable, StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QaoaOptimizer {
    Adam { lr: f64 },
    NelderMead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaConfig {
    pub p: usize,
    pub max_iterations: usize,
    pub optimizer: QaoaOptimizer,
    /// Starting `(gammas, betas)`; drawn uniformly from `[-pi/4, pi/4]` when absent.
    pub init: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            p: 3,
            max_iterations: 100,
            optimizer: QaoaOptimizer::Adam { lr: 0.05 },
            init: None,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.max_iterations == 0 {
            return Err(Error::Invalid("qaoa needs p >= 1 and max_iterations >= 1".into()));
        }
        if let Some((g, b)) = &self.init {
            if g.len() != self.p || b.len() != self.p {
                return Err(Error::Dimension {
                    what: "qaoa initial angles",
                    expected: self.p,
                    got: g.len().min(b.len()),
                });
            }
        }
        Ok(())
    }
}

/// Template with `2p` parameters `[gamma_1, beta_1, gamma_2, beta_2, ...]`.
pub fn qaoa_template<T: Real>(ham: &IsingHamiltonian<T>, p: usize) -> Result<CircuitTemplate<T>> {
    if p == 0 {
        return Err(Error::Invalid("qaoa needs p >= 1".into()));
    }
    let two = T::of(2.0);
    let mut t = CircuitTemplate::new(ham.n);
    for _ in 0..p {
        t.begin_layer();
        let gamma = t.new_param();
        for (&(i, j), &c) in &ham.couplings {
            t.push(BoundGate::param(GateKind::Rzz(i, j), gamma, two * c))?;
        }
        for (&i, &h) in &ham.fields {
            t.push(BoundGate::param(GateKind::Rz(i), gamma, two * h))?;
        }
        let beta = t.new_param();
        for q in 0..ham.n {
            t.push(BoundGate::param(GateKind::Rx(q), beta, two))?;
        }
        t.end_layer();
    }
    Ok(t)
}

fn interleave<T: Copy>(gammas: &[T], betas: &[T]) -> Vec<T> {
    gammas.iter().zip(betas).flat_map(|(&g, &b)| [g, b]).collect()
}

pub fn qaoa_circuit<T: Real>(
    ham: &IsingHamiltonian<T>,
    gammas: &[T],
    betas: &[T],
) -> Result<StateVector<T>> {
    if gammas.len() != betas.len() {
        return Err(Error::Dimension {
            what: "qaoa betas",
            expected: gammas.len(),
            got: betas.len(),
        });
    }
    let t = qaoa_template(ham, gammas.len())?;
    run_circuit(&t, &interleave(gammas, betas))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaResult {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `<H>` per iteration in the Hamiltonian's own units. Best-so-far for
    /// Nelder-Mead.
    pub trace: Vec<f64>,
    pub final_energy: f64,
}

/// Minimizes `<H>`. The circuit runs on the max-abs normalized Hamiltonian,
/// which only rescales `gamma`; reported energies use the original units.
pub fn qaoa_optimize<R: Rng + ?Sized>(
    ham: &IsingHamiltonian<f64>,
    cfg: &QaoaConfig,
    rng: &mut R,
) -> Result<QaoaResult> {
    cfg.validate()?;
    let scale = ham.max_abs_coefficient();
    let scale = if scale == 0.0 { 1.0 } else { scale };
    let norm = ham.normalized();
    let template = qaoa_template(&norm, cfg.p)?;
    let obs = norm.to_observable(false);
    let raw = |e: f64| e * scale + ham.constant;

    let mut params = match &cfg.init {
        Some((g, b)) => interleave(g, b),
        None => (0..2 * cfg.p)
            .map(|_| rng.gen_range(-FRAC_PI_4..=FRAC_PI_4))
            .collect(),
    };

    let trace = match cfg.optimizer {
        QaoaOptimizer::Adam { lr } => {
            let mut adam = Adam::new(params.len(), lr);
            let mut trace = Vec::with_capacity(cfg.max_iterations);
            for _ in 0..cfg.max_iterations {
                let state = run_circuit(&template, &params)?;
                trace.push(raw(state.expectation(&obs)?));
                let grad = adjoint_gradient(&template, &params, &state, &obs)?;
                if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < 1e-8 {
                    break;
                }
                adam.step(&mut params, &grad)?;
            }
            trace
        }
        QaoaOptimizer::NelderMead => {
            let (best, trace) = nelder_mead(&template, &obs, &params, cfg.max_iterations)?;
            params = best;
            trace.into_iter().map(raw).collect()
        }
    };

    let final_energy = raw(run_circuit(&template, &params)?.expectation(&obs)?);
    Ok(QaoaResult {
        gammas: params.iter().step_by(2).map(|g| g / scale).collect(),
        betas: params.iter().skip(1).step_by(2).copied().collect(),
        trace,
        final_energy,
    })
}

struct Energy<'a> {
    template: &'a CircuitTemplate<f64>,
    obs: &'a Observable<f64>,
}

impl CostFunction for Energy<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let s = run_circuit(self.template, p)?;
        Ok(s.expectation(self.obs)?)
    }
}

#[derive(Clone, Default)]
struct BestCostTrace(Arc<Mutex<Vec<f64>>>);

impl Observe<IterState<Vec<f64>, (), (), (), (), f64>> for BestCostTrace {
    fn observe_iter(
        &mut self,
        state: &IterState<Vec<f64>, (), (), (), (), f64>,
        _kv: &KV,
    ) -> std::result::Result<(), argmin::core::Error> {
        self.0.lock().expect("trace lock").push(state.get_best_cost());
        Ok(())
    }
}

fn nelder_mead(
    template: &CircuitTemplate<f64>,
    obs: &Observable<f64>,
    start: &[f64],
    max_iterations: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut simplex = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut v = start.to_vec();
        v[i] += 0.1;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-10)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let trace = BestCostTrace::default();
    let res = Executor::new(Energy { template, obs }, solver)
        .configure(|s| s.max_iters(max_iterations as u64))
        .add_observer(trace.clone(), ObserverMode::Always)
        .run()
        .map_err(|e| Error::Invalid(format!("nelder-mead failed: {e}")))?;
    let best = res
        .state()
        .get_best_param()
        .cloned()
        .unwrap_or_else(|| start.to_vec());
    let trace = trace.0.lock().expect("trace lock").clone();
    Ok((best, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaMetrics {
    pub p_optimal: f64,
    pub p_valid: f64,
}

/// Probability mass on optimal and on valid assignments of the original
/// problem. Basis states are decoded by their first `num_vars` qubits; any
/// further (slack) qubits are ignored.
pub fn qaoa_metrics<T: Real>(state: &StateVector<T>, problem: &ProblemInstance) -> Result<QaoaMetrics> {
    let n = problem.num_vars();
    if state.num_qubits() < n {
        return Err(Error::Dimension {
            what: "state qubits",
            expected: n,
            got: state.num_qubits(),
        });
    }
    let optimum = match problem {
        ProblemInstance::Knapsack(k) => k.optimum()?.1,
        ProblemInstance::MaxCut(g) => g.max_cut()?.1,
        ProblemInstance::Ucp { .. } => {
            return Err(Error::Invalid(
                "unit commitment has no discrete optimum without a penalty weight".into(),
            ))
        }
    };
    let tol = 1e-9 * optimum.abs().max(1.0);
    let mask = (1usize << n) - 1;
    // probability per decoded assignment
    let mut marginal = vec![0.0f64; 1 << n];
    for (b, a) in state.amplitudes().iter().enumerate() {
        marginal[b & mask] += a.norm_sqr().to_f64_lossy();
    }
    let mut metrics = QaoaMetrics {
        p_optimal: 0.0,
        p_valid: 0.0,
    };
    for (bits, &p) in marginal.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let e = evaluate_problem(problem, &x)?;
        if e.is_valid {
            metrics.p_valid += p;
            if (e.objective - optimum).abs() <= tol {
                metrics.p_optimal += p;
            }
        }
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{knapsack_qubo_unbalanced, KnapsackInstance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_only() -> IsingHamiltonian<f64> {
        let mut h = IsingHamiltonian::new(1);
        h.set_field(0, 1.0).unwrap();
        h
    }

    #[test]
    fn zero_angles_give_uniform_state() {
        let mut h = IsingHamiltonian::<f64>::new(3);
        h.set_coupling(0, 2, 0.7).unwrap();
        h.set_field(1, -0.3).unwrap();
        let s = qaoa_circuit(&h, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| (a.re - 8f64.sqrt().recip()).abs() < 1e-14));
    }

    #[test]
    fn single_qubit_closed_form() {
        // exp(-i b X) exp(-i g Z)|+>: <Z> = sin(2b) sin(2g)
        let h = z_only();
        for i in 0..20 {
            for j in 0..20 {
                let g = -1.5 + 0.15 * i as f64;
                let b = -1.5 + 0.15 * j as f64;
                let s = qaoa_circuit(&h, &[g], &[b]).unwrap();
                let z = s.expectation(&Observable::z(0)).unwrap();
                assert!((z - (2.0 * b).sin() * (2.0 * g).sin()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adam_reaches_ground_state_of_z() {
        let h = z_only();
        let cfg = QaoaConfig {
            p: 1,
            ..QaoaConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = qaoa_optimize(&h, &cfg, &mut rng).unwrap();
        assert!(r.trace.len() <= 100);
        assert!(r.final_energy <= -0.99, "{}", r.final_energy);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(qaoa_optimize(&h, &cfg, &mut rng).unwrap(), r);
    }

    #[test]
    fn nelder_mead_trace_is_monotone() {
        let mut h = IsingHamiltonian::<f64>::new(3);
        h.set_coupling(0, 1, 1.0).unwrap();
        h.set_coupling(1, 2, 1.0).unwrap();
        h.set_field(0, 0.5).unwrap();
        let cfg = QaoaConfig {
            p: 2,
            max_iterations: 60,
            optimizer: QaoaOptimizer::NelderMead,
            init: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = qaoa_optimize(&h, &cfg, &mut rng).unwrap();
        assert!(!r.trace.is_empty() && r.trace.len() <= 60);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.final_energy - r.trace.last().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn metrics_on_basis_and_uniform_states() {
        let k = KnapsackInstance::new(vec![1.0], vec![1.0], 0.0).unwrap();
        let problem = ProblemInstance::Knapsack(k.clone());
        let uniform = StateVector::<f64>::plus(1).unwrap();
        let m = qaoa_metrics(&uniform, &problem).unwrap();
        assert!((m.p_valid - 0.5).abs() < 1e-15);
        assert!((m.p_optimal - 0.5).abs() < 1e-15);

        let k = KnapsackInstance::new(vec![4.0, 2.0], vec![3.0, 3.0], 3.0).unwrap();
        let problem = ProblemInstance::Knapsack(k.clone());
        let ground = StateVector::<f64>::basis(2, 0b01).unwrap();
        let m = qaoa_metrics(&ground, &problem).unwrap();
        assert_eq!(m.p_optimal, 1.0);
        let q = knapsack_qubo_unbalanced(&k, 1.0, 1.0).unwrap();
        let s = qaoa_circuit(&q.to_ising().normalized(), &[0.3], &[0.2]).unwrap();
        let m = qaoa_metrics(&s, &problem).unwrap();
        assert!(m.p_optimal <= m.p_valid + 1e-15);
    }

    #[test]
    fn slack_qubits_are_ignored_when_decoding() {
        let k = KnapsackInstance::new(vec![1.0], vec![1.0], 0.0).unwrap();
        let s = StateVector::<f64>::plus(3).unwrap();
        let m = qaoa_metrics(&s, &ProblemInstance::Knapsack(k)).unwrap();
        assert!((m.p_valid - 0.5).abs() < 1e-15);
    }
}
