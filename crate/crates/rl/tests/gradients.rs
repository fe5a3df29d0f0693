#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::sync::Arc;

use hqrl_core::ansatz::{build, AnsatzKind};
use hqrl_core::hamiltonians::{maxcut_ising, IsingHamiltonian, WeightedGraph};
use hqrl_rl::agents::*;
use hqrl_rl::envs::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    WeightedGraph::complete(n, |_, _| 1.0 - rng.gen::<f64>())
}

fn free_obs(n: usize) -> Observation {
    Observation {
        instance: 0,
        assigned: Some(vec![false; n]),
        mask: vec![true; n],
        context: None,
    }
}

#[test]
fn heads_match_dense_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_graph(4, &mut rng);
    let ham = maxcut_ising::<f64>(&g).normalized();
    let mut obs = free_obs(4);
    obs.assigned = Some(vec![false, true, false, true]);
    obs.mask = vec![true, false, true, false];
    for kind in AnsatzKind::ALL {
        for head in [HeadKind::NodeX, HeadKind::EdgeZz, HeadKind::ItemZ] {
            let model = Model::new(kind, 2, head);
            let params: Vec<f64> = (0..model.param_count(&ham)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fwd = model.forward(&params, &ham, &obs).unwrap();
            let t = build(kind, &model.align(&ham), obs.annotations().as_ref(), 2).unwrap();
            let v = common::run_dense(&t, &params);
            for (o, got) in fwd.observables.iter().zip(&fwd.values) {
                let want = common::dense_expectation(4, &v, o);
                assert!((want - got).abs() < 1e-10, "{kind:?} {head:?}: {want} vs {got}");
            }
        }
    }
}

#[test]
fn weighted_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ham = maxcut_ising::<f64>(&random_graph(4, &mut rng)).normalized();
    let mut obs = free_obs(4);
    obs.assigned = Some(vec![true, false, false, false]);
    obs.mask = vec![false, true, true, true];
    let model = Model::new(AnsatzKind::SgeSgv, 3, HeadKind::EdgeZz);
    let params: Vec<f64> = (0..model.param_count(&ham)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let coeffs = [0.4, -1.3, 0.0, 2.1];
    let f = |p: &[f64]| -> f64 {
        let v = model.values(p, &ham, &obs).unwrap();
        v.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
    };
    let fwd = model.forward(&params, &ham, &obs).unwrap();
    let g = model.weighted_gradient(&fwd, &params, &coeffs).unwrap();
    let h = 1e-6;
    for i in 0..params.len() {
        let mut p = params.clone();
        p[i] += h;
        let up = f(&p);
        p[i] -= 2.0 * h;
        let fd = (up - f(&p)) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-7, "param {i}: {fd} vs {}", g[i]);
    }
}

/// Expected return `sum_x pi(x) r(x)` of a one-step problem and the
/// enumerated expectation of the score-function estimator.
#[test]
fn bandit_policy_gradient_matches_enumeration() {
    let mut ham = IsingHamiltonian::new(2);
    ham.set_coupling(0, 1, 0.7).unwrap();
    ham.set_field(0, -0.4).unwrap();
    ham.set_field(1, 1.0).unwrap();
    let obs = Observation {
        instance: 0,
        assigned: None,
        mask: vec![true, true],
        context: None,
    };
    let reward = |a: &Action| match a {
        Action::Bits(x) => [1.5, -0.5][usize::from(x[0])] + [0.0, 2.0][usize::from(x[1])] - 1.0 * f64::from(u8::from(x[0] && x[1])),
        Action::Index(i) => [0.3, 1.1][*i],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (head, actions) in [
        (HeadKind::BernoulliZ, (0..4).map(|b| Action::Bits(vec![b & 1 == 1, b & 2 == 2])).collect::<Vec<_>>()),
        (HeadKind::ItemZ, vec![Action::Index(0), Action::Index(1)]),
    ] {
        let cfg = QpgConfig {
            model: Model::new(AnsatzKind::SgeSgv, 2, head),
            scaling: ScalingMode::PerObservable,
            ..QpgConfig::default()
        };
        let count = cfg.model.param_count(&ham);
        let mut agent = QpgAgent::new(cfg, count, 2, &mut rng);
        agent.scaling = vec![1.3, -0.6];
        let beta = 1.7;
        let expected = |params: &[f64], scaling: &[f64]| -> f64 {
            let p = qpg_policy(&agent.config, params, scaling, beta, &ham, &obs).unwrap();
            actions.iter().map(|a| p.log_prob(a).unwrap().exp() * reward(a)).sum()
        };
        let policy = agent.policy(&ham, &obs, beta).unwrap();
        let total: f64 = actions.iter().map(|a| policy.log_prob(a).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let fwd = agent.config.model.forward(&agent.params, &ham, &obs).unwrap();
        let mut gc = vec![0.0; agent.params.len()];
        let mut gs = vec![0.0; 2];
        for a in &actions {
            let w = policy.log_prob(a).unwrap().exp() * reward(a);
            let (c, s) = agent.log_prob_gradient(&fwd, &obs, a, beta).unwrap();
            gc.iter_mut().zip(&c).for_each(|(x, y)| *x += w * y);
            gs.iter_mut().zip(&s).for_each(|(x, y)| *x += w * y);
        }
        let h = 1e-6;
        for i in 0..gc.len() {
            let mut p = agent.params.clone();
            p[i] += h;
            let up = expected(&p, &agent.scaling);
            p[i] -= 2.0 * h;
            let fd = (up - expected(&p, &agent.scaling)) / (2.0 * h);
            assert!((fd - gc[i]).abs() < 1e-7, "{head:?} param {i}: {fd} vs {}", gc[i]);
        }
        for i in 0..2 {
            let mut s = agent.scaling.clone();
            s[i] += h;
            let up = expected(&agent.params, &s);
            s[i] -= 2.0 * h;
            let fd = (up - expected(&agent.params, &s)) / (2.0 * h);
            assert!((fd - gs[i]).abs() < 1e-7, "{head:?} scaling {i}: {fd} vs {}", gs[i]);
        }
        agent.params.iter_mut().for_each(|p| *p += 0.1);
    }
}

/// Every trajectory of a 3-node MaxCut episode with its probability.
fn enumerate(env: &MaxCutEnv, agent: &QpgAgent, beta: f64, prob: f64, steps: Vec<TrajectoryStep>, out: &mut Vec<(f64, Trajectory)>) {
    let obs = env.observation().unwrap();
    let ham = env.hamiltonian(&obs).unwrap();
    let policy = agent.policy(&ham, &obs, beta).unwrap();
    for a in obs.available() {
        let action = Action::Index(a);
        let p = policy.log_prob(&action).unwrap().exp();
        let mut next = env.clone();
        let r = next.step(&action).unwrap();
        let mut s = steps.clone();
        s.push(TrajectoryStep { obs: obs.clone(), action, reward: r.reward, beta });
        if r.done {
            out.push((prob * p, Trajectory { steps: s, complete: true }));
        } else {
            enumerate(&next, agent, beta, prob * p, s, out);
        }
    }
}

#[test]
fn episodic_policy_gradient_is_the_exact_gradient_in_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = Arc::new(MaxCutData::new(vec![random_graph(3, &mut rng)]).unwrap());
    let cfg = QpgConfig {
        model: Model::new(AnsatzKind::SgeSgv, 2, HeadKind::NodeX),
        gamma: 1.0,
        baseline_decay: None,
        scaling: ScalingMode::Global,
        ..QpgConfig::default()
    };
    let mut env = MaxCutEnv::new(data.clone());
    env.reset_to(0).unwrap();
    let count = cfg.model.param_count(&data.hams[0]);
    let mut agent = QpgAgent::new(cfg, count, 3, &mut rng);
    agent.params.iter_mut().for_each(|p| *p *= 8.0);
    agent.scaling = vec![1.4];
    let beta = 2.0;
    let expected_return = |agent: &QpgAgent| -> f64 {
        let mut all = Vec::new();
        enumerate(&env, agent, beta, 1.0, Vec::new(), &mut all);
        all.iter().map(|(p, t)| p * t.returns(1.0)[0]).sum()
    };
    let mut all = Vec::new();
    enumerate(&env, &agent, beta, 1.0, Vec::new(), &mut all);
    assert!((all.iter().map(|x| x.0).sum::<f64>() - 1.0).abs() < 1e-12);
    let mut gc = vec![0.0; count];
    let mut gs = 0.0;
    for (p, t) in &all {
        let (c, s, _) = agent.policy_gradient(std::slice::from_ref(t), &env).unwrap();
        gc.iter_mut().zip(&c).for_each(|(x, y)| *x += p * y);
        gs += p * s[0];
    }
    let h = 1e-6;
    for i in 0..count {
        let mut a = agent.clone();
        a.params[i] += h;
        let up = expected_return(&a);
        a.params[i] -= 2.0 * h;
        let fd = (up - expected_return(&a)) / (2.0 * h);
        assert!((fd - gc[i]).abs() < 1e-7, "param {i}: {fd} vs {}", gc[i]);
    }
    let mut a = agent.clone();
    a.scaling[0] += h;
    let up = expected_return(&a);
    a.scaling[0] -= 2.0 * h;
    let fd = (up - expected_return(&a)) / (2.0 * h);
    assert!((fd - gs).abs() < 1e-7, "scaling: {fd} vs {gs}");
}

fn random_transitions(env: &mut MaxCutEnv, count: usize, rng: &mut ChaCha8Rng) -> Vec<Transition> {
    let mut out = Vec::new();
    let mut obs = env.reset(rng).unwrap();
    while out.len() < count {
        if env.is_done() {
            obs = env.reset(rng).unwrap();
            continue;
        }
        let avail: Vec<usize> = obs.available().collect();
        let a = avail[rng.gen_range(0..avail.len())];
        let r = env.step(&Action::Index(a)).unwrap();
        out.push(Transition { obs, action: a, reward: r.reward, next_obs: r.observation.clone(), done: r.done });
        obs = r.observation;
    }
    out
}

#[test]
fn td_loss_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graphs = (0..3).map(|_| random_graph(4, &mut rng)).collect();
    let data = Arc::new(MaxCutData::new(graphs).unwrap());
    let mut env = MaxCutEnv::new(data.clone());
    let batch = random_transitions(&mut env, 12, &mut rng);
    let refs: Vec<&Transition> = batch.iter().collect();
    let cfg = QdqnConfig {
        model: Model::new(AnsatzKind::SgeSgv, 3, HeadKind::NodeX),
        ..QdqnConfig::default()
    };
    let count = cfg.model.param_count(&data.hams[0]);
    let mut agent = QdqnAgent::new(cfg, count, &mut rng);
    agent.target = agent.params.iter().map(|p| p + 0.3).collect();
    let (loss, grad) = agent.loss_and_gradient(&refs, &env).unwrap();
    let loss_at = |p: &[f64]| {
        let mut a = agent.clone();
        a.params = p.to_vec();
        a.loss_and_gradient(&refs, &env).unwrap().0
    };
    assert!((loss_at(&agent.params) - loss).abs() < 1e-15);
    let h = 1e-6;
    for i in 0..count {
        let mut p = agent.params.clone();
        p[i] += h;
        let up = loss_at(&p);
        p[i] -= 2.0 * h;
        let fd = (up - loss_at(&p)) / (2.0 * h);
        assert!((fd - grad[i]).abs() < 1e-7, "param {i}: {fd} vs {}", grad[i]);
    }
}

#[test]
fn target_network_changes_only_on_sync() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data = Arc::new(MaxCutData::new(vec![random_graph(4, &mut rng)]).unwrap());
    let mut env = MaxCutEnv::new(data.clone());
    let batch = random_transitions(&mut env, 8, &mut rng);
    let refs: Vec<&Transition> = batch.iter().collect();
    let cfg = QdqnConfig {
        target_sync: 3,
        ..QdqnConfig::default()
    };
    let count = cfg.model.param_count(&data.hams[0]);
    let mut agent = QdqnAgent::new(cfg, count, &mut rng);
    let frozen = agent.target.clone();
    for _ in 0..2 {
        agent.update(&refs, &env).unwrap();
        assert_eq!(agent.target, frozen);
        assert_ne!(agent.params, frozen);
    }
    agent.update(&refs, &env).unwrap();
    assert_eq!(agent.target, agent.params);
}
