mod common;

use common::*;
use hqrl_core::ansatz::{build, layer_param, AnsatzKind, Annotations};
use hqrl_core::bench::{complete_unit_hamiltonian, gradient_samples, task_rng, variance_with_error};
use hqrl_core::hamiltonians::{
    brute_force, knapsack_qubo_slack, maxcut_ising, IsingHamiltonian, KnapsackInstance,
    QuboProblem, WeightedGraph,
};
use hqrl_core::statesim::{gradient, run_circuit, CircuitTemplate, Gate, GateKind, Observable, StateVector};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: &[C], b: &[C], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

fn triangle() -> IsingHamiltonian<f64> {
    maxcut_ising(&WeightedGraph::complete(3, |_, _| 1.0))
}

fn random_ising(n: usize, rng: &mut ChaCha8Rng) -> IsingHamiltonian<f64> {
    let mut h = IsingHamiltonian::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                h.set_coupling(i, j, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
        if rng.gen_bool(0.5) {
            h.set_field(i, rng.gen_range(-1.0..1.0)).unwrap();
        }
    }
    h
}

#[test]
fn rzz_then_x_matches_matrix_exponential() {
    let mut s = StateVector::<f64>::plus(2).unwrap();
    s.apply(&Gate::rzz(0, 1, 0.7)).unwrap();
    let dense = gate_matrix(2, GateKind::Rzz(0, 1), 0.7).apply(&plus_state(2));
    assert!(close(s.amplitudes(), &dense, 1e-12));
    let x0 = Observable::x(0);
    let got = s.expectation(&x0).unwrap();
    let want = dense_expectation(2, &dense, &x0);
    assert!((got - want).abs() < 1e-12);
    // analytically cos(0.7)
    assert!((got - 0.7f64.cos()).abs() < 1e-12);
}

#[test]
fn sge_sgv_triangle_matches_dense_product() {
    let t = build(AnsatzKind::SgeSgv, &triangle(), None, 1).unwrap();
    let params = [0.3, 0.9];
    let s = run_circuit(&t, &params).unwrap();
    // explicit product, independent of the template's gate list
    let mut v = plus_state(3);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        v = gate_matrix(3, GateKind::Rzz(i, j), 0.3).apply(&v);
    }
    for q in 0..3 {
        v = gate_matrix(3, GateKind::Rx(q), 0.9).apply(&v);
    }
    assert!(close(s.amplitudes(), &v, 1e-12));
}

#[test]
fn every_gate_matches_dense_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 3;
    for _ in 0..40 {
        let amps: Vec<C> = (0..1 << n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<C> = amps.iter().map(|a| a / norm).collect();
        let a = rng.gen_range(-4.0..4.0);
        let q = rng.gen_range(0..n);
        let r = (q + rng.gen_range(1..n)) % n;
        for gate in [
            Gate::h(q),
            Gate::rx(q, a),
            Gate::ry(q, a),
            Gate::rz(q, a),
            Gate::rzz(q, r, a),
        ] {
            let mut s = StateVector::from_amplitudes(amps.clone()).unwrap();
            s.apply(&gate).unwrap();
            let want = gate_matrix(n, gate.kind, gate.angle).apply(&amps);
            assert!(close(s.amplitudes(), &want, 1e-10), "{:?}", gate.kind);
        }
    }
}

#[test]
fn gradients_match_finite_differences_for_all_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=4 {
        let ham = random_ising(n, &mut rng).normalized();
        let obs = ham.to_observable(false);
        for kind in AnsatzKind::ALL {
            let t = build(kind, &ham, None, 2).unwrap();
            let params: Vec<f64> = (0..t.param_count())
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect();
            let g = gradient(&t, &params, &obs).unwrap();
            let fd = finite_difference(&t, &params, &obs, 1e-5);
            for (a, b) in g.iter().zip(&fd) {
                let ok = (a - b).abs() < 1e-8 || (a - b).abs() / b.abs().max(1e-12) < 1e-5;
                assert!(ok, "{kind:?} n={n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn shared_parameter_gradient_sums_gate_contributions() {
    // one parameter driving RY on both qubits with different scales
    let mut t = CircuitTemplate::<f64>::new(2);
    let p = t.new_param();
    t.push(hqrl_core::statesim::BoundGate::param(GateKind::Ry(0), p, 1.0)).unwrap();
    t.push(hqrl_core::statesim::BoundGate::param(GateKind::Ry(1), p, -2.5)).unwrap();
    let obs = Observable::z(0).with_term(0.5, &[(1, hqrl_core::statesim::Pauli::Z)]).unwrap();
    let g = gradient(&t, &[0.37], &obs).unwrap();
    let fd = finite_difference(&t, &[0.37], &obs, 1e-6);
    assert!((g[0] - fd[0]).abs() < 1e-8);
}

#[test]
fn gradient_variance_agrees_with_finite_difference_estimate() {
    let (n, layers, k) = (2, 5, 2000);
    let ham = complete_unit_hamiltonian(n);
    let t = build(AnsatzKind::SgeSgv, &ham, None, layers).unwrap();
    let slot = layer_param(&t, 3, 2).unwrap();
    let obs = ham.to_observable(false);
    let seed = 77;
    let fd: Vec<f64> = (0..k)
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let pi = std::f64::consts::PI;
            let params: Vec<f64> = (0..t.param_count()).map(|_| rng.gen_range(-pi..=pi)).collect();
            let h = 1e-5;
            let mut p = params.clone();
            p[slot] += h;
            let a = dense_expectation(n, &run_dense(&t, &p), &obs);
            p[slot] -= 2.0 * h;
            let b = dense_expectation(n, &run_dense(&t, &p), &obs);
            (a - b) / (2.0 * h)
        })
        .collect();
    let adj = gradient_samples(AnsatzKind::SgeSgv, n, layers, k, seed).unwrap();
    let va = variance_with_error(&adj).unwrap();
    let vf = variance_with_error(&fd).unwrap();
    assert!((va.variance - vf.variance).abs() <= 3.0 * va.std_error);
    assert!((va.variance - vf.variance).abs() < 1e-6);
}

#[test]
fn knapsack_slack_minimum_is_feasible_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let m = rng.gen_range(3..=5);
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=10) as f64).collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=10) as f64).collect();
        let cap = (weights.iter().sum::<f64>() / 2.0).floor().max(1.0);
        let inst = KnapsackInstance::new(values.clone(), weights, cap).unwrap();
        let penalty = values.iter().sum::<f64>() + 1.0;
        let q: QuboProblem<f64> = knapsack_qubo_slack(&inst, penalty).unwrap();
        let best = brute_force(&q).unwrap();
        let x = &best.assignment[..m];
        let (_, opt) = inst.optimum().unwrap();
        assert!(inst.is_feasible(x));
        assert_eq!(inst.total_value(x), opt);
        assert!((best.value + opt).abs() < 1e-9);
    }
}

#[test]
fn frozen_qubits_leave_marginals_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 4;
    let ham = random_ising(n, &mut rng).normalized();
    let mut ann = Annotations::all_free(n);
    ann.assign(1);
    ann.assign(3);
    for kind in AnsatzKind::ALL {
        let t = build(kind, &ham, Some(&ann), 3).unwrap();
        let params: Vec<f64> = (0..t.param_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s = run_circuit(&t, &params).unwrap();
        for q in [1, 3] {
            // only diagonal gates act on a frozen qubit, so its Z marginal
            // stays uniform
            let z = s.expectation(&Observable::z(q)).unwrap();
            assert!(z.abs() < 1e-10, "{kind:?} q={q} <Z>={z}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_preserved(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let mut s = StateVector::<f64>::plus(n).unwrap();
        for _ in 0..1000 {
            let q = rng.gen_range(0..n);
            let r = (q + rng.gen_range(1..n)) % n;
            let a = rng.gen_range(-10.0..10.0);
            let g = match rng.gen_range(0..5) {
                0 => Gate::h(q),
                1 => Gate::rx(q, a),
                2 => Gate::ry(q, a),
                3 => Gate::rz(q, a),
                _ => Gate::rzz(q, r, a),
            };
            s.apply(&g).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ising_diagonal_matches_qubo(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = QuboProblem::<f64>::new(n);
        for i in 0..n {
            q.add_linear(i, rng.gen_range(-5.0..5.0)).unwrap();
            for j in i + 1..n {
                q.add_quadratic(i, j, rng.gen_range(-5.0..5.0)).unwrap();
            }
        }
        let h = q.to_ising();
        let diag = h.diagonal().unwrap();
        let obs = h.to_observable(true);
        for b in 0..1usize << n {
            prop_assert!((diag[b] - q.value_index(b)).abs() < 1e-9);
            let s = StateVector::<f64>::basis(n, b).unwrap();
            prop_assert!((s.expectation(&obs).unwrap() - q.value_index(b)).abs() < 1e-9);
        }
    }

    #[test]
    fn cut_is_flip_invariant(seed in any::<u64>(), n in 2usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = WeightedGraph::complete(n, |_, _| rng.gen_range(0.0..1.0));
        let z: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let flipped: Vec<i8> = z.iter().map(|v| -v).collect();
        prop_assert!((g.cut_value_spins(&z) - g.cut_value_spins(&flipped)).abs() < 1e-12);
        let x: Vec<bool> = z.iter().map(|&v| v < 0).collect();
        prop_assert!((g.cut_value(&x) - g.cut_value_spins(&z)).abs() < 1e-12);
    }
}
