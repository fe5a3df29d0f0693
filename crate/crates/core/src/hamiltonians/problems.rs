use rand::Rng;
use serde::{Deserialize, Serialize};

use super::qubo::{brute_force, IsingHamiltonian, QuboProblem, MAX_BRUTE_FORCE_VARS};
use crate::error::{Error, Result};
use crate::real::Real;

/// Undirected weighted graph with edges stored as `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    #[serde(rename = "n")]
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let g = Self {
            num_nodes,
            edges: edges
                .into_iter()
                .map(|(i, j, w)| (i.min(j), i.max(j), w))
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn complete(num_nodes: usize, weight: impl FnMut(usize, usize) -> f64) -> Self {
        let mut weight = weight;
        let mut edges = Vec::new();
        for i in 0..num_nodes {
            for j in i + 1..num_nodes {
                edges.push((i, j, weight(i, j)));
            }
        }
        Self { num_nodes, edges }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, w) in &self.edges {
            if i >= j {
                return Err(Error::Invalid(format!("edge ({i},{j}) is a self-loop or unordered")));
            }
            if j >= self.num_nodes {
                return Err(Error::Invalid(format!(
                    "edge ({i},{j}) out of range for {} nodes",
                    self.num_nodes
                )));
            }
            if !w.is_finite() {
                return Err(Error::Invalid(format!("edge ({i},{j}) has weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::Invalid(format!("duplicate edge ({i},{j})")));
            }
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weight of edges whose endpoints sit in different sets.
    pub fn cut_value(&self, partition: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| partition[i] != partition[j])
            .map(|e| e.2)
            .sum()
    }

    /// Spin form `sum w_ij (1 - z_i z_j)/2`; identical to [`cut_value`](Self::cut_value).
    pub fn cut_value_spins(&self, z: &[i8]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| w * (1.0 - f64::from(z[i] * z[j])) / 2.0)
            .sum()
    }

    /// Maximization as a QUBO: `value(x) = -cut(x)`.
    pub fn maxcut_qubo<T: Real>(&self) -> QuboProblem<T> {
        let mut q = QuboProblem::new(self.num_nodes);
        for &(i, j, w) in &self.edges {
            let w = T::of(w);
            q.add_linear(i, -w).expect("validated");
            q.add_linear(j, -w).expect("validated");
            q.add_quadratic(i, j, w + w).expect("validated");
        }
        q
    }

    /// Exhaustive maximum cut. Returns the lexicographically smallest optimal
    /// partition and its weight.
    pub fn max_cut(&self) -> Result<(Vec<bool>, f64)> {
        let r = brute_force(&self.maxcut_qubo::<f64>())?;
        Ok((r.assignment, -r.value))
    }
}

/// `J_ij = w_ij`, no fields, no constant. Minimizing the energy maximizes
/// the cut: `cut(z) = (W - E(z)) / 2`.
pub fn maxcut_ising<T: Real>(g: &WeightedGraph) -> IsingHamiltonian<T> {
    let mut h = IsingHamiltonian::new(g.num_nodes);
    for &(i, j, w) in &g.edges {
        h.couplings.insert((i, j), T::of(w));
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub capacity: f64,
}

impl KnapsackInstance {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, capacity: f64) -> Result<Self> {
        let k = Self {
            values,
            weights,
            capacity,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(Error::Invalid(format!(
                "knapsack needs matching non-empty values/weights, got {} and {}",
                self.values.len(),
                self.weights.len()
            )));
        }
        if self.values.iter().chain(&self.weights).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Invalid("knapsack values and weights must be positive".into()));
        }
        if !(self.capacity >= 0.0 && self.capacity.is_finite()) {
            return Err(Error::Invalid(format!("capacity {} must be >= 0", self.capacity)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_value(&self, x: &[bool]) -> f64 {
        x.iter().zip(&self.values).filter(|p| *p.0).map(|p| p.1).sum()
    }

    pub fn total_weight(&self, x: &[bool]) -> f64 {
        x.iter().zip(&self.weights).filter(|p| *p.0).map(|p| p.1).sum()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.total_weight(x) <= self.capacity
    }

    /// Exhaustive optimum: the lexicographically smallest feasible selection
    /// of maximal value, and that value.
    pub fn optimum(&self) -> Result<(Vec<bool>, f64)> {
        let n = self.len();
        if n > MAX_BRUTE_FORCE_VARS {
            return Err(Error::Capacity {
                what: "knapsack items",
                value: n,
                min: 1,
                max: MAX_BRUTE_FORCE_VARS,
            });
        }
        let mut best: Option<(f64, Vec<bool>)> = None;
        for bits in 0..1usize << n {
            let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            if !self.is_feasible(&x) {
                continue;
            }
            let v = self.total_value(&x);
            let better = match &best {
                None => true,
                Some((bv, bx)) => v > *bv || (v == *bv && x < *bx),
            };
            if better {
                best = Some((v, x));
            }
        }
        let (v, x) = best.expect("the empty selection is feasible");
        Ok((x, v))
    }

    /// Number of slack bits `ceil(log2(M + 1))` used by the slack encoding.
    pub fn slack_bits(&self) -> usize {
        let m = self.capacity.floor().max(0.0) as u64;
        (u64::BITS - m.leading_zeros()) as usize
    }
}

/// Knapsack QUBO with unbalanced penalization and no ancillas.
///
/// With `h(x) = M - sum w_i x_i` the value is
/// `-sum v_i x_i + lambda1 (1 - h) + lambda2/2 h^2`.
pub fn knapsack_qubo_unbalanced<T: Real>(
    inst: &KnapsackInstance,
    lambda1: T,
    lambda2: T,
) -> Result<QuboProblem<T>> {
    inst.validate()?;
    if lambda1 < T::zero() || lambda2 < T::zero() {
        return Err(Error::Invalid("penalty weights must be >= 0".into()));
    }
    let n = inst.len();
    let m = T::of(inst.capacity);
    let half = T::of(0.5);
    let mut q = QuboProblem::new(n);
    for i in 0..n {
        let w = T::of(inst.weights[i]);
        let v = T::of(inst.values[i]);
        q.add_linear(i, -v + lambda1 * w + lambda2 * half * (w * w - (m + m) * w))?;
        for j in i + 1..n {
            q.add_quadratic(i, j, lambda2 * w * T::of(inst.weights[j]))?;
        }
    }
    q.offset = lambda1 * (T::one() - m) + lambda2 * half * m * m;
    Ok(q)
}

/// Knapsack QUBO with `K = ceil(log2(M+1))` binary slack variables appended
/// after the item variables:
/// `-sum v_i x_i + penalty (sum w_i x_i + sum 2^k s_k - M)^2`.
///
/// `M = 0` gives `K = 0`, i.e. the equality `sum w_i x_i = 0`.
pub fn knapsack_qubo_slack<T: Real>(
    inst: &KnapsackInstance,
    penalty: T,
) -> Result<QuboProblem<T>> {
    inst.validate()?;
    if penalty <= T::zero() {
        return Err(Error::Invalid("slack penalty must be > 0".into()));
    }
    let n = inst.len();
    let k = inst.slack_bits();
    let coeffs: Vec<T> = inst
        .weights
        .iter()
        .map(|&w| T::of(w))
        .chain((0..k).map(|b| T::of((1u64 << b) as f64)))
        .collect();
    let m = T::of(inst.capacity);
    let two = T::of(2.0);
    let mut q = QuboProblem::new(n + k);
    for (i, &c) in coeffs.iter().enumerate() {
        let mut lin = penalty * (c * c - two * m * c);
        if i < n {
            lin -= T::of(inst.values[i]);
        }
        q.add_linear(i, lin)?;
        for (j, &d) in coeffs.iter().enumerate().skip(i + 1) {
            q.add_quadratic(i, j, penalty * two * c * d)?;
        }
    }
    q.offset = penalty * m * m;
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl Generator {
    /// `A + B p + C p^2`.
    pub fn cost(&self, p: f64) -> f64 {
        self.a + self.b * p + self.c * p * p
    }
}

/// Generator table for the single-period unit commitment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpInstance {
    pub generators: Vec<Generator>,
}

impl UcpInstance {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        let u = Self { generators };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Invalid("unit commitment needs at least one generator".into()));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if !(g.p_min > 0.0 && g.p_min <= g.p_max) || g.c < 0.0 {
                return Err(Error::Invalid(format!(
                    "generator {i}: need 0 < p_min <= p_max and C >= 0, got {g:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Uniform synthetic table: `A in [0,100]`, `B in [0,10]`, `C in [0,0.1]`,
    /// `p_min in [10,50]`, `p_max in [p_min,200]`.
    pub fn synthetic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let generators = (0..n)
            .map(|_| {
                let p_min = rng.gen_range(10.0..=50.0);
                Generator {
                    a: rng.gen_range(0.0..=100.0),
                    b: rng.gen_range(0.0..=10.0),
                    c: rng.gen_range(0.0..=0.1),
                    p_min,
                    p_max: rng.gen_range(p_min..=200.0),
                }
            })
            .collect();
        Self { generators }
    }

    /// `2 max_i cost_i(p_max_i) / min_i p_min_i`: one `p_min` of residual
    /// costs more than running the most expensive unit twice.
    pub fn default_penalty(&self) -> f64 {
        let max_cost = self
            .generators
            .iter()
            .map(|g| g.cost(g.p_max))
            .fold(0.0, f64::max);
        2.0 * max_cost / self.min_p_min()
    }

    pub fn min_p_min(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| g.p_min)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_p_max(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    pub fn sample_powers<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.generators
            .iter()
            .map(|g| {
                if g.p_min < g.p_max {
                    rng.gen_range(g.p_min..=g.p_max)
                } else {
                    g.p_min
                }
            })
            .collect()
    }

    /// Demand uniform in `[min p_min, sum p_max]`.
    pub fn sample_demand<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = self.min_p_min();
        let hi = self.total_p_max();
        if lo < hi {
            rng.gen_range(lo..=hi)
        } else {
            lo
        }
    }

    pub fn generation_cost(&self, powers: &[f64], x: &[bool]) -> f64 {
        self.generators
            .iter()
            .zip(powers)
            .zip(x)
            .filter(|p| *p.1)
            .map(|((g, &p), _)| g.cost(p))
            .sum()
    }

    /// `sum p_i x_i - L`.
    pub fn residual(&self, powers: &[f64], x: &[bool], demand: f64) -> f64 {
        powers
            .iter()
            .zip(x)
            .filter(|p| *p.1)
            .map(|p| p.0)
            .sum::<f64>()
            - demand
    }

    /// Penalized objective `cost + lambda_eq residual^2`.
    pub fn penalized_cost(&self, powers: &[f64], x: &[bool], demand: f64, lambda_eq: f64) -> f64 {
        let r = self.residual(powers, x, demand);
        self.generation_cost(powers, x) + lambda_eq * r * r
    }

    pub fn check_powers(&self, powers: &[f64]) -> Result<()> {
        if powers.len() != self.len() {
            return Err(Error::Dimension {
                what: "generator powers",
                expected: self.len(),
                got: powers.len(),
            });
        }
        for (i, (g, &p)) in self.generators.iter().zip(powers).enumerate() {
            if !(g.p_min..=g.p_max).contains(&p) {
                return Err(Error::Invalid(format!(
                    "power {p} of generator {i} outside [{}, {}]",
                    g.p_min, g.p_max
                )));
            }
        }
        Ok(())
    }
}

/// `sum (A_i + B_i p_i + C_i p_i^2) x_i + lambda_eq (sum p_i x_i - L)^2`,
/// expanded with `x_i^2 = x_i`.
pub fn ucp_qubo<T: Real>(
    inst: &UcpInstance,
    powers: &[f64],
    demand: f64,
    lambda_eq: f64,
) -> Result<QuboProblem<T>> {
    inst.validate()?;
    inst.check_powers(powers)?;
    if demand < 0.0 || !demand.is_finite() {
        return Err(Error::Invalid(format!("demand {demand} must be >= 0")));
    }
    if lambda_eq < 0.0 {
        return Err(Error::Invalid(format!("penalty {lambda_eq} must be >= 0")));
    }
    let n = inst.len();
    let mut q = QuboProblem::new(n);
    for i in 0..n {
        let p = powers[i];
        let lin = inst.generators[i].cost(p) + lambda_eq * (p * p - 2.0 * demand * p);
        q.add_linear(i, T::of(lin))?;
        for j in i + 1..n {
            q.add_quadratic(i, j, T::of(2.0 * lambda_eq * p * powers[j]))?;
        }
    }
    q.offset = T::of(lambda_eq * demand * demand);
    Ok(q)
}

/// A problem instance together with whatever context its objective needs.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    MaxCut(WeightedGraph),
    Ucp {
        instance: UcpInstance,
        powers: Vec<f64>,
        demand: f64,
    },
    Knapsack(KnapsackInstance),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Original objective: cut weight, generation cost, or knapsack value.
    pub objective: f64,
    pub is_valid: bool,
    /// Demand residual `sum p_i x_i - L` (unit commitment only).
    pub residual: Option<f64>,
}

impl ProblemInstance {
    pub fn num_vars(&self) -> usize {
        match self {
            ProblemInstance::MaxCut(g) => g.num_nodes,
            ProblemInstance::Ucp { instance, .. } => instance.len(),
            ProblemInstance::Knapsack(k) => k.len(),
        }
    }
}

/// Evaluates the original (unpenalized) objective of `x`.
pub fn evaluate_problem(problem: &ProblemInstance, x: &[bool]) -> Result<Evaluation> {
    if x.len() != problem.num_vars() {
        return Err(Error::Dimension {
            what: "assignment length",
            expected: problem.num_vars(),
            got: x.len(),
        });
    }
    Ok(match problem {
        ProblemInstance::MaxCut(g) => Evaluation {
            objective: g.cut_value(x),
            is_valid: true,
            residual: None,
        },
        ProblemInstance::Ucp {
            instance,
            powers,
            demand,
        } => {
            let r = instance.residual(powers, x, *demand);
            Evaluation {
                objective: instance.generation_cost(powers, x),
                is_valid: r.abs() <= 1e-9 * demand.abs().max(1.0),
                residual: Some(r),
            }
        }
        ProblemInstance::Knapsack(k) => Evaluation {
            objective: k.total_value(x),
            is_valid: k.is_feasible(x),
            residual: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::qubo::brute_force;

    fn bits(n: usize, b: usize) -> Vec<bool> {
        (0..n).map(|i| b >> i & 1 == 1).collect()
    }

    #[test]
    fn triangle_maxcut() {
        let g = WeightedGraph::complete(3, |_, _| 1.0);
        let h = maxcut_ising::<f64>(&g);
        assert_eq!(h.couplings.len(), 3);
        assert!(h.couplings.values().all(|&v| v == 1.0));
        assert!(h.fields.is_empty() && h.constant == 0.0);
        // enumerate all 8 assignments
        let mut best = 0.0f64;
        for b in 0..8 {
            let c = g.cut_value(&bits(3, b));
            let e = h.energy_index(b);
            assert!((c - (g.total_weight() - e) / 2.0).abs() < 1e-12);
            best = best.max(c);
        }
        assert_eq!(best, 2.0);
        assert_eq!(g.cut_value_spins(&[1, -1, -1]), 2.0);
        assert_eq!(g.max_cut().unwrap().1, 2.0);
    }

    #[test]
    fn single_edge_and_empty_graph() {
        let g = WeightedGraph::new(2, vec![(0, 1, 2.5)]).unwrap();
        let cuts: Vec<f64> = (0..4).map(|b| g.cut_value(&bits(2, b))).collect();
        assert_eq!(cuts, vec![0.0, 2.5, 2.5, 0.0]);
        let empty = WeightedGraph::new(4, vec![]).unwrap();
        assert!((0..16).all(|b| empty.cut_value(&bits(4, b)) == 0.0));
    }

    #[test]
    fn graph_validation() {
        assert!(WeightedGraph::new(3, vec![(1, 1, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![(0, 3, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn ucp_single_generator() {
        let inst = UcpInstance::new(vec![Generator {
            a: 5.0,
            b: 1.0,
            c: 0.0,
            p_min: 1.0,
            p_max: 20.0,
        }])
        .unwrap();
        let q = ucp_qubo::<f64>(&inst, &[10.0], 10.0, 1.0).unwrap();
        assert_eq!(q.value(&[true]), 15.0);
        assert_eq!(q.value(&[false]), 100.0);
        assert_eq!(brute_force(&q).unwrap().assignment, vec![true]);
        assert!(ucp_qubo::<f64>(&inst, &[10.0], -1.0, 1.0).is_err());
        assert!(ucp_qubo::<f64>(&inst, &[30.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn ucp_without_penalty_prefers_all_off() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let inst = UcpInstance::synthetic(5, &mut rng);
        let p = inst.sample_powers(&mut rng);
        let q = ucp_qubo::<f64>(&inst, &p, 300.0, 0.0).unwrap();
        assert_eq!(brute_force(&q).unwrap().bits, 0);
    }

    #[test]
    fn ucp_two_identical_generators() {
        let g = Generator {
            a: 1.0,
            b: 1.0,
            c: 0.01,
            p_min: 1.0,
            p_max: 10.0,
        };
        let inst = UcpInstance::new(vec![g, g]).unwrap();
        let q = ucp_qubo::<f64>(&inst, &[5.0, 5.0], 5.0, 100.0).unwrap();
        let values: Vec<f64> = (0..4).map(|b| q.value_index(b)).collect();
        // exactly one generator on: cost 6.25, no residual
        assert_eq!(values[0b01], 6.25);
        assert_eq!(values[0b10], 6.25);
        assert_eq!(values[0b00], 2500.0);
        assert_eq!(values[0b11], 12.5 + 2500.0);
        assert_eq!(brute_force(&q).unwrap().assignment, vec![false, true]);
    }

    #[test]
    fn unbalanced_hand_values() {
        let k = KnapsackInstance::new(vec![1.0], vec![1.0], 0.0).unwrap();
        let q = knapsack_qubo_unbalanced(&k, 1.0, 1.0).unwrap();
        assert_eq!(q.n, 1);
        assert_eq!(q.value(&[false]), 1.0);
        assert_eq!(q.value(&[true]), 1.5);
        assert_eq!(brute_force(&q).unwrap().assignment, vec![false]);
    }

    #[test]
    fn unbalanced_without_penalty_takes_everything() {
        let k = KnapsackInstance::new(vec![3.0, 1.0, 2.0], vec![5.0, 5.0, 5.0], 4.0).unwrap();
        let q = knapsack_qubo_unbalanced(&k, 0.0, 0.0).unwrap();
        assert_eq!(brute_force(&q).unwrap().assignment, vec![true; 3]);
    }

    #[test]
    fn slack_bits_and_hand_optimum() {
        let k = KnapsackInstance::new(vec![1.0], vec![1.0], 7.0).unwrap();
        assert_eq!(k.slack_bits(), 3);
        assert_eq!(knapsack_qubo_slack(&k, 5.0).unwrap().n, 4);
        let zero = KnapsackInstance::new(vec![1.0], vec![1.0], 0.0).unwrap();
        assert_eq!(zero.slack_bits(), 0);

        let k = KnapsackInstance::new(vec![3.0, 1.0], vec![2.0, 2.0], 2.0).unwrap();
        let q = knapsack_qubo_slack(&k, 10.0).unwrap();
        assert_eq!(q.n, 4);
        // enumerate all 16 (x, s)
        let mut best = (f64::INFINITY, 0usize);
        for b in 0..16 {
            let x = bits(4, b);
            let s = (x[2] as u32 + 2 * x[3] as u32) as f64;
            let load = 2.0 * x[0] as u8 as f64 + 2.0 * x[1] as u8 as f64;
            let v = -(3.0 * x[0] as u8 as f64 + x[1] as u8 as f64) + 10.0 * (load + s - 2.0).powi(2);
            assert!((q.value_index(b) - v).abs() < 1e-9);
            if v < best.0 {
                best = (v, b);
            }
        }
        let r = brute_force(&q).unwrap();
        assert_eq!(r.value, -3.0);
        assert_eq!(&r.assignment[..2], &[true, false]);
        assert_eq!(r.bits, best.1);
    }

    #[test]
    fn evaluate_knapsack() {
        let k = KnapsackInstance::new(vec![4.0, 2.0], vec![3.0, 3.0], 3.0).unwrap();
        let p = ProblemInstance::Knapsack(k);
        let e = evaluate_problem(&p, &[true, false]).unwrap();
        assert_eq!((e.objective, e.is_valid), (4.0, true));
        let e = evaluate_problem(&p, &[false, false]).unwrap();
        assert_eq!((e.objective, e.is_valid), (0.0, true));
        let e = evaluate_problem(&p, &[true, true]).unwrap();
        assert_eq!((e.objective, e.is_valid), (6.0, false));
        assert!(evaluate_problem(&p, &[true]).is_err());
    }

    #[test]
    fn evaluate_ucp_reports_residual() {
        let g = Generator {
            a: 5.0,
            b: 1.0,
            c: 0.0,
            p_min: 1.0,
            p_max: 20.0,
        };
        let p = ProblemInstance::Ucp {
            instance: UcpInstance::new(vec![g]).unwrap(),
            powers: vec![10.0],
            demand: 10.0,
        };
        let e = evaluate_problem(&p, &[true]).unwrap();
        assert_eq!(e.objective, 15.0);
        assert!(e.is_valid);
        let e = evaluate_problem(&p, &[false]).unwrap();
        assert_eq!(e.residual, Some(-10.0));
        assert!(!e.is_valid);
    }

    use rand::SeedableRng;
}
