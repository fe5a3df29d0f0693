//! Dense-matrix reference evaluator shared by the integration tests. It never
//! touches the simulator's gate kernels: every gate is built as a full
//! `2^n x 2^n` matrix exponential of its generator.

#![allow(dead_code)]

use hqrl_core::statesim::{AngleSource, CircuitTemplate, GateKind, Observable};
use num_complex::Complex64 as C;

#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub data: Vec<C>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[[C; 2]; 2]) -> Self {
        Self {
            dim: 2,
            data: vec![rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim + c]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * o.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn kron(&self, o: &Self) -> Self {
        let (a, b) = (self.dim, o.dim);
        let mut out = Self::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * (a * b) + j * b + l] = self.at(i, j) * o.at(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| self.data[i * d + j] * v[j]).sum())
            .collect()
    }

    /// Taylor series with scaling and squaring.
    pub fn expm(&self) -> Self {
        let norm: f64 = self.data.iter().map(|x| x.norm()).sum();
        let mut squarings = 0;
        let mut s = 1.0;
        while norm * s > 0.5 {
            s *= 0.5;
            squarings += 1;
        }
        let a = self.scale(C::new(s, 0.0));
        let mut term = Self::identity(self.dim);
        let mut sum = Self::identity(self.dim);
        for k in 1..30 {
            term = term.mul(&a).scale(C::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

pub fn pauli(c: char) -> Dense {
    let o = C::new(0.0, 0.0);
    let l = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match c {
        'I' => Dense::identity(2),
        'X' => Dense::from_rows(&[[o, l], [l, o]]),
        'Y' => Dense::from_rows(&[[o, -i], [i, o]]),
        'Z' => Dense::from_rows(&[[l, o], [o, -l]]),
        'H' => Dense::from_rows(&[[l, l], [l, -l]]).scale(C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
        _ => unreachable!(),
    }
}

/// Tensor product with `ops[q]` on qubit `q` (little-endian: qubit 0 is the
/// rightmost Kronecker factor).
pub fn embed(n: usize, ops: &[(usize, Dense)]) -> Dense {
    let mut m = Dense::identity(1);
    for q in (0..n).rev() {
        let f = ops
            .iter()
            .find(|(p, _)| *p == q)
            .map(|(_, d)| d.clone())
            .unwrap_or_else(|| pauli('I'));
        m = m.kron(&f);
    }
    m
}

pub fn generator(n: usize, kind: GateKind) -> Dense {
    match kind {
        GateKind::H(q) => embed(n, &[(q, pauli('H'))]),
        GateKind::Rx(q) => embed(n, &[(q, pauli('X'))]),
        GateKind::Ry(q) => embed(n, &[(q, pauli('Y'))]),
        GateKind::Rz(q) => embed(n, &[(q, pauli('Z'))]),
        GateKind::Rzz(a, b) => embed(n, &[(a, pauli('Z')), (b, pauli('Z'))]),
    }
}

/// `exp(-i angle/2 G)`, or the Hadamard itself.
pub fn gate_matrix(n: usize, kind: GateKind, angle: f64) -> Dense {
    let g = generator(n, kind);
    if let GateKind::H(_) = kind {
        return g;
    }
    g.scale(C::new(0.0, -angle / 2.0)).expm()
}

pub fn plus_state(n: usize) -> Vec<C> {
    let d = 1usize << n;
    vec![C::new(1.0 / (d as f64).sqrt(), 0.0); d]
}

pub fn run_dense(t: &CircuitTemplate<f64>, params: &[f64]) -> Vec<C> {
    let n = t.num_qubits();
    let mut v = plus_state(n);
    for g in t.gates() {
        let angle = match g.angle {
            AngleSource::Fixed(a) => a,
            AngleSource::Param { index, scale } => params[index] * scale,
        };
        v = gate_matrix(n, g.kind, angle).apply(&v);
    }
    v
}

pub fn observable_matrix(n: usize, obs: &Observable<f64>) -> Dense {
    let mut m = Dense::zeros(1 << n);
    for t in obs.terms() {
        let ops: Vec<(usize, Dense)> = (0..n)
            .filter_map(|q| {
                let bit = 1usize << q;
                if t.string.x_mask & bit != 0 {
                    Some((q, pauli('X')))
                } else if t.string.z_mask & bit != 0 {
                    Some((q, pauli('Z')))
                } else {
                    None
                }
            })
            .collect();
        m = m.add(&embed(n, &ops).scale(C::new(t.coeff, 0.0)));
    }
    m
}

pub fn dense_expectation(n: usize, v: &[C], obs: &Observable<f64>) -> f64 {
    let m = observable_matrix(n, obs);
    let w = m.apply(v);
    v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<C>().re
}

/// Central finite differences of `<obs>` on the dense evaluator.
pub fn finite_difference(
    t: &CircuitTemplate<f64>,
    params: &[f64],
    obs: &Observable<f64>,
    h: f64,
) -> Vec<f64> {
    let n = t.num_qubits();
    (0..params.len())
        .map(|k| {
            let mut p = params.to_vec();
            p[k] += h;
            let plus = dense_expectation(n, &run_dense(t, &p), obs);
            p[k] -= 2.0 * h;
            let minus = dense_expectation(n, &run_dense(t, &p), obs);
            (plus - minus) / (2.0 * h)
        })
        .collect()
}
