use num_complex::Complex;
use rand::Rng;

use super::gate::{Gate, GateKind};
use super::observable::Observable;
use crate::error::{Error, Result};
use crate::real::Real;

/// Largest register the simulator accepts (16 MiB of amplitudes at `f64`).
pub const MAX_QUBITS: usize = 20;

/// `2^n` complex amplitudes, little-endian qubit order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

fn check_capacity(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Capacity {
            what: "qubits",
            value: n,
            min: 1,
            max: MAX_QUBITS,
        })
    }
}

/// `H^n |0...0>`: every amplitude equals `2^(-n/2)`.
pub fn init_plus_state<T: Real>(n: usize) -> Result<StateVector<T>> {
    StateVector::plus(n)
}

/// Formats a basis index as a bitstring with qubit 0 first.
pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl<T: Real> StateVector<T> {
    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Dimension {
                what: "basis index bound",
                expected: dim,
                got: index,
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self { num_qubits: n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn plus(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        let a = T::one() / T::of(dim as f64).sqrt();
        Ok(Self {
            num_qubits: n,
            amps: vec![Complex::new(a, T::zero()); dim],
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the norm is
    /// not checked.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Invalid(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        Ok(Self { num_qubits: n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate<T>) -> Result<()> {
        gate.kind.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Applies the inverse of `gate` in place.
    pub fn apply_inverse(&mut self, gate: &Gate<T>) -> Result<()> {
        self.apply(&gate.inverse())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate<T>) {
        let half = gate.angle * T::of(0.5);
        match gate.kind {
            GateKind::H(q) => {
                let r = T::FRAC_1_SQRT_2();
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * r;
                    *b = (x - y) * r;
                });
            }
            GateKind::Rx(q) => {
                let (s, c) = half.sin_cos();
                let mis = Complex::new(T::zero(), -s);
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * mis;
                    *b = x * mis + y * c;
                });
            }
            GateKind::Ry(q) => {
                let (s, c) = half.sin_cos();
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * s;
                    *b = x * s + y * c;
                });
            }
            GateKind::Rz(q) => {
                let (s, c) = half.sin_cos();
                let lo = Complex::new(c, -s);
                let hi = Complex::new(c, s);
                self.for_pairs(q, |a, b| {
                    *a *= lo;
                    *b *= hi;
                });
            }
            GateKind::Rzz(q1, q2) => {
                let (s, c) = half.sin_cos();
                let even = Complex::new(c, -s);
                let odd = Complex::new(c, s);
                let mask = (1usize << q1) | (1usize << q2);
                for (b, amp) in self.amps.iter_mut().enumerate() {
                    if (b & mask).count_ones() & 1 == 0 {
                        *amp *= even;
                    } else {
                        *amp *= odd;
                    }
                }
            }
        }
    }

    /// Visits every amplitude pair `(|..0_q..>, |..1_q..>)`.
    #[inline]
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex<T>, &mut Complex<T>)) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a, b);
            }
        }
    }

    /// `Im <lambda| G |self>` where `G` is the Pauli generator of `kind`.
    /// This is the derivative of `<O>` with respect to the gate angle when
    /// `lambda` is the back-propagated `O|psi>`.
    pub(crate) fn generator_overlap(&self, lambda: &Self, kind: GateKind) -> T {
        let phi = &self.amps;
        let lam = &lambda.amps;
        let mut acc = Complex::new(T::zero(), T::zero());
        match kind {
            GateKind::H(_) => return T::zero(),
            GateKind::Rx(q) => {
                let stride = 1usize << q;
                for base in (0..phi.len()).step_by(stride << 1) {
                    for j in base..base + stride {
                        let k = j + stride;
                        acc = acc + lam[j].conj() * phi[k] + lam[k].conj() * phi[j];
                    }
                }
            }
            GateKind::Ry(q) => {
                // Y|0> = i|1>, Y|1> = -i|0>
                let stride = 1usize << q;
                let i = Complex::new(T::zero(), T::one());
                for base in (0..phi.len()).step_by(stride << 1) {
                    for j in base..base + stride {
                        let k = j + stride;
                        acc = acc + lam[j].conj() * (-i * phi[k]) + lam[k].conj() * (i * phi[j]);
                    }
                }
            }
            GateKind::Rz(q) => {
                for (b, (l, p)) in lam.iter().zip(phi).enumerate() {
                    let v = l.conj() * p;
                    acc = if b >> q & 1 == 0 { acc + v } else { acc - v };
                }
            }
            GateKind::Rzz(q1, q2) => {
                let mask = (1usize << q1) | (1usize << q2);
                for (b, (l, p)) in lam.iter().zip(phi).enumerate() {
                    let v = l.conj() * p;
                    acc = if (b & mask).count_ones() & 1 == 0 {
                        acc + v
                    } else {
                        acc - v
                    };
                }
            }
        }
        acc.im
    }

    /// `sum_k c_k <psi|P_k|psi>`.
    pub fn expectation(&self, obs: &Observable<T>) -> Result<T> {
        obs.validate(self.num_qubits)?;
        let mut total = Complex::new(T::zero(), T::zero());
        for term in obs.terms() {
            total += self.pauli_expectation(term.string.x_mask, term.string.z_mask) * term.coeff;
        }
        let scale = obs.coefficient_l1().max(T::one());
        let tol = T::of(1e-10).max(T::epsilon() * T::of(1e3)) * scale;
        debug_assert!(
            total.im.abs() <= tol,
            "expectation has imaginary part {}",
            total.im
        );
        Ok(total.re)
    }

    pub(crate) fn pauli_expectation(&self, x_mask: usize, z_mask: usize) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (b, a) in self.amps.iter().enumerate() {
            let v = self.amps[b ^ x_mask].conj() * a;
            acc = if (b & z_mask).count_ones() & 1 == 0 {
                acc + v
            } else {
                acc - v
            };
        }
        acc
    }

    /// `obs |self>` (not normalized).
    pub fn apply_observable(&self, obs: &Observable<T>) -> Result<Self> {
        obs.validate(self.num_qubits)?;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        for term in obs.terms() {
            let (x, z) = (term.string.x_mask, term.string.z_mask);
            for (b, a) in self.amps.iter().enumerate() {
                let v = *a * term.coeff;
                let t = &mut out[b ^ x];
                *t = if (b & z).count_ones() & 1 == 0 { *t + v } else { *t - v };
            }
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amps: out,
        })
    }

    /// Draws `shots` basis indices with Born probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<usize> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr().to_f64_lossy();
            cdf.push(acc);
        }
        let total = acc;
        (0..shots)
            .map(|_| {
                let u = rng.gen::<f64>() * total;
                cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
            })
            .collect()
    }

    /// Like [`sample`](Self::sample) but formatted as bitstrings.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<String> {
        self.sample(shots, rng)
            .into_iter()
            .map(|i| bitstring(i, self.num_qubits))
            .collect()
    }
}
