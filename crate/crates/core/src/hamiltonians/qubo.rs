use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::statesim::{Observable, Pauli, PauliString};

/// Largest variable count accepted by the exhaustive oracles.
pub const MAX_BRUTE_FORCE_VARS: usize = 22;

/// JSON objects cannot have tuple keys; pair-indexed maps go out as
/// `[[i, j, value], ...]`.
mod pair_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize, S: Serializer>(
        map: &BTreeMap<(usize, usize), T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(&(i, j), v)| (i, j, v)))
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, usize), T>, D::Error> {
        let items: Vec<(usize, usize, T)> = Vec::deserialize(d)?;
        Ok(items.into_iter().map(|(i, j, v)| ((i, j), v)).collect())
    }
}

/// `value(x) = sum q_ij x_i x_j + sum l_i x_i + offset` over `x in {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem<T> {
    pub n: usize,
    #[serde(with = "pair_map")]
    pub quadratic: BTreeMap<(usize, usize), T>,
    pub linear: BTreeMap<usize, T>,
    pub offset: T,
}

impl<T: Real> QuboProblem<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            quadratic: BTreeMap::new(),
            linear: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    /// Adds `v x_i x_j`. A diagonal term folds into the linear part (`x^2 = x`).
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return self.add_linear(i, v);
        }
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert_with(T::zero) += v;
        Ok(())
    }

    pub fn add_linear(&mut self, i: usize, v: T) -> Result<()> {
        self.check_index(i)?;
        *self.linear.entry(i).or_insert_with(T::zero) += v;
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::Dimension {
                what: "qubo variable bound",
                expected: self.n,
                got: i,
            })
        }
    }

    pub fn value(&self, x: &[bool]) -> T {
        debug_assert_eq!(x.len(), self.n);
        self.value_bits(|i| x[i])
    }

    /// Value of the assignment encoded in `bits` (bit `i` is `x_i`).
    pub fn value_index(&self, bits: usize) -> T {
        self.value_bits(|i| bits >> i & 1 == 1)
    }

    fn value_bits(&self, x: impl Fn(usize) -> bool) -> T {
        let mut v = self.offset;
        for (&i, &l) in &self.linear {
            if x(i) {
                v += l;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x(i) && x(j) {
                v += q;
            }
        }
        v
    }

    /// Values of all `2^n` assignments indexed by bit pattern.
    pub fn all_values(&self) -> Result<Vec<T>> {
        check_brute_force(self.n)?;
        Ok((0..1usize << self.n)
            .into_par_iter()
            .map(|b| self.value_index(b))
            .collect())
    }

    /// Substitutes `x_i = (1 - z_i)/2`.
    pub fn to_ising(&self) -> IsingHamiltonian<T> {
        let quarter = T::of(0.25);
        let half = T::of(0.5);
        let mut ising = IsingHamiltonian::new(self.n);
        let mut fields: BTreeMap<usize, T> = BTreeMap::new();
        let mut constant = self.offset;
        for (&(i, j), &q) in &self.quadratic {
            let c = q * quarter;
            *ising.couplings.entry((i, j)).or_insert_with(T::zero) += c;
            *fields.entry(i).or_insert_with(T::zero) -= c;
            *fields.entry(j).or_insert_with(T::zero) -= c;
            constant += c;
        }
        for (&i, &l) in &self.linear {
            let c = l * half;
            *fields.entry(i).or_insert_with(T::zero) -= c;
            constant += c;
        }
        ising.couplings.retain(|_, v| *v != T::zero());
        fields.retain(|_, v| *v != T::zero());
        ising.fields = fields;
        ising.constant = constant;
        ising
    }
}

/// `qubo_to_ising` as a free function.
pub fn qubo_to_ising<T: Real>(q: &QuboProblem<T>) -> IsingHamiltonian<T> {
    q.to_ising()
}

fn check_brute_force(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(Error::Capacity {
            what: "brute-force variables",
            value: n,
            min: 0,
            max: MAX_BRUTE_FORCE_VARS,
        });
    }
    Ok(())
}

/// Exact minimizer of a QUBO.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult<T> {
    pub bits: usize,
    pub assignment: Vec<bool>,
    pub value: T,
}

/// Key ordering assignments lexicographically with `x_0` most significant.
fn lex_key(bits: usize, n: usize) -> usize {
    if n == 0 {
        0
    } else {
        bits.reverse_bits() >> (usize::BITS as usize - n)
    }
}

/// Exhaustive argmin. Ties go to the lexicographically smallest assignment
/// (`x_0` compared first).
pub fn brute_force<T: Real>(q: &QuboProblem<T>) -> Result<BruteForceResult<T>> {
    check_brute_force(q.n)?;
    let n = q.n;
    let best = (0..1usize << n)
        .into_par_iter()
        .map(|b| (q.value_index(b), lex_key(b, n), b))
        .reduce_with(|a, b| {
            if a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1) {
                a
            } else {
                b
            }
        })
        .expect("at least one assignment");
    Ok(BruteForceResult {
        bits: best.2,
        assignment: (0..n).map(|i| best.2 >> i & 1 == 1).collect(),
        value: best.0,
    })
}

/// `1 + #{assignments with value strictly below value(bits)}`.
pub fn rank_of<T: Real>(q: &QuboProblem<T>, bits: usize) -> Result<usize> {
    let target = q.value_index(bits);
    let values = q.all_values()?;
    Ok(1 + values.iter().filter(|&&v| v < target).count())
}

/// `energy(z) = sum J_ij z_i z_j + sum h_i z_i + constant`, `z in {+1,-1}^n`.
///
/// Bit `i` of a basis index set means `z_i = -1` (equivalently `x_i = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian<T> {
    pub n: usize,
    #[serde(with = "pair_map")]
    pub couplings: BTreeMap<(usize, usize), T>,
    pub fields: BTreeMap<usize, T>,
    pub constant: T,
}

impl<T: Real> IsingHamiltonian<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            couplings: BTreeMap::new(),
            fields: BTreeMap::new(),
            constant: T::zero(),
        }
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::Invalid(format!(
                "coupling ({i},{j}) invalid for {} spins",
                self.n
            )));
        }
        self.couplings.insert((i.min(j), i.max(j)), v);
        Ok(())
    }

    pub fn set_field(&mut self, i: usize, v: T) -> Result<()> {
        if i >= self.n {
            return Err(Error::QubitIndex {
                index: i,
                num_qubits: self.n,
            });
        }
        self.fields.insert(i, v);
        Ok(())
    }

    /// Number of encoding terms `|J| + |h|`.
    pub fn num_terms(&self) -> usize {
        self.couplings.len() + self.fields.len()
    }

    pub fn energy(&self, z: &[i8]) -> T {
        debug_assert_eq!(z.len(), self.n);
        let s = |i: usize| if z[i] < 0 { -T::one() } else { T::one() };
        self.energy_with(s)
    }

    pub fn energy_index(&self, bits: usize) -> T {
        self.energy_with(|i| if bits >> i & 1 == 1 { -T::one() } else { T::one() })
    }

    fn energy_with(&self, z: impl Fn(usize) -> T) -> T {
        let mut e = self.constant;
        for (&(i, j), &c) in &self.couplings {
            e += c * z(i) * z(j);
        }
        for (&i, &h) in &self.fields {
            e += h * z(i);
        }
        e
    }

    /// Energies of all basis states.
    pub fn diagonal(&self) -> Result<Vec<T>> {
        check_brute_force(self.n)?;
        Ok((0..1usize << self.n)
            .into_par_iter()
            .map(|b| self.energy_index(b))
            .collect())
    }

    pub fn max_abs_coefficient(&self) -> T {
        self.couplings
            .values()
            .chain(self.fields.values())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Divides all `J` and `h` by their largest magnitude. The constant is
    /// untouched; an all-zero Hamiltonian comes back unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs_coefficient();
        if m == T::zero() {
            return self.clone();
        }
        Self {
            n: self.n,
            couplings: self.couplings.iter().map(|(&k, &v)| (k, v / m)).collect(),
            fields: self.fields.iter().map(|(&k, &v)| (k, v / m)).collect(),
            constant: self.constant,
        }
    }

    /// The Hamiltonian as a `Z`/`ZZ` observable.
    pub fn to_observable(&self, include_constant: bool) -> Observable<T> {
        let mut obs = Observable::new();
        for (&(i, j), &c) in &self.couplings {
            obs.push(
                c,
                PauliString::new(&[(i, Pauli::Z), (j, Pauli::Z)]).expect("i < j"),
            );
        }
        for (&i, &h) in &self.fields {
            obs.push(h, PauliString::new(&[(i, Pauli::Z)]).expect("single factor"));
        }
        if include_constant && self.constant != T::zero() {
            obs.push(self.constant, PauliString::IDENTITY);
        }
        obs
    }

    pub fn cast<U: Real>(&self) -> IsingHamiltonian<U> {
        let c = |v: &T| U::of(v.to_f64_lossy());
        IsingHamiltonian {
            n: self.n,
            couplings: self.couplings.iter().map(|(&k, v)| (k, c(v))).collect(),
            fields: self.fields.iter().map(|(&k, v)| (k, c(v))).collect(),
            constant: c(&self.constant),
        }
    }
}

/// `normalize_coefficients` as a free function.
pub fn normalize_coefficients<T: Real>(ham: &IsingHamiltonian<T>) -> IsingHamiltonian<T> {
    ham.normalized()
}
