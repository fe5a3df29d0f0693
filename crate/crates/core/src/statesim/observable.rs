use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

/// Pauli string over `{I, X, Z}` stored as bit masks. A qubit carries at
/// most one factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliString {
    pub x_mask: usize,
    pub z_mask: usize,
}

impl PauliString {
    pub const IDENTITY: Self = Self {
        x_mask: 0,
        z_mask: 0,
    };

    pub fn new(factors: &[(usize, Pauli)]) -> Result<Self> {
        if factors.len() > 2 {
            return Err(Error::Invalid(format!(
                "pauli strings carry at most 2 factors, got {}",
                factors.len()
            )));
        }
        let mut s = Self::default();
        for &(q, p) in factors {
            if q >= usize::BITS as usize {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits: usize::BITS as usize,
                });
            }
            let bit = 1usize << q;
            if (s.x_mask | s.z_mask) & bit != 0 {
                return Err(Error::RepeatedQubit(q));
            }
            match p {
                Pauli::X => s.x_mask |= bit,
                Pauli::Z => s.z_mask |= bit,
            }
        }
        Ok(s)
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// One past the highest qubit touched, 0 for the identity.
    pub fn support_end(&self) -> usize {
        let m = self.x_mask | self.z_mask;
        (usize::BITS - m.leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm<T> {
    pub coeff: T,
    pub string: PauliString,
}

/// Real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observable<T> {
    terms: Vec<PauliTerm<T>>,
}

impl<T: Real> Observable<T> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn single(coeff: T, factors: &[(usize, Pauli)]) -> Result<Self> {
        Self::new().with_term(coeff, factors)
    }

    pub fn x(q: usize) -> Self {
        Self::single(T::one(), &[(q, Pauli::X)]).expect("valid single factor")
    }

    pub fn z(q: usize) -> Self {
        Self::single(T::one(), &[(q, Pauli::Z)]).expect("valid single factor")
    }

    pub fn zz(q1: usize, q2: usize) -> Self {
        Self::single(T::one(), &[(q1, Pauli::Z), (q2, Pauli::Z)]).expect("distinct qubits")
    }

    pub fn with_term(mut self, coeff: T, factors: &[(usize, Pauli)]) -> Result<Self> {
        self.push(coeff, PauliString::new(factors)?);
        Ok(self)
    }

    pub fn push(&mut self, coeff: T, string: PauliString) {
        self.terms.push(PauliTerm { coeff, string });
    }

    /// Appends every term of `other` scaled by `factor`.
    pub fn add_scaled(&mut self, other: &Self, factor: T) {
        self.terms.extend(other.terms.iter().map(|t| PauliTerm {
            coeff: t.coeff * factor,
            string: t.string,
        }));
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum |c_k|`, the bound on `|<O>|`.
    pub fn coefficient_l1(&self) -> T {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn support_end(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.string.support_end())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let end = self.support_end();
        if end > num_qubits {
            return Err(Error::QubitIndex {
                index: end - 1,
                num_qubits,
            });
        }
        Ok(())
    }
}
