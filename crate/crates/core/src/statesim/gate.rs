use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Gate type and the qubits it acts on, without an angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H(usize),
    Rx(usize),
    Ry(usize),
    Rz(usize),
    Rzz(usize, usize),
}

impl GateKind {
    pub fn is_rotation(&self) -> bool {
        !matches!(self, GateKind::H(_))
    }

    /// Diagonal gates never change measurement probabilities.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateKind::Rz(_) | GateKind::Rzz(..))
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(Error::QubitIndex {
                    index: q,
                    num_qubits,
                })
            }
        };
        match *self {
            GateKind::H(q) | GateKind::Rx(q) | GateKind::Ry(q) | GateKind::Rz(q) => check(q),
            GateKind::Rzz(a, b) => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::RepeatedQubit(a));
                }
                Ok(())
            }
        }
    }
}

/// A gate with its resolved angle. Rotations are `exp(-i angle/2 P)`;
/// `Rzz` is `exp(-i angle/2 Z Z)`. The angle of `H` is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate<T> {
    pub kind: GateKind,
    pub angle: T,
}

impl<T: Real> Gate<T> {
    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H(q),
            angle: T::zero(),
        }
    }

    pub fn rx(q: usize, angle: T) -> Self {
        Self {
            kind: GateKind::Rx(q),
            angle,
        }
    }

    pub fn ry(q: usize, angle: T) -> Self {
        Self {
            kind: GateKind::Ry(q),
            angle,
        }
    }

    pub fn rz(q: usize, angle: T) -> Self {
        Self {
            kind: GateKind::Rz(q),
            angle,
        }
    }

    pub fn rzz(q1: usize, q2: usize, angle: T) -> Self {
        Self {
            kind: GateKind::Rzz(q1, q2),
            angle,
        }
    }

    pub fn inverse(&self) -> Self {
        match self.kind {
            GateKind::H(_) => *self,
            _ => Self {
                kind: self.kind,
                angle: -self.angle,
            },
        }
    }
}
