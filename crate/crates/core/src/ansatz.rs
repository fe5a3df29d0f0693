//! Circuit templates derived from an Ising Hamiltonian.
//!
//! Every layer has an encoding block (one `RZZ` per coupling, one `RZ` per
//! field, quadratic terms first in `(i, j)` order) followed by a variational
//! block. The five kinds differ in how these gates share parameters:
//!
//! | kind           | encoding              | variational                     |
//! |----------------|-----------------------|---------------------------------|
//! | `sge_sgv`      | one shared parameter  | one shared `RX` parameter       |
//! | `mge_sgv`      | one per term          | one shared `RX` parameter       |
//! | `mge_mgv`      | one per term          | one `RX` parameter per qubit    |
//! | `sge_sgv_hea`  | one shared parameter  | shared `RX` + per-qubit `RY`,`RZ` |
//! | `encoding_hea` | fixed at coefficients | per-qubit `RY`,`RZ`             |
//!
//! Encoding gates carry the Ising coefficient as their binding scale, so a
//! shared parameter rotates every term in proportion to its weight.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::IsingHamiltonian;
use crate::real::Real;
use crate::statesim::{BoundGate, CircuitTemplate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    SgeSgv,
    MgeSgv,
    MgeMgv,
    SgeSgvHea,
    EncodingHea,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 5] = [
        AnsatzKind::SgeSgv,
        AnsatzKind::MgeSgv,
        AnsatzKind::MgeMgv,
        AnsatzKind::SgeSgvHea,
        AnsatzKind::EncodingHea,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnsatzKind::SgeSgv => "sge_sgv",
            AnsatzKind::MgeSgv => "mge_sgv",
            AnsatzKind::MgeMgv => "mge_mgv",
            AnsatzKind::SgeSgvHea => "sge_sgv_hea",
            AnsatzKind::EncodingHea => "encoding_hea",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace(['-', '+'], "_");
        AnsatzKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Invalid(format!("unknown ansatz kind '{s}'")))
    }
}

/// Per-variable episode progress: `pi` for free variables, `0` for assigned
/// ones. Multiplies the variational gate angles as `alpha / pi`, so assigned
/// qubits get identity mixers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotations(Vec<f64>);

impl Annotations {
    pub fn all_free(n: usize) -> Self {
        Self(vec![PI; n])
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 0.0 && v != PI) {
            return Err(Error::Invalid(format!("annotation {v} is neither 0 nor pi")));
        }
        Ok(Self(values))
    }

    /// Marks variable `i` as assigned.
    pub fn assign(&mut self, i: usize) {
        self.0[i] = 0.0;
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.0[i] == PI
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `alpha_i / pi`, exactly 0 or 1.
    pub fn scale<T: Real>(&self, i: usize) -> T {
        if self.0[i] == 0.0 {
            T::zero()
        } else {
            T::one()
        }
    }
}

/// Trainable parameter count for `layers` layers over `ham`.
pub fn param_count<T: Real>(kind: AnsatzKind, ham: &IsingHamiltonian<T>, layers: usize) -> usize {
    let t = ham.num_terms();
    let n = ham.n;
    layers
        * match kind {
            AnsatzKind::SgeSgv => 2,
            AnsatzKind::MgeSgv => t + 1,
            AnsatzKind::MgeMgv => t + n,
            AnsatzKind::SgeSgvHea => 2 + 2 * n,
            AnsatzKind::EncodingHea => 2 * n,
        }
}

/// Builds the template for `kind`. Pass an already normalized Hamiltonian
/// when the raw coefficients are large.
pub fn build<T: Real>(
    kind: AnsatzKind,
    ham: &IsingHamiltonian<T>,
    annotations: Option<&Annotations>,
    layers: usize,
) -> Result<CircuitTemplate<T>> {
    if layers == 0 {
        return Err(Error::Invalid("ansatz needs at least one layer".into()));
    }
    if let Some(a) = annotations {
        if a.len() != ham.n {
            return Err(Error::Dimension {
                what: "annotations",
                expected: ham.n,
                got: a.len(),
            });
        }
    }
    let n = ham.n;
    let mix_scale = |q: usize| annotations.map_or(T::one(), |a| a.scale(q));
    let mut t = CircuitTemplate::new(n);
    for _ in 0..layers {
        t.begin_layer();

        let terms: Vec<(GateKind, T)> = ham
            .couplings
            .iter()
            .map(|(&(i, j), &c)| (GateKind::Rzz(i, j), c))
            .chain(ham.fields.iter().map(|(&i, &h)| (GateKind::Rz(i), h)))
            .collect();
        match kind {
            AnsatzKind::SgeSgv | AnsatzKind::SgeSgvHea => {
                let p = t.new_param();
                for (g, c) in terms {
                    t.push(BoundGate::param(g, p, c))?;
                }
            }
            AnsatzKind::MgeSgv | AnsatzKind::MgeMgv => {
                for (g, c) in terms {
                    let p = t.new_param();
                    t.push(BoundGate::param(g, p, c))?;
                }
            }
            AnsatzKind::EncodingHea => {
                for (g, c) in terms {
                    t.push(BoundGate::fixed(g, c))?;
                }
            }
        }

        match kind {
            AnsatzKind::SgeSgv | AnsatzKind::MgeSgv | AnsatzKind::SgeSgvHea => {
                let p = t.new_param();
                for q in 0..n {
                    t.push(BoundGate::param(GateKind::Rx(q), p, mix_scale(q)))?;
                }
            }
            AnsatzKind::MgeMgv => {
                for q in 0..n {
                    let p = t.new_param();
                    t.push(BoundGate::param(GateKind::Rx(q), p, mix_scale(q)))?;
                }
            }
            AnsatzKind::EncodingHea => {}
        }

        // Hardware-efficient single-qubit rotations, also frozen on assigned
        // qubits.
        if matches!(kind, AnsatzKind::SgeSgvHea | AnsatzKind::EncodingHea) {
            for q in 0..n {
                let p = t.new_param();
                t.push(BoundGate::param(GateKind::Ry(q), p, mix_scale(q)))?;
            }
            for q in 0..n {
                let p = t.new_param();
                t.push(BoundGate::param(GateKind::Rz(q), p, mix_scale(q)))?;
            }
        }
        t.end_layer();
    }
    debug_assert_eq!(t.param_count(), param_count(kind, ham, layers));
    Ok(t)
}

/// Index of the `slot`-th parameter (1-based) created in `layer` (1-based).
pub fn layer_param<T: Real>(
    template: &CircuitTemplate<T>,
    layer: usize,
    slot: usize,
) -> Result<usize> {
    let info = layer
        .checked_sub(1)
        .and_then(|l| template.layers().get(l))
        .ok_or_else(|| Error::Structure(format!("template has no layer {layer}")))?;
    let idx = info.params.start + slot.saturating_sub(1);
    if slot == 0 || idx >= info.params.end {
        return Err(Error::Structure(format!(
            "layer {layer} has {} parameters, no slot {slot}",
            info.params.len()
        )));
    }
    Ok(idx)
}

/// Uniform on `[-pi/8, pi/8]`.
pub fn init_params<T: Real, R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<T> {
    let r = PI / 8.0;
    (0..count).map(|_| T::of(rng.gen_range(-r..=r))).collect()
}
