use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use super::observable::Observable;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::real::Real;

/// Where a gate's angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngleSource<T> {
    Fixed(T),
    /// `angle = params[index] * scale`. Several gates may share an index.
    Param { index: usize, scale: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundGate<T> {
    pub kind: GateKind,
    pub angle: AngleSource<T>,
}

impl<T: Real> BoundGate<T> {
    pub fn fixed(kind: GateKind, angle: T) -> Self {
        Self {
            kind,
            angle: AngleSource::Fixed(angle),
        }
    }

    pub fn param(kind: GateKind, index: usize, scale: T) -> Self {
        Self {
            kind,
            angle: AngleSource::Param { index, scale },
        }
    }

    pub fn resolve(&self, params: &[T]) -> Gate<T> {
        let angle = match self.angle {
            AngleSource::Fixed(a) => a,
            AngleSource::Param { index, scale } => params[index] * scale,
        };
        Gate {
            kind: self.kind,
            angle,
        }
    }
}

/// Gates and trainable parameters created by one ansatz layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerInfo {
    pub gates: Range<usize>,
    pub params: Range<usize>,
}

/// Ordered gate list plus the parameter binding map.
///
/// Execution always starts from `|+>^n`, so the leading Hadamard layer is
/// implicit and never appears in `gates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate<T> {
    num_qubits: usize,
    gates: Vec<BoundGate<T>>,
    param_count: usize,
    layers: Vec<LayerInfo>,
}

impl<T: Real> CircuitTemplate<T> {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            param_count: 0,
            layers: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[BoundGate<T>] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn layers(&self) -> &[LayerInfo] {
        &self.layers
    }

    /// Allocates a fresh trainable parameter and returns its index.
    pub fn new_param(&mut self) -> usize {
        self.param_count += 1;
        self.param_count - 1
    }

    pub fn push(&mut self, gate: BoundGate<T>) -> Result<()> {
        gate.kind.validate(self.num_qubits)?;
        if let AngleSource::Param { index, .. } = gate.angle {
            if index >= self.param_count {
                return Err(Error::Structure(format!(
                    "gate binds parameter {index} but only {} exist",
                    self.param_count
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Starts a layer; everything pushed until [`end_layer`](Self::end_layer)
    /// belongs to it.
    pub fn begin_layer(&mut self) {
        self.layers.push(LayerInfo {
            gates: self.gates.len()..self.gates.len(),
            params: self.param_count..self.param_count,
        });
    }

    pub fn end_layer(&mut self) {
        if let Some(layer) = self.layers.last_mut() {
            layer.gates.end = self.gates.len();
            layer.params.end = self.param_count;
        }
    }

    /// The full sequence as executed, leading Hadamards included.
    pub fn listing(&self) -> Vec<GateKind> {
        (0..self.num_qubits)
            .map(GateKind::H)
            .chain(self.gates.iter().map(|g| g.kind))
            .collect()
    }

    /// Indices of gates that bind parameter `index`, with their scales.
    pub fn bindings(&self, index: usize) -> Vec<(usize, T)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(g, b)| match b.angle {
                AngleSource::Param { index: i, scale } if i == index => Some((g, scale)),
                _ => None,
            })
            .collect()
    }

    fn check_params(&self, params: &[T]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::Dimension {
                what: "parameter vector",
                expected: self.param_count,
                got: params.len(),
            });
        }
        Ok(())
    }
}

/// `|+>^n` followed by every gate of `template` at its resolved angle.
pub fn run_circuit<T: Real>(template: &CircuitTemplate<T>, params: &[T]) -> Result<StateVector<T>> {
    template.check_params(params)?;
    let mut state = StateVector::plus(template.num_qubits)?;
    for g in &template.gates {
        state.apply_unchecked(&g.resolve(params));
    }
    Ok(state)
}

/// `d<obs>/d params` by an exact reverse sweep.
pub fn gradient<T: Real>(
    template: &CircuitTemplate<T>,
    params: &[T],
    obs: &Observable<T>,
) -> Result<Vec<T>> {
    let state = run_circuit(template, params)?;
    adjoint_gradient(template, params, &state, obs)
}

/// Reverse sweep starting from an already computed final state.
///
/// For a gate `exp(-i a/2 G)` the derivative of `<O>` with respect to `a` is
/// `Im <lambda|G|phi>`, where `phi` is the state right after the gate and
/// `lambda` is `O|psi>` propagated back to the same point. Shared parameters
/// accumulate `scale * d<O>/da` over every gate bound to them.
pub fn adjoint_gradient<T: Real>(
    template: &CircuitTemplate<T>,
    params: &[T],
    final_state: &StateVector<T>,
    obs: &Observable<T>,
) -> Result<Vec<T>> {
    template.check_params(params)?;
    if final_state.num_qubits() != template.num_qubits {
        return Err(Error::Dimension {
            what: "state qubits",
            expected: template.num_qubits,
            got: final_state.num_qubits(),
        });
    }
    let mut grad = vec![T::zero(); template.param_count];
    let mut phi = final_state.clone();
    let mut lambda = final_state.apply_observable(obs)?;
    for g in template.gates.iter().rev() {
        let gate = g.resolve(params);
        if let AngleSource::Param { index, scale } = g.angle {
            if scale != T::zero() {
                grad[index] += scale * phi.generator_overlap(&lambda, g.kind);
            }
        }
        let inv = gate.inverse();
        phi.apply_unchecked(&inv);
        lambda.apply_unchecked(&inv);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn single_rx() -> CircuitTemplate<f64> {
        // RX on |+> is trivial, so start from |0> via RY(-pi/2) first.
        let mut t = CircuitTemplate::new(1);
        t.push(BoundGate::fixed(GateKind::Ry(0), -FRAC_PI_2)).unwrap();
        let p = t.new_param();
        t.push(BoundGate::param(GateKind::Rx(0), p, 1.0)).unwrap();
        t
    }

    #[test]
    fn rx_gradient_examples() {
        let t = single_rx();
        let z = Observable::z(0);
        let state = run_circuit(&t, &[0.0]).unwrap();
        assert!((state.expectation(&z).unwrap() - 1.0).abs() < 1e-12);
        let g0 = gradient(&t, &[0.0], &z).unwrap();
        assert!(g0[0].abs() < 1e-12);
        let g1 = gradient(&t, &[FRAC_PI_2], &z).unwrap();
        assert!((g1[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_template_is_uniform() {
        let t = CircuitTemplate::<f64>::new(2);
        let s = run_circuit(&t, &[]).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn length_mismatch_rejected() {
        let t = single_rx();
        assert!(matches!(
            run_circuit(&t, &[0.1, 0.2]),
            Err(Error::Dimension { .. })
        ));
        assert!(gradient(&t, &[], &Observable::z(0)).is_err());
    }

    #[test]
    fn push_rejects_unallocated_param() {
        let mut t = CircuitTemplate::<f64>::new(2);
        assert!(t.push(BoundGate::param(GateKind::Rx(0), 0, 1.0)).is_err());
        assert!(t.push(BoundGate::fixed(GateKind::Rx(2), 0.0)).is_err());
    }

    #[test]
    fn shared_parameter_accumulates() {
        // Two RY gates bound to one parameter with scales 1 and 2 behave like
        // a single RY(3 theta).
        let mut shared = CircuitTemplate::<f64>::new(1);
        let p = shared.new_param();
        shared.push(BoundGate::param(GateKind::Ry(0), p, 1.0)).unwrap();
        shared.push(BoundGate::param(GateKind::Ry(0), p, 2.0)).unwrap();
        let mut single = CircuitTemplate::<f64>::new(1);
        let q = single.new_param();
        single.push(BoundGate::param(GateKind::Ry(0), q, 3.0)).unwrap();
        let obs = Observable::x(0);
        let a = gradient(&shared, &[0.37], &obs).unwrap();
        let b = gradient(&single, &[0.37], &obs).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!((a[0] + 3.0 * (3.0f64 * 0.37).sin()).abs() < 1e-12);
    }
}
