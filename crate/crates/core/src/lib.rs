//! Hamiltonian-derived variational circuits for binary combinatorial optimization.
//!
//! The crate is organised bottom-up:
//!
//! - [`statesim`]: dense statevector simulation of the restricted gate set
//!   (H, RX, RY, RZ, RZZ) with exact reverse-sweep gradients.
//! - [`hamiltonians`]: QUBO and Ising forms of MaxCut, unit commitment and
//!   knapsack, penalty encodings and brute-force oracles.
//! - [`ansatz`]: the five circuit families built from an Ising Hamiltonian.
//! - [`qaoa`]: the p-layer QAOA baseline.
//! - [`bench`]: gradient-variance (trainability) measurements.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the training code uses.

pub mod ansatz;
pub mod bench;
pub mod error;
pub mod hamiltonians;
pub mod optim;
pub mod qaoa;
mod real;
pub mod statesim;

pub use error::{Error, Result};
pub use real::Real;

pub use ansatz::{Annotations, AnsatzKind};
pub use hamiltonians::{KnapsackInstance, UcpInstance, WeightedGraph};

/// Double-precision statevector.
pub type StateVector = statesim::StateVector<f64>;
/// Single-precision statevector.
pub type StateVector32 = statesim::StateVector<f32>;
/// Double-precision observable.
pub type Observable = statesim::Observable<f64>;
/// Double-precision circuit template.
pub type CircuitTemplate = statesim::CircuitTemplate<f64>;
/// Double-precision QUBO.
pub type QuboProblem = hamiltonians::QuboProblem<f64>;
/// Double-precision Ising Hamiltonian.
pub type IsingHamiltonian = hamiltonians::IsingHamiltonian<f64>;
