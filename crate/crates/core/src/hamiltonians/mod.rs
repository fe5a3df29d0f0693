//! QUBO and Ising formulations of MaxCut, unit commitment and knapsack, the
//! two inequality encodings, and exhaustive oracles.

pub mod io;
mod problems;
mod qubo;

pub use problems::{
    evaluate_problem, knapsack_qubo_slack, knapsack_qubo_unbalanced, maxcut_ising, ucp_qubo,
    Evaluation, Generator, KnapsackInstance, ProblemInstance, UcpInstance, WeightedGraph,
};
pub use qubo::{
    brute_force, normalize_coefficients, qubo_to_ising, rank_of, BruteForceResult,
    IsingHamiltonian, QuboProblem, MAX_BRUTE_FORCE_VARS,
};
