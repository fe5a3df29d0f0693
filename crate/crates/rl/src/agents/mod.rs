//! Q-learning and policy-gradient agents whose function approximator is a
//! Hamiltonian-derived circuit.

mod model;
mod qdqn;
mod qpg;
mod replay;
mod schedule;

pub use model::{Forward, HeadKind, Model};
pub use qdqn::{epsilon_greedy, qdqn_q_values, QdqnAgent, QdqnConfig, Transition};
pub use qpg::{
    log_prob_sensitivities, policy_from_values, qpg_policy, BernoulliLink, Policy, QpgAgent,
    QpgConfig, ScalingMode, Trajectory, TrajectoryStep, UpdateStats,
};
pub use replay::ReplayBuffer;
pub use schedule::Schedule;
