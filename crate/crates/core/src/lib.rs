//! Fault-diversity testing of deterministic decision policies.
//!
//! The crate searches the input space of deterministic MDP simulators for
//! fault-triggering initial conditions while spreading the search over a
//! low-dimensional behaviour space. It ships:
//!
//! - [`mdp`]: simulator/policy contracts, episode execution, evaluation.
//! - [`envs`]: three self-contained deterministic environments (taxi grid
//!   world, 2D lander, stylized bipedal walker) with input samplers,
//!   mutation operators, test oracles and behaviour descriptors.
//! - [`policies`]: the deterministic policies under test (tabular
//!   Q-learning for the taxi, scripted controllers for lander and walker).
//! - [`qd`]: MAP-Elites and Novelty Search campaign runners with grid and
//!   novelty archives, plus the campaign log that records every evaluation.
//! - [`baselines`]: random testing and a GMM-guided fuzzer.
//! - [`metrics`]: fault counts over time, behaviour coverage, k-NN
//!   sparseness and cross-seed aggregation.

pub mod baselines;
pub mod envs;
pub mod mdp;
pub mod metrics;
pub mod policies;
pub mod qd;
