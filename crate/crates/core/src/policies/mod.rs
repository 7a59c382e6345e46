//! Deterministic policies under test.
//!
//! The taxi agent is a tabular Q-learning policy trained in-process; lander
//! and walker use scripted controllers. All of them are pure functions of
//! the observation, imperfect by design: each leaves a nontrivial region of
//! fault-triggering inputs for the search to find.

mod lander_pilot;
mod qtable;
mod walker_gait;

pub use lander_pilot::LanderPilot;
pub use qtable::{
    load_qtable, save_qtable, solve_rate, train_q_learning, train_q_learning_gated, QTable,
    QTableIoError, TrainParams, TrainingError,
};
pub use walker_gait::WalkerGait;
