//! The episodic environment used for learning: indicator-vector states,
//! masked actions and curriculum resets. Also a tabular Q-learner for small
//! structures and the spec file consumed by external trainers.

mod env;
mod qlearning;
mod spec;

pub use env::{action_mask, reset, step, EnvState, RESET_ATTEMPTS};
pub use qlearning::{
    tabular_q_learning, tabular_q_learning_spec, GreedyPolicy, QLearningConfig, QTable, TABLE_CAP,
};
pub use spec::{
    export_env_spec, ConformanceVector, Curriculum, EnvSpec, EpsilonSchedule, CONFORMANCE_VECTORS,
};
