//! Modular planner built from six cooperating module roles (task
//! decomposer, actor, monitor, predictor, evaluator, task coordinator),
//! with interchangeable rule-exact oracle and chat-model backends, and a
//! benchmark harness over Tower of Hanoi and graph-traversal tasks.

pub mod backend;
pub mod error;
pub mod graph;
pub mod harness;
pub mod llm;
pub mod oracle;
pub mod orchestrator;
pub mod task;
pub mod toh;
pub mod types;

pub use backend::{Exchange, Module, ModuleBackend};
pub use error::{Error, Result};
pub use oracle::{NoiseProfile, OracleBackend};
pub use orchestrator::{generate_plan, Planner, RunRecord};
pub use task::TaskEnv;
pub use types::{
    parse_action, parse_actions, parse_configuration, render_configuration, Configuration, Feedback, Goal, MoveAction,
    Peg, Plan, RoomId, SearchConfig, TohState, Value, Verdict,
};

/// Derives an independent seed for stream `stream` of a base seed
/// (splitmix64 finalizer).
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
