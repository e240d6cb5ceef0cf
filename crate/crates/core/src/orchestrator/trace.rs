use serde::{Deserialize, Serialize};

use crate::backend::{Exchange, Module};
use crate::types::{Goal, Plan};

/// One module call during plan generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleEvent {
    /// Number of actions in the plan when the call was made.
    pub step: usize,
    /// Search layer, 0 outside the tree search.
    pub depth: usize,
    pub module: Module,
    pub input_text: String,
    pub output_text: String,
    pub parsed: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub temperatures: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cached: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exchanges: Vec<Exchange>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Actions the actor proposed that went through the proposal loop.
    pub total_proposals: u64,
    /// Of those, how many the monitor rejected.
    pub invalid_proposals: u64,
    pub module_calls: u64,
    pub cache_hits: u64,
}

/// Trace of one plan generation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub events: Vec<ModuleEvent>,
    pub subgoals: Vec<Goal>,
    pub plan: Plan,
    pub counters: Counters,
    /// The coordinator's own claim that the final goal was reached.
    pub goal_confirmed: bool,
    pub budget_exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn new(problem_id: impl Into<String>) -> Self {
        RunRecord { problem_id: problem_id.into(), ..Default::default() }
    }

    pub fn events_for(&self, module: Module) -> impl Iterator<Item = &ModuleEvent> {
        self.events.iter().filter(move |e| e.module == module)
    }
}
