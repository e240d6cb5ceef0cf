use serde::{Deserialize, Serialize};

use super::problems::Problem;
use crate::task::TaskEnv;
use crate::types::MoveAction;

/// Ground-truth scoring of one emitted action sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub solved: bool,
    /// Terminal state meets the goal, ignoring every other condition.
    pub reached_goal: bool,
    pub invalid_count: u32,
    pub length: u32,
}

impl ReplayOutcome {
    /// Solved without a single rule-breaking action.
    pub fn solved_strict(&self) -> bool {
        self.solved && self.invalid_count == 0
    }
}

/// Steps the simulator through `actions`. Illegal actions are counted and
/// skipped. With `strict_plan` (planner output) any illegal action makes the
/// problem unsolved, and a sequence longer than `budget` is never solved.
pub fn replay_plan(
    env: &TaskEnv,
    problem: &Problem,
    actions: &[MoveAction],
    strict_plan: bool,
    budget: usize,
) -> ReplayOutcome {
    let mut state = problem.initial.clone();
    let mut invalid_count = 0u32;
    for action in actions {
        let legal = env.is_legal(&state, action).map(|v| v.is_valid()).unwrap_or(false);
        match legal.then(|| env.apply(&state, action)) {
            Some(Ok(next)) => state = next,
            _ => invalid_count += 1,
        }
    }
    let reached_goal = env.satisfies(&state, &problem.goal);
    let solved = reached_goal && actions.len() <= budget && !(strict_plan && invalid_count > 0);
    ReplayOutcome { solved, reached_goal, invalid_count, length: actions.len() as u32 }
}
