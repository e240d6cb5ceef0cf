//! The six module-role contracts shared by the oracle and LLM backends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::types::{Configuration, Feedback, Goal, MoveAction, Value, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    TaskDecomposer,
    Actor,
    Monitor,
    Predictor,
    Evaluator,
    TaskCoordinator,
}

impl Module {
    pub const ALL: [Module; 6] = [
        Module::TaskDecomposer,
        Module::Actor,
        Module::Monitor,
        Module::Predictor,
        Module::Evaluator,
        Module::TaskCoordinator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::TaskDecomposer => "task_decomposer",
            Module::Actor => "actor",
            Module::Monitor => "monitor",
            Module::Predictor => "predictor",
            Module::Evaluator => "evaluator",
            Module::TaskCoordinator => "task_coordinator",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One request/reply pair a backend made while serving a role call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub input: String,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

/// A backend able to play every module role.
///
/// Methods take `&mut self` so stateful backends (seeded noise, cached
/// heuristics, transcripts) need no interior mutability; concurrent problems
/// each get their own instance.
pub trait ModuleBackend {
    /// Subgoals to pursue, in order, before the final goal.
    fn decompose(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>>;

    /// Up to `branches` candidate actions, given feedback gathered so far.
    fn propose(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        feedback: &[Feedback],
        branches: usize,
    ) -> Result<Vec<MoveAction>>;

    fn assess(&mut self, state: &Configuration, action: &MoveAction) -> Result<Verdict>;

    fn predict(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration>;

    fn evaluate(&mut self, state: &Configuration, goal: &Goal) -> Result<Value>;

    /// Whether `state` satisfies `goal`.
    fn check(&mut self, state: &Configuration, goal: &Goal) -> Result<bool>;

    /// Drains the raw exchanges made since the last call. Backends without a
    /// textual transport return nothing.
    fn take_exchanges(&mut self) -> Vec<Exchange> {
        Vec::new()
    }
}

impl<B: ModuleBackend + ?Sized> ModuleBackend for &mut B {
    fn decompose(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>> {
        (**self).decompose(state, goal)
    }

    fn propose(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        feedback: &[Feedback],
        branches: usize,
    ) -> Result<Vec<MoveAction>> {
        (**self).propose(state, goal, feedback, branches)
    }

    fn assess(&mut self, state: &Configuration, action: &MoveAction) -> Result<Verdict> {
        (**self).assess(state, action)
    }

    fn predict(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        (**self).predict(state, action)
    }

    fn evaluate(&mut self, state: &Configuration, goal: &Goal) -> Result<Value> {
        (**self).evaluate(state, goal)
    }

    fn check(&mut self, state: &Configuration, goal: &Goal) -> Result<bool> {
        (**self).check(state, goal)
    }

    fn take_exchanges(&mut self) -> Vec<Exchange> {
        (**self).take_exchanges()
    }
}

impl<B: ModuleBackend + ?Sized> ModuleBackend for Box<B> {
    fn decompose(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>> {
        (**self).decompose(state, goal)
    }

    fn propose(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        feedback: &[Feedback],
        branches: usize,
    ) -> Result<Vec<MoveAction>> {
        (**self).propose(state, goal, feedback, branches)
    }

    fn assess(&mut self, state: &Configuration, action: &MoveAction) -> Result<Verdict> {
        (**self).assess(state, action)
    }

    fn predict(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        (**self).predict(state, action)
    }

    fn evaluate(&mut self, state: &Configuration, goal: &Goal) -> Result<Value> {
        (**self).evaluate(state, goal)
    }

    fn check(&mut self, state: &Configuration, goal: &Goal) -> Result<bool> {
        (**self).check(state, goal)
    }

    fn take_exchanges(&mut self) -> Vec<Exchange> {
        (**self).take_exchanges()
    }
}
