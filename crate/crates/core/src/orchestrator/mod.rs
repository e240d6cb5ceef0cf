//! Plan generation over any [`ModuleBackend`]: the actor/monitor proposal
//! loop, the bounded tree search and the subgoal-sequenced plan loop.

mod trace;

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use trace::{Counters, ModuleEvent, RunRecord};

use crate::backend::{Module, ModuleBackend};
use crate::error::{Error, Result};
use crate::toh;
use crate::types::{Configuration, Feedback, Goal, MoveAction, Plan, SearchConfig, Value};

/// Actor/monitor rounds before the proposal loop gives up.
pub const MAX_MONITOR_ROUNDS: usize = 10;

/// Actions and predicted successors recorded for one (state, goal) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchCacheEntry {
    pub actions: Vec<MoveAction>,
    pub next_states: Vec<Configuration>,
}

#[derive(Debug, Default)]
pub struct SearchCache {
    entries: HashMap<(String, String), SearchCacheEntry>,
}

impl SearchCache {
    fn key(state: &Configuration, goal: &Goal) -> (String, String) {
        (state.render(), goal.render())
    }

    pub fn get(&self, state: &Configuration, goal: &Goal) -> Option<&SearchCacheEntry> {
        self.entries.get(&Self::key(state, goal))
    }

    pub fn insert(&mut self, state: &Configuration, goal: &Goal, entry: SearchCacheEntry) {
        debug_assert_eq!(entry.actions.len(), entry.next_states.len());
        self.entries.insert(Self::key(state, goal), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Result of one tree search from the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub action: MoveAction,
    pub next_state: Configuration,
    pub value: Value,
}

/// Successor named by an action when no predictor is consulted.
pub fn next_state_from_action(state: &Configuration, action: &MoveAction) -> Result<Configuration> {
    match action {
        MoveAction::Graph { target_room } => Ok(Configuration::Graph(*target_room)),
        MoveAction::Toh { .. } => toh::force_move(state, action),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn state_goal_text(state: &Configuration, goal: &Goal) -> String {
    format!("{}\nGoal:\n{}", state.render(), goal.render())
}

/// Drives a backend for one problem. Owns the search cache, the tie-break
/// generator and the trace.
pub struct Planner<'a, B: ModuleBackend + ?Sized> {
    backend: &'a mut B,
    cfg: SearchConfig,
    cache: SearchCache,
    rng: ChaCha8Rng,
    record: RunRecord,
    depth: usize,
}

impl<'a, B: ModuleBackend + ?Sized> Planner<'a, B> {
    pub fn new(backend: &'a mut B, cfg: SearchConfig, problem_id: impl Into<String>) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Ok(Planner { backend, cfg, cache: SearchCache::default(), rng, record: RunRecord::new(problem_id), depth: 0 })
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn cache(&self) -> &SearchCache {
        &self.cache
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }

    fn push_event(
        &mut self,
        module: Module,
        input: String,
        output: String,
        parsed: serde_json::Value,
        verdict: Option<bool>,
        value: Option<f64>,
    ) {
        let exchanges = self.backend.take_exchanges();
        let (input_text, output_text) = match exchanges.last() {
            Some(x) => (x.input.clone(), x.output.clone()),
            None => (input, output),
        };
        let temperatures = exchanges.iter().filter_map(|x| x.temperature).collect();
        self.record.counters.module_calls += 1;
        self.record.events.push(ModuleEvent {
            step: self.record.plan.len(),
            depth: self.depth,
            module,
            input_text,
            output_text,
            parsed,
            verdict,
            value,
            temperatures,
            cached: false,
            exchanges,
        });
    }

    fn fail_event(&mut self, module: Module, input: String, err: &Error) {
        self.push_event(module, input, format!("error: {err}"), serde_json::Value::Null, None, None);
    }

    fn decomposer(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>> {
        let input = state_goal_text(state, goal);
        match self.backend.decompose(state, goal) {
            Ok(z) => {
                let out = z.iter().map(Goal::render).collect::<Vec<_>>().join("\n\n");
                self.push_event(Module::TaskDecomposer, input, out, to_json(&z), None, None);
                Ok(z)
            }
            Err(e) => {
                self.fail_event(Module::TaskDecomposer, input, &e);
                Err(e)
            }
        }
    }

    fn actor(&mut self, state: &Configuration, goal: &Goal, feedback: &[Feedback]) -> Result<Vec<MoveAction>> {
        let mut input = state_goal_text(state, goal);
        for f in feedback {
            input.push_str(&format!("\nFeedback on {} {}", f.action.render(), f.text));
        }
        match self.backend.propose(state, goal, feedback, self.cfg.branches) {
            Ok(a) => {
                let out = a.iter().map(MoveAction::render).collect::<Vec<_>>().join("\n");
                self.push_event(Module::Actor, input, out, to_json(&a), None, None);
                Ok(a)
            }
            Err(e) => {
                self.fail_event(Module::Actor, input, &e);
                Err(e)
            }
        }
    }

    fn monitor(&mut self, state: &Configuration, action: &MoveAction) -> Result<crate::types::Verdict> {
        let input = format!("{}\nProposed move:\n{}", state.render(), action.render());
        match self.backend.assess(state, action) {
            Ok(v) => {
                let out = match v.feedback() {
                    Some(f) => f.text.clone(),
                    None => "valid".to_string(),
                };
                self.push_event(Module::Monitor, input, out, to_json(&v), Some(v.is_valid()), None);
                Ok(v)
            }
            Err(e) => {
                self.fail_event(Module::Monitor, input, &e);
                Err(e)
            }
        }
    }

    fn predictor(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        let input = format!("{}\nProposed move:\n{}", state.render(), action.render());
        match self.backend.predict(state, action) {
            Ok(next) => {
                self.push_event(Module::Predictor, input, next.render(), to_json(&next), None, None);
                Ok(next)
            }
            Err(e) => {
                self.fail_event(Module::Predictor, input, &e);
                Err(e)
            }
        }
    }

    fn evaluator(&mut self, state: &Configuration, goal: &Goal) -> Result<Value> {
        let input = state_goal_text(state, goal);
        match self.backend.evaluate(state, goal) {
            Ok(v) => {
                let out = format!("{}", v.steps());
                self.push_event(Module::Evaluator, input, out, to_json(&v), None, Some(v.get()));
                Ok(v)
            }
            Err(e) => {
                self.fail_event(Module::Evaluator, input, &e);
                Err(e)
            }
        }
    }

    fn coordinator(&mut self, state: &Configuration, goal: &Goal) -> Result<bool> {
        let input = state_goal_text(state, goal);
        match self.backend.check(state, goal) {
            Ok(done) => {
                let out = if done { "yes" } else { "no" }.to_string();
                self.push_event(Module::TaskCoordinator, input, out, to_json(&done), Some(done), None);
                Ok(done)
            }
            Err(e) => {
                self.fail_event(Module::TaskCoordinator, input, &e);
                Err(e)
            }
        }
    }

    /// The actor/monitor loop.
    ///
    /// Monitor-approved actions accumulate (deduplicated by canonical text)
    /// until `branches` distinct ones are held or [`MAX_MONITOR_ROUNDS`]
    /// rounds pass; rejected actions feed back into the next actor call.
    /// Falls back to the last round's raw proposals when nothing was
    /// approved. Without a monitor the first proposals are returned as is.
    pub fn propose_action(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<MoveAction>> {
        let branches = self.cfg.branches;
        if !self.cfg.use_monitor {
            let mut proposals = self.actor(state, goal, &[])?;
            self.record.counters.total_proposals += proposals.len() as u64;
            dedup_by_text(&mut proposals);
            proposals.truncate(branches);
            if proposals.is_empty() {
                return Err(Error::EmptyProposal);
            }
            return Ok(proposals);
        }

        let mut approved: Vec<MoveAction> = Vec::new();
        let mut feedback: Vec<Feedback> = Vec::new();
        let mut last: Vec<MoveAction> = Vec::new();
        for _ in 0..MAX_MONITOR_ROUNDS {
            let proposals = self.actor(state, goal, &feedback)?;
            for a in &proposals {
                self.record.counters.total_proposals += 1;
                let verdict = self.monitor(state, a)?;
                if verdict.is_valid() {
                    if !approved.iter().any(|b| b.render() == a.render()) {
                        approved.push(a.clone());
                    }
                } else {
                    self.record.counters.invalid_proposals += 1;
                    if let Some(f) = verdict.into_feedback() {
                        feedback.push(f);
                    }
                }
            }
            last = proposals;
            if approved.len() >= branches {
                break;
            }
        }
        let mut out = if approved.is_empty() { last } else { approved };
        dedup_by_text(&mut out);
        out.truncate(branches);
        if out.is_empty() {
            return Err(Error::EmptyProposal);
        }
        Ok(out)
    }

    fn expand(&mut self, state: &Configuration, goal: &Goal) -> Result<SearchCacheEntry> {
        if self.cfg.use_cache {
            if let Some(entry) = self.cache.get(state, goal) {
                self.record.counters.cache_hits += 1;
                return Ok(entry.clone());
            }
        }
        let proposals = self.propose_action(state, goal)?;
        let mut actions = Vec::with_capacity(proposals.len());
        let mut next_states = Vec::with_capacity(proposals.len());
        for a in proposals {
            let next =
                if self.cfg.use_predictor { self.predictor(state, &a) } else { next_state_from_action(state, &a) };
            match next {
                Ok(n) => {
                    actions.push(a);
                    next_states.push(n);
                }
                // a branch whose successor cannot be predicted is dropped
                Err(Error::IllegalMove(_) | Error::Parse(_) | Error::Invariant(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if actions.is_empty() {
            return Err(Error::Backend("no proposed action has a predictable successor".into()));
        }
        let entry = SearchCacheEntry { actions, next_states };
        if self.cfg.use_cache {
            self.cache.insert(state, goal, entry.clone());
        }
        Ok(entry)
    }

    /// Depth-limited search from `state` starting at `layer` (1-based).
    ///
    /// The first branch whose predicted state meets the goal is returned with
    /// value 0 without expanding further; otherwise inner branches take their subtree's best value and leaves
    /// are scored by the evaluator. Ties are broken uniformly at random.
    pub fn search(&mut self, layer: usize, state: &Configuration, goal: &Goal) -> Result<SearchOutcome> {
        let saved_depth = self.depth;
        self.depth = layer;
        let result = self.search_inner(layer, state, goal);
        self.depth = saved_depth;
        result
    }

    fn search_inner(&mut self, layer: usize, state: &Configuration, goal: &Goal) -> Result<SearchOutcome> {
        let entry = self.expand(state, goal)?;
        let mut values: Vec<(usize, Value)> = Vec::with_capacity(entry.actions.len());
        for (i, next) in entry.next_states.iter().enumerate() {
            if self.coordinator(next, goal)? {
                // goal reached: nothing can beat 0, stop scanning this layer
                return Ok(SearchOutcome {
                    action: entry.actions[i].clone(),
                    next_state: next.clone(),
                    value: Value::GOAL,
                });
            }
            let v = if layer < self.cfg.depth {
                self.search(layer + 1, next, goal)?.value
            } else {
                self.evaluator(next, goal)?
            };
            values.push((i, v));
        }
        let best = values.iter().map(|(_, v)| v.get()).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = values.iter().filter(|(_, v)| v.get() == best).map(|(i, _)| *i).collect();
        let pick = if tied.len() == 1 { tied[0] } else { *tied.choose(&mut self.rng).expect("non-empty") };
        Ok(SearchOutcome {
            action: entry.actions[pick].clone(),
            next_state: entry.next_states[pick].clone(),
            value: values.iter().find(|(i, _)| *i == pick).unwrap().1,
        })
    }

    fn step(&mut self, state: &Configuration, goal: &Goal) -> Result<(MoveAction, Configuration)> {
        if self.cfg.use_search {
            let out = self.search(1, state, goal)?;
            return Ok((out.action, out.next_state));
        }
        let action = self.propose_action(state, goal)?.swap_remove(0);
        let next = if self.cfg.use_predictor {
            self.predictor(state, &action)?
        } else {
            next_state_from_action(state, &action)?
        };
        Ok((action, next))
    }

    fn run(&mut self, initial: &Configuration, goal: &Goal) -> Result<()> {
        if self.coordinator(initial, goal)? {
            self.record.goal_confirmed = true;
            return Ok(());
        }
        let mut goals = if self.cfg.use_decomposer { self.decomposer(initial, goal)? } else { Vec::new() };
        self.record.subgoals = goals.clone();
        goals.push(goal.clone());
        goals.dedup();

        let mut state = initial.clone();
        let mut done = false;
        for z in &goals {
            done = self.coordinator(&state, z)?;
            while !done && self.record.plan.len() < self.cfg.budget {
                let (action, next) = self.step(&state, z)?;
                self.record.plan.push(action, self.cfg.budget);
                state = next;
                done = self.coordinator(&state, z)?;
            }
            if !done {
                break;
            }
        }
        self.record.goal_confirmed = done;
        self.record.budget_exhausted = !done && self.record.plan.len() >= self.cfg.budget;
        Ok(())
    }
}

fn dedup_by_text(actions: &mut Vec<MoveAction>) {
    let mut seen = std::collections::HashSet::new();
    actions.retain(|a| seen.insert(a.render()));
}

/// Runs the full planner on one problem. Backend failures end the run and are
/// recorded on the returned record rather than raised.
pub fn generate_plan<B: ModuleBackend + ?Sized>(
    problem_id: &str,
    initial: &Configuration,
    goal: &Goal,
    cfg: &SearchConfig,
    backend: &mut B,
) -> Result<(Plan, RunRecord)> {
    let mut planner = Planner::new(backend, cfg.clone(), problem_id)?;
    if let Err(e) = planner.run(initial, goal) {
        planner.record.error = Some(e.to_string());
    }
    let record = planner.into_record();
    debug_assert!(record.plan.len() <= cfg.budget);
    debug_assert!(record.counters.invalid_proposals <= record.counters.total_proposals);
    Ok((record.plan.clone(), record))
}
