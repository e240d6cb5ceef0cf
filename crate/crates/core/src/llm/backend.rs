use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::client::{ChatMessage, LlmClient};
use super::parse::{parse_subgoal, parse_value, parse_verdict, parse_yes_no};
use super::prompts::{count_word, PromptSet, PromptTask};
use crate::backend::{Exchange, ModuleBackend};
use crate::error::{Error, Result};
use crate::task::TaskEnv;
use crate::types::{parse_actions, parse_configuration, Configuration, Feedback, Goal, MoveAction, Value, Verdict};

/// Baseline prompting regime for single-completion solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionMode {
    ZeroShot,
    Icl,
}

/// Plays every module role by prompting a chat model.
///
/// Instances for parallel workers come from [`LlmBackend::fork`]; they share
/// the client (and its concurrency cap) and the evaluator's heuristic reply.
pub struct LlmBackend {
    client: Arc<LlmClient>,
    prompts: Arc<PromptSet>,
    task: PromptTask,
    graph_text: String,
    heuristic: Arc<Mutex<Option<String>>>,
    exchanges: Vec<Exchange>,
}

impl LlmBackend {
    pub fn new(client: Arc<LlmClient>, prompts: Arc<PromptSet>, env: &TaskEnv) -> Self {
        let (task, graph_text) = match env {
            TaskEnv::Toh => (PromptTask::Toh, String::new()),
            TaskEnv::Graph(g) => (PromptTask::Graph, g.render_description()),
        };
        LlmBackend { client, prompts, task, graph_text, heuristic: Arc::new(Mutex::new(None)), exchanges: Vec::new() }
    }

    pub fn fork(&self) -> Self {
        LlmBackend {
            client: self.client.clone(),
            prompts: self.prompts.clone(),
            task: self.task,
            graph_text: self.graph_text.clone(),
            heuristic: self.heuristic.clone(),
            exchanges: Vec::new(),
        }
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }

    fn render(&self, name: &str, extra: &[(&str, &str)], state: &Configuration, goal: Option<&Goal>) -> Result<String> {
        let current = state.render();
        let goal = goal.map(Goal::render).unwrap_or_default();
        let mut values: Vec<(&str, &str)> =
            vec![("current", current.as_str()), ("goal", goal.as_str()), ("graph", self.graph_text.as_str())];
        values.extend_from_slice(extra);
        self.prompts.render(self.task, name, &values)
    }

    fn call(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String> {
        let reply = self.client.complete(messages, temperature)?.text;
        self.exchanges.push(Exchange {
            input: transcript(messages),
            output: reply.clone(),
            temperature: Some(temperature),
        });
        Ok(reply)
    }

    /// One call, plus one retry at the same temperature if the reply does not parse.
    fn call_parsed<T>(&mut self, messages: &[ChatMessage], parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        let t = self.client.config().temperature;
        let reply = self.call(messages, t)?;
        match parse(&reply) {
            Err(e) if is_reply_error(&e) => {
                log::debug!("unparseable reply ({e}); asking once more");
                let reply = self.call(messages, t)?;
                parse(&reply)
            }
            other => other,
        }
    }

    fn move_text(&self, action: &MoveAction, with_lists: bool) -> String {
        if with_lists {
            action.render_with_lists()
        } else {
            action.render()
        }
    }

    fn heuristic_reply(&mut self, question: &str) -> Result<String> {
        let shared = self.heuristic.clone();
        let mut slot = shared.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(h) = slot.as_ref() {
            return Ok(h.clone());
        }
        let t = self.client.config().temperature;
        let reply = self.call(&[ChatMessage::user(question)], t)?;
        *slot = Some(reply.clone());
        Ok(reply)
    }

    /// Seeds the cached heuristic reply, skipping the model call for it.
    pub fn set_heuristic(&self, reply: impl Into<String>) {
        *self.heuristic.lock().unwrap_or_else(|e| e.into_inner()) = Some(reply.into());
    }

    /// Baseline: the whole move sequence from one completion.
    pub fn full_solution(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        mode: SolutionMode,
        budget: usize,
    ) -> Result<Vec<MoveAction>> {
        let name = match (mode, self.task, goal) {
            (SolutionMode::ZeroShot, _, _) => "solution_zero_shot",
            (SolutionMode::Icl, PromptTask::Toh, _) => "solution_icl",
            (SolutionMode::Icl, PromptTask::Graph, Goal::MaxReward { .. }) => "solution_icl_valuepath",
            (SolutionMode::Icl, PromptTask::Graph, _) => "solution_icl_steppath",
        };
        let budget = budget.to_string();
        let prompt = self.render(name, &[("budget", budget.as_str())], state, Some(goal))?;
        self.call_parsed(&[ChatMessage::user(prompt)], parse_actions)
    }
}

fn fit_shape(state: &Configuration, parsed: Configuration) -> Result<Configuration> {
    match (state, &parsed) {
        (Configuration::Toh(s), Configuration::Toh(p)) if s.n_disks() == p.n_disks() => Ok(parsed),
        (Configuration::Graph(_), Configuration::Graph(_)) => Ok(parsed),
        _ => Err(Error::Invariant(format!(
            "predicted configuration {:?} does not match the shape of {:?}",
            parsed.render(),
            state.render()
        ))),
    }
}

fn is_reply_error(e: &Error) -> bool {
    matches!(e, Error::Parse(_) | Error::UnparseableValue(_) | Error::UnparseableVerdict(_) | Error::Invariant(_))
}

fn transcript(messages: &[ChatMessage]) -> String {
    if let [only] = messages {
        return only.content.clone();
    }
    messages.iter().map(|m| format!("{}: {}", m.role.to_uppercase(), m.content)).collect::<Vec<_>>().join("\n\n")
}

impl ModuleBackend for LlmBackend {
    fn decompose(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>> {
        let prompt = self.render("task_decomposer", &[], state, Some(goal))?;
        let sub = self.call_parsed(&[ChatMessage::user(prompt)], |r| {
            let g = parse_subgoal(r)?;
            match (&g, state) {
                (Goal::TargetConfiguration { configuration: Configuration::Toh(c) }, Configuration::Toh(s))
                    if c.n_disks() == s.n_disks() =>
                {
                    Ok(g)
                }
                (Goal::TargetRoom { .. }, Configuration::Graph(_)) => Ok(g),
                _ => Err(Error::Invariant(format!("subgoal {:?} does not fit the task", g.render()))),
            }
        })?;
        Ok(vec![sub])
    }

    fn propose(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        feedback: &[Feedback],
        branches: usize,
    ) -> Result<Vec<MoveAction>> {
        let count = count_word(branches);
        let prompt = self.render("actor", &[("count", count.as_str())], state, Some(goal))?;
        let mut messages = vec![ChatMessage::user(prompt)];
        for fb in feedback {
            messages.push(ChatMessage::assistant(fb.action.render()));
            messages.push(ChatMessage::user(fb.text.clone()));
        }
        let mut found: Vec<MoveAction> = Vec::new();
        let attempts = self.client.config().max_actor_attempts;
        for attempt in 0..attempts {
            let t = self.client.config().actor_temperature(attempt);
            let reply = self.call(&messages, t)?;
            for a in parse_actions(&reply).unwrap_or_default() {
                if !found.contains(&a) {
                    found.push(a);
                }
            }
            if found.len() >= branches {
                found.truncate(branches);
                return Ok(found);
            }
            log::debug!("actor attempt {attempt}: {} distinct of {branches}", found.len());
        }
        if found.is_empty() {
            return Err(Error::EmptyProposal);
        }
        Ok(found)
    }

    fn assess(&mut self, state: &Configuration, action: &MoveAction) -> Result<Verdict> {
        let mv = self.move_text(action, false);
        let prompt = self.render("monitor", &[("move", mv.as_str())], state, None)?;
        let (valid, reply) =
            self.call_parsed(&[ChatMessage::user(prompt)], |r| parse_verdict(r).map(|v| (v, r.to_string())))?;
        Ok(if valid { Verdict::valid() } else { Verdict::invalid(action.clone(), reply) })
    }

    fn predict(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        let mv = self.move_text(action, self.task == PromptTask::Toh);
        let prompt = self.render("predictor", &[("move", mv.as_str())], state, None)?;
        self.call_parsed(&[ChatMessage::user(prompt)], |r| fit_shape(state, parse_configuration(r)?))
    }

    fn evaluate(&mut self, state: &Configuration, goal: &Goal) -> Result<Value> {
        let messages = match self.task {
            PromptTask::Toh => {
                let question = self.prompts.render(self.task, "evaluator_heuristic", &[])?;
                let heuristic = self.heuristic_reply(&question)?;
                let ask = self.render("evaluator", &[], state, Some(goal))?;
                vec![ChatMessage::user(question), ChatMessage::assistant(heuristic), ChatMessage::user(ask)]
            }
            PromptTask::Graph => vec![ChatMessage::user(self.render("evaluator", &[], state, Some(goal))?)],
        };
        let n = self.call_parsed(&messages, parse_value)?;
        Ok(Value::from_steps(n as f64))
    }

    fn check(&mut self, state: &Configuration, goal: &Goal) -> Result<bool> {
        let prompt = self.render("task_coordinator", &[], state, Some(goal))?;
        self.call_parsed(&[ChatMessage::user(prompt)], parse_yes_no)
    }

    fn take_exchanges(&mut self) -> Vec<Exchange> {
        std::mem::take(&mut self.exchanges)
    }
}

/// Baseline runner: parses the whole move sequence of one completion.
/// Returns the moves with the raw exchanges made.
pub fn llm_full_solution(
    backend: &mut LlmBackend,
    state: &Configuration,
    goal: &Goal,
    mode: SolutionMode,
    budget: usize,
) -> Result<(Vec<MoveAction>, Vec<Exchange>)> {
    let out = backend.full_solution(state, goal, mode, budget);
    let exchanges = backend.take_exchanges();
    out.map(|a| (a, exchanges))
}
