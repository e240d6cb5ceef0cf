//! Offline stand-in for a chat model: reads prompts written with the built-in
//! templates, solves the instance with the oracle, and replies in the format
//! the templates ask for.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use regex::Regex;

use super::client::{ChatMessage, ChatRequest, Transport, TransportFailure};
use crate::backend::ModuleBackend;
use crate::graph::RoomGraph;
use crate::oracle::{NoiseProfile, OracleBackend};
use crate::task::TaskEnv;
use crate::types::{parse_action, parse_configuration, Configuration, Feedback, Goal, MoveAction};

static EDGE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^room (\d+) is connected to room (\d+)\.$").unwrap());
static REWARD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^room (\d+) has a reward of (\d+)\.$").unwrap());
static YOU_ARE_IN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"You are in room (\d+)\.").unwrap());
static GOAL_ROOM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"The goal is to reach room (\d+)\.").unwrap());
static BUDGET: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"never more than (\d+) moves").unwrap());

const MAP_MARKER: &str = "This is the map of the building:\n";
const TASK_MARKER: &str = "Here is the task:";
const GOAL_MARKER: &str = "This is the goal configuration:";

/// Chat model double answering from ground truth, with optional oracle noise.
pub struct SimulatedModel {
    noise: NoiseProfile,
    heuristic_reply: String,
    oracles: Mutex<HashMap<String, OracleBackend>>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl SimulatedModel {
    pub fn new(noise: NoiseProfile) -> Self {
        SimulatedModel {
            noise,
            heuristic_reply: super::PromptSet::builtin()
                .get(super::PromptTask::Toh, "evaluator_heuristic_reply")
                .map(|t| t.text.clone())
                .unwrap_or_default(),
            oracles: Mutex::new(HashMap::new()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn exact() -> Arc<Self> {
        Arc::new(SimulatedModel::new(NoiseProfile::default()))
    }

    /// Every request received so far.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn with_oracle<T>(&self, env: TaskEnv, key: &str, f: impl FnOnce(&mut OracleBackend) -> T) -> T {
        let mut map = self.oracles.lock().unwrap_or_else(|e| e.into_inner());
        let oracle = map.entry(key.to_string()).or_insert_with(|| OracleBackend::new(env, self.noise.clone()));
        f(oracle)
    }

    fn answer(&self, messages: &[ChatMessage]) -> Result<String, String> {
        let first = &messages.first().ok_or("no messages")?.content;
        if first.contains(MAP_MARKER) {
            self.answer_graph(first, messages)
        } else {
            self.answer_toh(first, messages)
        }
    }

    fn answer_toh(&self, first: &str, messages: &[ChatMessage]) -> Result<String, String> {
        let last = &messages.last().unwrap().content;
        let oracle = |f: &mut dyn FnMut(&mut OracleBackend) -> Result<String, String>| {
            self.with_oracle(TaskEnv::Toh, "toh", |o| f(o))
        };
        if first.contains("What heuristic function") {
            if messages.len() == 1 {
                return Ok(self.heuristic_reply.clone());
            }
            let (state, goal) = current_and_goal(last)?;
            let v = oracle(&mut |o| o.evaluate(&state, &goal).map(|v| v.steps().to_string()).map_err(err))?;
            return Ok(format!(
                "The minimum number of valid moves required to reach the goal configuration from the current configuration is {v}."
            ));
        }
        let task = task_section(first);
        if first.contains("provide the solution step by step") {
            let (state, goal) = current_and_goal(task)?;
            let budget = budget_of(task)?;
            return oracle(&mut |o| solve(o, &state, &goal, budget, true));
        }
        if first.contains("generate a single subgoal") {
            let (state, goal) = current_and_goal(task)?;
            return oracle(&mut |o| {
                let sub = o.decompose(&state, &goal).map_err(err)?;
                let sub = sub.into_iter().next().ok_or("no subgoal")?;
                Ok(format!("Subgoal:\n{}", sub.render()))
            });
        }
        if first.contains("Give me only") {
            let (state, goal) = current_and_goal(task)?;
            let branches = count_of(task);
            let feedback = feedback_turns(messages);
            let moves =
                oracle(&mut |o| o.propose(&state, &goal, &feedback, branches).map(|a| numbered(&a)).map_err(err))?;
            return Ok(moves);
        }
        if first.contains("check if the proposed move") {
            let (state, action) = state_and_move(task)?;
            return oracle(&mut |o| {
                let v = o.assess(&state, &action).map_err(err)?;
                Ok(match v.feedback() {
                    None => format!(
                        "Since the {} satisfies both Rule #1 and Rule #2, it is valid.",
                        action.render_with_lists()
                    ),
                    Some(fb) => fb.text.clone(),
                })
            });
        }
        if first.contains("predict the configuration of the three lists") {
            let (state, action) = state_and_move(task)?;
            return oracle(&mut |o| o.predict(&state, &action).map(|c| c.render()).map_err(err));
        }
        if first.contains("matches the goal configuration or not") {
            let (state, goal) = current_and_goal(task)?;
            return oracle(&mut |o| {
                Ok(if o.check(&state, &goal).map_err(err)? {
                    "The current configuraton matches the goal configuration. Hence yes.".to_string()
                } else {
                    "The current configuraton doesn't match the goal configuration. Hence no.".to_string()
                })
            });
        }
        Err("unrecognized prompt".into())
    }

    fn answer_graph(&self, first: &str, messages: &[ChatMessage]) -> Result<String, String> {
        let map_start = first.find(MAP_MARKER).unwrap() + MAP_MARKER.len();
        let map_text = &first[map_start..];
        let map_text = &map_text[..map_text.find("\n\n").unwrap_or(map_text.len())];
        let graph = Arc::new(parse_map(map_text)?);
        let task = task_section(first);
        let state = Configuration::room(capture_u32(&YOU_ARE_IN, task).ok_or("no current room")?);
        let goal = match capture_u32(&GOAL_ROOM, task) {
            Some(r) => Goal::room(r),
            None => graph.reward_goal().map_err(err)?,
        };
        let env = TaskEnv::Graph(graph);
        let oracle = |f: &mut dyn FnMut(&mut OracleBackend) -> Result<String, String>| {
            self.with_oracle(env.clone(), map_text, |o| f(o))
        };
        if first.contains("provide the solution step by step") {
            let budget = budget_of(task)?;
            return oracle(&mut |o| solve(o, &state, &goal, budget, false));
        }
        if first.contains("single intermediate room") {
            let room = goal.target_room().ok_or("goal has no room")?;
            return Ok(format!("Subgoal: room {room}"));
        }
        if first.contains("Give me only") {
            let branches = count_of(task);
            let feedback = feedback_turns(messages);
            return oracle(&mut |o| o.propose(&state, &goal, &feedback, branches).map(|a| numbered(&a)).map_err(err));
        }
        if first.contains("check whether the proposed move") {
            let action = proposed_move(task)?;
            return oracle(&mut |o| {
                let v = o.assess(&state, &action).map_err(err)?;
                Ok(match v.feedback() {
                    None => format!("{} is connected to {}, so the move is valid.", target_of(&action), state),
                    Some(fb) => fb.text.clone(),
                })
            });
        }
        if first.contains("predict the room you will be in") {
            let action = proposed_move(task)?;
            return oracle(&mut |o| o.predict(&state, &action).map(|c| format!("You will be in {c}.")).map_err(err));
        }
        if first.contains("predict the minimum number of moves") {
            return oracle(&mut |o| {
                let v = o.evaluate(&state, &goal).map_err(err)?;
                Ok(format!(
                    "The minimum number of moves required to reach the goal from the current room is {}.",
                    v.steps()
                ))
            });
        }
        if first.contains("whether the current room is the goal room") {
            return oracle(&mut |o| {
                Ok(if o.check(&state, &goal).map_err(err)? {
                    "The current room is the goal room. Hence yes.".to_string()
                } else {
                    "The current room is not the goal room. Hence no.".to_string()
                })
            });
        }
        Err("unrecognized prompt".into())
    }
}

impl Transport for SimulatedModel {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportFailure> {
        self.requests.lock().unwrap_or_else(|e| e.into_inner()).push(request.clone());
        self.answer(&request.messages).map_err(|m| TransportFailure::Status { code: 400, body: m })
    }
}

fn err(e: crate::error::Error) -> String {
    e.to_string()
}

fn task_section(text: &str) -> &str {
    text.rfind(TASK_MARKER).map(|i| &text[i + TASK_MARKER.len()..]).unwrap_or(text)
}

fn current_and_goal(text: &str) -> Result<(Configuration, Goal), String> {
    let i = text.find(GOAL_MARKER).ok_or("no goal configuration")?;
    let state = parse_configuration(&text[..i]).map_err(err)?;
    let goal = parse_configuration(&text[i..]).map_err(err)?;
    Ok((state, Goal::configuration(goal)))
}

fn proposed_move(text: &str) -> Result<MoveAction, String> {
    let i = text.find("Proposed move:").ok_or("no proposed move")?;
    parse_action(&text[i..]).map_err(err)
}

fn state_and_move(text: &str) -> Result<(Configuration, MoveAction), String> {
    let i = text.find("Proposed move:").ok_or("no proposed move")?;
    Ok((parse_configuration(&text[..i]).map_err(err)?, proposed_move(text)?))
}

fn count_of(text: &str) -> usize {
    const WORDS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    let Some(i) = text.find("Give me only ") else { return 2 };
    let word = text[i + 13..].split_whitespace().next().unwrap_or("");
    WORDS.iter().position(|w| *w == word).map(|p| p + 1).or_else(|| word.parse().ok()).unwrap_or(2)
}

fn budget_of(text: &str) -> Result<usize, String> {
    capture_u32(&BUDGET, text).map(|b| b as usize).ok_or_else(|| "no move budget".to_string())
}

fn capture_u32(re: &Regex, text: &str) -> Option<u32> {
    re.captures(text).and_then(|c| c[1].parse().ok())
}

fn feedback_turns(messages: &[ChatMessage]) -> Vec<Feedback> {
    messages[1..]
        .chunks(2)
        .filter_map(|pair| match pair {
            [a, u] => parse_action(&a.content).ok().map(|action| Feedback { text: u.content.clone(), action }),
            _ => None,
        })
        .collect()
}

fn numbered(actions: &[MoveAction]) -> String {
    actions.iter().enumerate().map(|(i, a)| format!("{}. {}", i + 1, a.render())).collect::<Vec<_>>().join("\n")
}

fn target_of(action: &MoveAction) -> String {
    match action {
        MoveAction::Graph { target_room } => format!("room {target_room}"),
        other => other.render(),
    }
}

fn parse_map(text: &str) -> Result<RoomGraph, String> {
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for c in EDGE.captures_iter(text) {
        let (a, b) = (c[1].parse().map_err(|_| "bad room")?, c[2].parse().map_err(|_| "bad room")?);
        nodes.extend([a, b]);
        edges.push((a, b));
    }
    let mut rewards = BTreeMap::new();
    for c in REWARD.captures_iter(text) {
        let room = c[1].parse().map_err(|_| "bad room")?;
        nodes.insert(room);
        rewards.insert(room, c[2].parse().map_err(|_| "bad reward")?);
    }
    RoomGraph::new(nodes.into_iter().collect(), edges, rewards).map_err(err)
}

/// Greedy rollout with the (possibly noisy) actor, one move at a time.
fn solve(
    o: &mut OracleBackend,
    start: &Configuration,
    goal: &Goal,
    budget: usize,
    show_lists: bool,
) -> Result<String, String> {
    let mut state = start.clone();
    let mut out = Vec::new();
    for _ in 0..budget {
        if o.env().satisfies(&state, goal) {
            break;
        }
        let Some(a) = o.propose(&state, goal, &[], 1).map_err(err)?.into_iter().next() else { break };
        state = o.env().outcome(&state, &a).map_err(err)?;
        out.push(if show_lists { format!("{}\n{}", a.render(), state.render()) } else { a.render() });
    }
    Ok(out.join(if show_lists { "\n\n" } else { "\n" }))
}
