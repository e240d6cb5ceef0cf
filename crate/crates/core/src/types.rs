//! Domain values shared by every module: task states, actions, goals and
//! the verdict/value records produced by the module roles.
//!
//! All types are immutable values. The canonical text rendering is the
//! identity used for cache keys and deduplication, so structured equality
//! and text equality always agree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a room (node) in a graph-traversal task.
pub type RoomId = u32;

/// One of the three lists of the Tower of Hanoi list formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Peg {
    A,
    B,
    C,
}

impl Peg {
    pub const ALL: [Peg; 3] = [Peg::A, Peg::B, Peg::C];

    pub fn index(self) -> usize {
        match self {
            Peg::A => 0,
            Peg::B => 1,
            Peg::C => 2,
        }
    }

    pub fn from_index(i: usize) -> Peg {
        Peg::ALL[i]
    }

    pub fn label(self) -> char {
        match self {
            Peg::A => 'A',
            Peg::B => 'B',
            Peg::C => 'C',
        }
    }

    pub fn from_label(c: char) -> Option<Peg> {
        match c.to_ascii_uppercase() {
            'A' => Some(Peg::A),
            'B' => Some(Peg::B),
            'C' => Some(Peg::C),
            _ => None,
        }
    }

    /// The list that is neither `self` nor `other`.
    pub fn third(self, other: Peg) -> Peg {
        debug_assert_ne!(self, other);
        Peg::from_index(3 - self.index() - other.index())
    }
}

impl fmt::Display for Peg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Three ascending lists that together hold exactly the numbers `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TohState {
    lists: [Vec<u32>; 3],
}

impl TohState {
    /// Builds a state, rejecting lists that do not partition `0..n` or are not
    /// strictly ascending.
    pub fn new(a: Vec<u32>, b: Vec<u32>, c: Vec<u32>) -> Result<Self> {
        let lists = [a, b, c];
        let n: usize = lists.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::Invariant("configuration holds no numbers".into()));
        }
        let mut seen = vec![false; n];
        for (peg, list) in Peg::ALL.iter().zip(&lists) {
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Invariant(format!("list {peg} is not strictly ascending: {list:?}")));
                }
            }
            for &x in list {
                let i = x as usize;
                if i >= n {
                    return Err(Error::Invariant(format!("number {x} is out of range for {n} numbers")));
                }
                if seen[i] {
                    return Err(Error::Invariant(format!("number {x} appears twice")));
                }
                seen[i] = true;
            }
        }
        Ok(TohState { lists })
    }

    /// All `n` numbers in list `peg`, ascending.
    pub fn stacked(n: u32, peg: Peg) -> Self {
        let mut lists: [Vec<u32>; 3] = Default::default();
        lists[peg.index()] = (0..n).collect();
        TohState { lists }
    }

    /// Builds the state in which number `i` sits on `pegs[i]`.
    pub fn from_assignment(pegs: &[Peg]) -> Self {
        let mut lists: [Vec<u32>; 3] = Default::default();
        for (i, p) in pegs.iter().enumerate() {
            lists[p.index()].push(i as u32);
        }
        TohState { lists }
    }

    pub fn assignment(&self) -> Vec<Peg> {
        let mut pegs = vec![Peg::A; self.n_disks()];
        for p in Peg::ALL {
            for &x in self.list(p) {
                pegs[x as usize] = p;
            }
        }
        pegs
    }

    pub fn n_disks(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    pub fn list(&self, peg: Peg) -> &[u32] {
        &self.lists[peg.index()]
    }

    pub fn lists(&self) -> &[Vec<u32>; 3] {
        &self.lists
    }

    pub fn top(&self, peg: Peg) -> Option<u32> {
        self.list(peg).last().copied()
    }

    pub fn peg_of(&self, number: u32) -> Option<Peg> {
        Peg::ALL.into_iter().find(|&p| self.list(p).contains(&number))
    }

    pub(crate) fn into_lists(self) -> [Vec<u32>; 3] {
        self.lists
    }

    /// Builds from lists already known to satisfy the invariants.
    pub(crate) fn from_lists_unchecked(lists: [Vec<u32>; 3]) -> Self {
        debug_assert!(TohState::new(lists[0].clone(), lists[1].clone(), lists[2].clone()).is_ok());
        TohState { lists }
    }

    pub fn render(&self) -> String {
        Peg::ALL.iter().map(|&p| format!("{p} = {}", render_list(self.list(p)))).collect::<Vec<_>>().join("\n")
    }
}

fn render_list(xs: &[u32]) -> String {
    let inner = xs.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
    format!("[{inner}]")
}

impl Serialize for TohState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Lists<'a> {
            #[serde(rename = "A")]
            a: &'a [u32],
            #[serde(rename = "B")]
            b: &'a [u32],
            #[serde(rename = "C")]
            c: &'a [u32],
        }
        Lists { a: &self.lists[0], b: &self.lists[1], c: &self.lists[2] }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TohState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Lists {
            #[serde(rename = "A")]
            a: Vec<u32>,
            #[serde(rename = "B")]
            b: Vec<u32>,
            #[serde(rename = "C")]
            c: Vec<u32>,
        }
        let l = Lists::deserialize(d)?;
        TohState::new(l.a, l.b, l.c).map_err(serde::de::Error::custom)
    }
}

/// A task state: either a Tower of Hanoi list triple or the current room.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    Toh(TohState),
    Graph(RoomId),
}

impl Configuration {
    pub fn toh(a: Vec<u32>, b: Vec<u32>, c: Vec<u32>) -> Result<Self> {
        TohState::new(a, b, c).map(Configuration::Toh)
    }

    pub fn room(room: RoomId) -> Self {
        Configuration::Graph(room)
    }

    pub fn as_toh(&self) -> Option<&TohState> {
        match self {
            Configuration::Toh(s) => Some(s),
            Configuration::Graph(_) => None,
        }
    }

    pub fn as_room(&self) -> Option<RoomId> {
        match self {
            Configuration::Graph(r) => Some(*r),
            Configuration::Toh(_) => None,
        }
    }

    pub fn render(&self) -> String {
        render_configuration(self)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_configuration(c: &Configuration) -> String {
    match c {
        Configuration::Toh(s) => s.render(),
        Configuration::Graph(r) => format!("room {r}"),
    }
}

static LIST_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*([ABC])[ \t]*=[ \t]*\[([^\]\n]*)\]").unwrap());
static ROOM_PHRASE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\broom\s+(\d+)\b").unwrap());

/// Parses a configuration out of free text.
///
/// For the list formulation the last `A = [...]`, `B = [...]` and `C = [...]`
/// lines win, so a reply with reasoning followed by an answer block parses to
/// the answer. Otherwise the last `room <k>` phrase is taken.
pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let mut lists: [Option<Vec<u32>>; 3] = Default::default();
    let mut any = false;
    for cap in LIST_LINE.captures_iter(text) {
        any = true;
        let peg = Peg::from_label(cap[1].chars().next().unwrap()).unwrap();
        let body = cap[2].trim();
        let items = if body.is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad list element {:?} in list {peg}", t.trim())))
                })
                .collect::<Result<Vec<_>>>()?
        };
        lists[peg.index()] = Some(items);
    }
    if any {
        let [a, b, c] = lists;
        return match (a, b, c) {
            (Some(a), Some(b), Some(c)) => Configuration::toh(a, b, c),
            _ => Err(Error::Parse("configuration must name all of A, B and C".into())),
        };
    }
    if let Some(cap) = ROOM_PHRASE.captures_iter(text).last() {
        let room = cap[1].parse::<RoomId>().map_err(|_| Error::Parse(format!("room id out of range: {}", &cap[1])))?;
        return Ok(Configuration::Graph(room));
    }
    Err(Error::Parse("no configuration found".into()))
}

/// A task action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveAction {
    Toh { number: u32, source: Peg, target: Peg },
    Graph { target_room: RoomId },
}

impl MoveAction {
    pub fn toh(number: u32, source: Peg, target: Peg) -> Result<Self> {
        if source == target {
            return Err(Error::Invariant(format!("move of {number} has identical source and target {source}")));
        }
        Ok(MoveAction::Toh { number, source, target })
    }

    pub fn to_room(room: RoomId) -> Self {
        MoveAction::Graph { target_room: room }
    }

    /// Canonical form, e.g. `Move 2 from B to C.` or `Move to room 7.`
    pub fn render(&self) -> String {
        match self {
            MoveAction::Toh { number, source, target } => format!("Move {number} from {source} to {target}."),
            MoveAction::Graph { target_room } => format!("Move to room {target_room}."),
        }
    }

    /// Long form with list labels, e.g. `Move 2 from list B to list C.`
    pub fn render_with_lists(&self) -> String {
        match self {
            MoveAction::Toh { number, source, target } => {
                format!("Move {number} from list {source} to list {target}.")
            }
            MoveAction::Graph { .. } => self.render(),
        }
    }
}

impl fmt::Display for MoveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

const LINE_PREFIX: &str = r"^[ \t]*(?:[-*][ \t]*)?(?:(?:step[ \t]*)?\d+[.):][ \t]*)?";

static TOH_MOVE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?im){LINE_PREFIX}move[ \t]+(\d+)[ \t]+from[ \t]+(?:list[ \t]+)?([abc])\b[ \t]+to[ \t]+(?:list[ \t]+)?([abc])\b"
    ))
    .unwrap()
});
static GRAPH_MOVE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"(?im){LINE_PREFIX}move[ \t]+to[ \t]+room[ \t]+(\d+)\b")).unwrap());

/// Parses every action line in `text`, in order of appearance.
///
/// Lines may carry a numbering prefix (`1. `, `Step 2: `) and list labels may
/// be written as `B` or `list B`. Lines whose source equals their target are
/// skipped.
pub fn parse_actions(text: &str) -> Result<Vec<MoveAction>> {
    let mut found: Vec<(usize, MoveAction)> = Vec::new();
    for cap in TOH_MOVE.captures_iter(text) {
        let Ok(number) = cap[1].parse::<u32>() else { continue };
        let src = Peg::from_label(cap[2].chars().next().unwrap()).unwrap();
        let dst = Peg::from_label(cap[3].chars().next().unwrap()).unwrap();
        if let Ok(a) = MoveAction::toh(number, src, dst) {
            found.push((cap.get(0).unwrap().start(), a));
        }
    }
    for cap in GRAPH_MOVE.captures_iter(text) {
        let Ok(room) = cap[1].parse::<RoomId>() else { continue };
        found.push((cap.get(0).unwrap().start(), MoveAction::to_room(room)));
    }
    if found.is_empty() {
        return Err(Error::Parse("no line matches the move grammar".into()));
    }
    found.sort_by_key(|(pos, _)| *pos);
    Ok(found.into_iter().map(|(_, a)| a).collect())
}

/// Parses the first action line in `text`.
pub fn parse_action(text: &str) -> Result<MoveAction> {
    parse_actions(text).map(|mut v| v.swap_remove(0))
}

/// `[room, reward]` pairs: integer map keys do not survive the buffering of
/// an internally tagged enum.
mod reward_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::RoomId;

    pub fn serialize<S: Serializer>(m: &BTreeMap<RoomId, u32>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(&r, &v)| (r, v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<RoomId, u32>, D::Error> {
        Ok(Vec::<(RoomId, u32)>::deserialize(d)?.into_iter().collect())
    }
}

/// Target condition for a (sub)goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Goal {
    TargetConfiguration {
        configuration: Configuration,
    },
    TargetRoom {
        room: RoomId,
    },
    MaxReward {
        #[serde(with = "reward_pairs")]
        rewards: BTreeMap<RoomId, u32>,
    },
}

impl Goal {
    pub fn configuration(c: Configuration) -> Self {
        Goal::TargetConfiguration { configuration: c }
    }

    pub fn room(room: RoomId) -> Self {
        Goal::TargetRoom { room }
    }

    pub fn max_reward(rewards: BTreeMap<RoomId, u32>) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::Invariant("max-reward goal needs at least one reward".into()));
        }
        Ok(Goal::MaxReward { rewards })
    }

    /// The room holding the largest reward (smallest id on ties).
    pub fn reward_target(&self) -> Option<RoomId> {
        match self {
            Goal::MaxReward { rewards } => {
                rewards.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(r, _)| *r)
            }
            _ => None,
        }
    }

    pub fn target_configuration(&self) -> Option<&Configuration> {
        match self {
            Goal::TargetConfiguration { configuration } => Some(configuration),
            _ => None,
        }
    }

    /// The room a graph goal is reached at.
    pub fn target_room(&self) -> Option<RoomId> {
        match self {
            Goal::TargetRoom { room } => Some(*room),
            Goal::MaxReward { .. } => self.reward_target(),
            Goal::TargetConfiguration { configuration } => configuration.as_room(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Goal::TargetConfiguration { configuration } => configuration.render(),
            Goal::TargetRoom { room } => format!("room {room}"),
            Goal::MaxReward { .. } => "the room with the largest reward".to_string(),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Monitor explanation attached to a rejected action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub text: String,
    pub action: MoveAction,
}

/// Validity assessment of one action; feedback is present iff invalid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feedback: Option<Feedback>,
}

impl Verdict {
    pub fn valid() -> Self {
        Verdict { valid: true, feedback: None }
    }

    pub fn invalid(action: MoveAction, text: impl Into<String>) -> Self {
        let mut text = text.into();
        if text.trim().is_empty() {
            text = format!("{} is invalid.", action.render());
        }
        Verdict { valid: false, feedback: Some(Feedback { text, action }) }
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn feedback(&self) -> Option<&Feedback> {
        self.feedback.as_ref()
    }

    pub fn into_feedback(self) -> Option<Feedback> {
        self.feedback
    }
}

/// State value: the negated estimate of the remaining number of moves, so
/// that the goal is the maximum at 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(f64);

impl Value {
    pub const GOAL: Value = Value(0.0);

    pub fn from_steps(steps: f64) -> Self {
        Value(-steps.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn steps(self) -> f64 {
        -self.0
    }
}

/// Actions emitted by the planner, never longer than the budget.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    actions: Vec<MoveAction>,
}

impl Plan {
    pub fn new() -> Self {
        Plan::default()
    }

    pub fn from_actions(actions: Vec<MoveAction>, budget: usize) -> Result<Self> {
        if actions.len() > budget {
            return Err(Error::Invariant(format!("plan of {} actions exceeds budget {budget}", actions.len())));
        }
        Ok(Plan { actions })
    }

    pub(crate) fn push(&mut self, action: MoveAction, budget: usize) {
        assert!(self.actions.len() < budget, "plan budget exceeded");
        self.actions.push(action);
    }

    pub fn actions(&self) -> &[MoveAction] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Search and ablation settings for one plan generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub branches: usize,
    pub depth: usize,
    pub budget: usize,
    pub use_decomposer: bool,
    pub use_search: bool,
    pub use_predictor: bool,
    pub use_monitor: bool,
    pub use_cache: bool,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            branches: 2,
            depth: 2,
            budget: 10,
            use_decomposer: true,
            use_search: true,
            use_predictor: true,
            use_monitor: true,
            use_cache: true,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branches == 0 || self.depth == 0 || self.budget == 0 {
            return Err(Error::Config(format!(
                "branches, depth and budget must be positive (got B={}, L={}, T={})",
                self.branches, self.depth, self.budget
            )));
        }
        Ok(())
    }
}
