//! Graph-traversal environments: an undirected room graph with optional
//! rewards, its natural-language description, problem generators and BFS
//! distance oracles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Goal, RoomId};

/// On-disk form: `{nodes:[int], edges:[[int,int]], rewards:{node:value}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<RoomId>,
    pub edges: Vec<(RoomId, RoomId)>,
    #[serde(default)]
    pub rewards: BTreeMap<RoomId, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomGraph {
    nodes: Vec<RoomId>,
    edges: Vec<(RoomId, RoomId)>,
    rewards: BTreeMap<RoomId, u32>,
    adjacency: BTreeMap<RoomId, BTreeSet<RoomId>>,
}

impl RoomGraph {
    pub fn new(nodes: Vec<RoomId>, edges: Vec<(RoomId, RoomId)>, rewards: BTreeMap<RoomId, u32>) -> Result<Self> {
        let mut adjacency: BTreeMap<RoomId, BTreeSet<RoomId>> = BTreeMap::new();
        for &n in &nodes {
            if adjacency.insert(n, BTreeSet::new()).is_some() {
                return Err(Error::Invariant(format!("room {n} listed twice")));
            }
        }
        if adjacency.is_empty() {
            return Err(Error::Invariant("graph has no rooms".into()));
        }
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::Invariant(format!("self-loop on room {a}")));
            }
            for r in [a, b] {
                if !adjacency.contains_key(&r) {
                    return Err(Error::UnknownRoom(r));
                }
            }
            if !adjacency.get_mut(&a).unwrap().insert(b) {
                return Err(Error::Invariant(format!("edge ({a}, {b}) listed twice")));
            }
            adjacency.get_mut(&b).unwrap().insert(a);
        }
        if !rewards.is_empty() {
            if rewards.len() != 2 {
                return Err(Error::Invariant(format!("expected exactly two rewards, got {}", rewards.len())));
            }
            let vals: Vec<u32> = rewards.values().copied().collect();
            if vals[0] == vals[1] || vals.contains(&0) {
                return Err(Error::Invariant("rewards must be distinct positive values".into()));
            }
            for r in rewards.keys() {
                if !adjacency.contains_key(r) {
                    return Err(Error::UnknownRoom(*r));
                }
            }
        }
        let g = RoomGraph { nodes, edges, rewards, adjacency };
        let first = g.nodes[0];
        if g.distances_from(first)?.len() != g.nodes.len() {
            return Err(Error::Invariant("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn from_file(file: GraphFile) -> Result<Self> {
        RoomGraph::new(file.nodes, file.edges, file.rewards)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RoomGraph::from_file(serde_json::from_str(&text)?)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile { nodes: self.nodes.clone(), edges: self.edges.clone(), rewards: self.rewards.clone() }
    }

    /// Fifteen rooms in three five-room communities. Each community is a
    /// clique minus the edge between its two boundary rooms, and each boundary
    /// room has one bridge into a neighbouring community. Rewards of 10 and
    /// 50 sit in different communities.
    pub fn default_graph() -> Self {
        let file: GraphFile =
            serde_json::from_str(include_str!("../data/default_graph.json")).expect("bundled graph parses");
        RoomGraph::from_file(file).expect("bundled graph is valid")
    }

    pub fn nodes(&self) -> &[RoomId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(RoomId, RoomId)] {
        &self.edges
    }

    pub fn rewards(&self) -> &BTreeMap<RoomId, u32> {
        &self.rewards
    }

    pub fn contains(&self, room: RoomId) -> bool {
        self.adjacency.contains_key(&room)
    }

    pub fn with_rewards(&self, rewards: BTreeMap<RoomId, u32>) -> Result<Self> {
        RoomGraph::new(self.nodes.clone(), self.edges.clone(), rewards)
    }

    pub fn neighbors(&self, room: RoomId) -> Result<&BTreeSet<RoomId>> {
        self.adjacency.get(&room).ok_or(Error::UnknownRoom(room))
    }

    pub fn distances_from(&self, start: RoomId) -> Result<BTreeMap<RoomId, u32>> {
        if !self.contains(start) {
            return Err(Error::UnknownRoom(start));
        }
        let mut dist = BTreeMap::from([(start, 0u32)]);
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            let d = dist[&r];
            for &n in &self.adjacency[&r] {
                dist.entry(n).or_insert_with(|| {
                    queue.push_back(n);
                    d + 1
                });
            }
        }
        Ok(dist)
    }

    pub fn bfs_distance(&self, a: RoomId, b: RoomId) -> Result<u32> {
        if !self.contains(b) {
            return Err(Error::UnknownRoom(b));
        }
        Ok(self.distances_from(a)?[&b])
    }

    /// The max-reward goal for this graph.
    pub fn reward_goal(&self) -> Result<Goal> {
        if self.rewards.is_empty() {
            return Err(Error::RewardsMissing);
        }
        Goal::max_reward(self.rewards.clone())
    }

    /// One sentence per edge in edge-list order, then one per reward.
    pub fn render_description(&self) -> String {
        let mut lines: Vec<String> =
            self.edges.iter().map(|(a, b)| format!("room {a} is connected to room {b}.")).collect();
        for (room, value) in &self.rewards {
            lines.push(format!("room {room} has a reward of {value}."));
        }
        lines.join("\n")
    }
}

/// Shortest-path problem between two rooms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteppathProblem {
    pub id: String,
    pub start: RoomId,
    pub target: RoomId,
    pub optimal_steps: u32,
}

/// Reach the largest reward from `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuepathProblem {
    pub id: String,
    pub start: RoomId,
    pub target: RoomId,
    pub optimal_steps: u32,
}

/// Samples `count` ordered (start, target) pairs at exact distance `steps`,
/// without replacement.
pub fn generate_steppath(g: &RoomGraph, steps: u32, count: usize, seed: u64) -> Result<Vec<SteppathProblem>> {
    if !(2..=4).contains(&steps) {
        return Err(Error::Config(format!("steppath distance must be 2, 3 or 4, got {steps}")));
    }
    let mut pairs = Vec::new();
    for &a in g.nodes() {
        for (b, d) in g.distances_from(a)? {
            if d == steps {
                pairs.push((a, b));
            }
        }
    }
    if pairs.len() < count {
        return Err(Error::InsufficientPairs { steps, requested: count, available: pairs.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    Ok(pairs
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(i, (start, target))| SteppathProblem {
            id: format!("steppath{steps}-{i:02}"),
            start,
            target,
            optimal_steps: steps,
        })
        .collect())
}

/// One problem per room that does not hold a reward.
pub fn generate_valuepath(g: &RoomGraph) -> Result<Vec<ValuepathProblem>> {
    let goal = g.reward_goal()?;
    let target = goal.reward_target().expect("max-reward goal has a target");
    let dist = g.distances_from(target)?;
    Ok(g.nodes()
        .iter()
        .filter(|r| !g.rewards().contains_key(r))
        .enumerate()
        .map(|(i, &start)| ValuepathProblem {
            id: format!("valuepath-{i:02}"),
            start,
            target,
            optimal_steps: dist[&start],
        })
        .collect())
}
