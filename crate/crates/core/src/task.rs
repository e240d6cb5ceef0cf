//! Ground-truth simulator dispatch over the two task families.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::RoomGraph;
use crate::toh;
use crate::types::{Configuration, Goal, MoveAction, Verdict};

#[derive(Debug, Clone)]
pub enum TaskEnv {
    Toh,
    Graph(Arc<RoomGraph>),
}

impl TaskEnv {
    pub fn graph(&self) -> Option<&RoomGraph> {
        match self {
            TaskEnv::Graph(g) => Some(g),
            TaskEnv::Toh => None,
        }
    }

    fn room_of(&self, state: &Configuration) -> Result<(&RoomGraph, u32)> {
        match (self, state) {
            (TaskEnv::Graph(g), Configuration::Graph(r)) => {
                if !g.contains(*r) {
                    return Err(Error::UnknownRoom(*r));
                }
                Ok((g, *r))
            }
            _ => Err(Error::Invariant(format!("{} is not a room of a graph task", state.render()))),
        }
    }

    /// Rule check: list rules for ToH, adjacency for graphs.
    pub fn is_legal(&self, state: &Configuration, action: &MoveAction) -> Result<Verdict> {
        match self {
            TaskEnv::Toh => Ok(toh::is_legal_move(state, action)),
            TaskEnv::Graph(_) => {
                let (g, room) = self.room_of(state)?;
                let MoveAction::Graph { target_room } = action else {
                    return Ok(Verdict::invalid(action.clone(), format!("{} is not a room move.", action.render())));
                };
                if g.neighbors(room)?.contains(target_room) {
                    Ok(Verdict::valid())
                } else {
                    Ok(Verdict::invalid(
                        action.clone(),
                        format!("room {target_room} is not connected to room {room}, so the move is invalid."),
                    ))
                }
            }
        }
    }

    /// Applies a legal action.
    pub fn apply(&self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        match self {
            TaskEnv::Toh => toh::apply_move(state, action),
            TaskEnv::Graph(_) => {
                if !self.is_legal(state, action)?.is_valid() {
                    return Err(Error::IllegalMove(format!("{} from {}", action.render(), state.render())));
                }
                self.outcome(state, action)
            }
        }
    }

    /// The state an action names, legal or not: the target room for graphs,
    /// the forced list move for ToH.
    pub fn outcome(&self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        match (self, action) {
            (TaskEnv::Toh, _) => toh::force_move(state, action),
            (TaskEnv::Graph(g), MoveAction::Graph { target_room }) => {
                self.room_of(state)?;
                if !g.contains(*target_room) {
                    return Err(Error::UnknownRoom(*target_room));
                }
                Ok(Configuration::Graph(*target_room))
            }
            (TaskEnv::Graph(_), _) => Err(Error::IllegalMove(format!("{} is not a room move", action.render()))),
        }
    }

    pub fn legal_actions(&self, state: &Configuration) -> Result<Vec<MoveAction>> {
        match self {
            TaskEnv::Toh => {
                let s = state.as_toh().ok_or_else(|| Error::Invariant("expected a list configuration".into()))?;
                Ok(toh::legal_moves(s))
            }
            TaskEnv::Graph(_) => {
                let (g, room) = self.room_of(state)?;
                Ok(g.neighbors(room)?.iter().map(|&r| MoveAction::to_room(r)).collect())
            }
        }
    }

    /// Well-formed actions that break the rules.
    pub fn illegal_actions(&self, state: &Configuration) -> Result<Vec<MoveAction>> {
        match self {
            TaskEnv::Toh => {
                let s = state.as_toh().ok_or_else(|| Error::Invariant("expected a list configuration".into()))?;
                Ok(toh::illegal_moves(s))
            }
            TaskEnv::Graph(_) => {
                let (g, room) = self.room_of(state)?;
                let adj = g.neighbors(room)?;
                Ok(g.nodes()
                    .iter()
                    .filter(|&&r| r != room && !adj.contains(&r))
                    .map(|&r| MoveAction::to_room(r))
                    .collect())
            }
        }
    }

    /// Whether `state` meets `goal` exactly.
    pub fn satisfies(&self, state: &Configuration, goal: &Goal) -> bool {
        match goal {
            Goal::TargetConfiguration { configuration } => state == configuration,
            Goal::TargetRoom { .. } | Goal::MaxReward { .. } => {
                state.as_room().is_some() && state.as_room() == goal.target_room()
            }
        }
    }

    /// Exact shortest distance to the goal.
    pub fn distance(&self, state: &Configuration, goal: &Goal) -> Result<u32> {
        match self {
            TaskEnv::Toh => {
                let (Some(s), Some(Configuration::Toh(g))) = (state.as_toh(), goal.target_configuration()) else {
                    return Err(Error::Invariant("ToH distance needs list configurations".into()));
                };
                toh::bfs_optimal(s, g)
            }
            TaskEnv::Graph(g) => {
                let (_, room) = self.room_of(state)?;
                let target = goal.target_room().ok_or_else(|| Error::Invariant("graph goal has no room".into()))?;
                g.bfs_distance(room, target)
            }
        }
    }
}
