//! Ground-truth rules of the three-list Tower of Hanoi formulation.
//!
//! Number `0` is the largest "disk": a number may only be placed on a list
//! whose numbers are all smaller, and only the rightmost number of a list may
//! move.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Configuration, MoveAction, Peg, TohState, Verdict};

/// Reason a list move breaks the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleCheck {
    pub rule1: bool,
    pub rule2: bool,
}

impl RuleCheck {
    pub fn is_valid(self) -> bool {
        self.rule1 && self.rule2
    }
}

pub fn check_rules(state: &TohState, number: u32, source: Peg, target: Peg) -> RuleCheck {
    let rule1 = state.top(source) == Some(number);
    let rule2 = state.list(target).iter().all(|&x| number > x);
    RuleCheck { rule1, rule2 }
}

fn expect_toh<'a>(c: &'a Configuration, a: &MoveAction) -> Result<(&'a TohState, u32, Peg, Peg)> {
    match (c, a) {
        (Configuration::Toh(s), MoveAction::Toh { number, source, target }) => Ok((s, *number, *source, *target)),
        _ => Err(Error::IllegalMove(format!("{} does not apply to {}", a.render(), c.render()))),
    }
}

/// Judges a move against both rules, with feedback in the monitor's register.
pub fn is_legal_move(c: &Configuration, a: &MoveAction) -> Verdict {
    let Ok((state, number, source, target)) = expect_toh(c, a) else {
        return Verdict::invalid(a.clone(), format!("{} is not a list move.", a.render()));
    };
    let check = check_rules(state, number, source, target);
    if check.is_valid() {
        return Verdict::valid();
    }
    let mut text = String::new();
    if !check.rule1 {
        if state.list(source).contains(&number) {
            text.push_str(&format!(
                "{number} is not at the rightmost end of list {source}, and the move violates Rule #1.\n"
            ));
        } else {
            text.push_str(&format!("{number} is not in list {source}, and the move violates Rule #1.\n"));
        }
    }
    if !check.rule2 {
        let max = state.list(target).iter().max().copied().unwrap_or_default();
        text.push_str(&format!(
            "Maximum of list {target} is {max}. {number} is not larger than {max}. Hence the move violates Rule #2.\n"
        ));
    }
    let violated = match (check.rule1, check.rule2) {
        (false, false) => "both Rule #1 and Rule #2",
        (false, true) => "Rule #1",
        _ => "Rule #2",
    };
    text.push_str(&format!(
        "Since the Move {number} from list {source} to list {target} violates {violated}, it is invalid."
    ));
    Verdict::invalid(a.clone(), text)
}

/// Applies a legal move.
pub fn apply_move(c: &Configuration, a: &MoveAction) -> Result<Configuration> {
    let (state, number, source, target) = expect_toh(c, a)?;
    if !check_rules(state, number, source, target).is_valid() {
        return Err(Error::IllegalMove(format!("{} from\n{}", a.render(), c.render())));
    }
    let mut lists = state.clone().into_lists();
    lists[source.index()].pop();
    lists[target.index()].push(number);
    Ok(Configuration::Toh(TohState::from_lists_unchecked(lists)))
}

/// Performs a well-formed move even when it breaks the rules: the number is
/// lifted out of its list and inserted into the target in ascending position.
///
/// This is the outcome a world model reports for a rule-breaking move, and
/// the result always satisfies the configuration invariants. Fails only when
/// the number is not in the source list.
pub fn force_move(c: &Configuration, a: &MoveAction) -> Result<Configuration> {
    let (state, number, source, target) = expect_toh(c, a)?;
    let mut lists = state.clone().into_lists();
    let src = &mut lists[source.index()];
    let Some(pos) = src.iter().position(|&x| x == number) else {
        return Err(Error::IllegalMove(format!("{number} is not in list {source}")));
    };
    src.remove(pos);
    let dst = &mut lists[target.index()];
    let at = dst.partition_point(|&x| x < number);
    dst.insert(at, number);
    Ok(Configuration::Toh(TohState::from_lists_unchecked(lists)))
}

/// Every rule-abiding move, in canonical text order.
pub fn legal_moves(state: &TohState) -> Vec<MoveAction> {
    let mut moves = Vec::new();
    for src in Peg::ALL {
        let Some(top) = state.top(src) else { continue };
        for dst in Peg::ALL {
            if dst != src && check_rules(state, top, src, dst).is_valid() {
                moves.push(MoveAction::Toh { number: top, source: src, target: dst });
            }
        }
    }
    moves.sort_by_key(MoveAction::render);
    moves
}

/// Every well-formed move (number taken from the list it is in) that breaks
/// at least one rule, in canonical text order.
pub fn illegal_moves(state: &TohState) -> Vec<MoveAction> {
    let mut moves = Vec::new();
    for src in Peg::ALL {
        for &number in state.list(src) {
            for dst in Peg::ALL {
                if dst != src && !check_rules(state, number, src, dst).is_valid() {
                    moves.push(MoveAction::Toh { number, source: src, target: dst });
                }
            }
        }
    }
    moves.sort_by_key(MoveAction::render);
    moves
}

/// Dense index of a state: `sum(peg(i) * 3^i)`.
pub fn state_index(state: &TohState) -> usize {
    state.assignment().iter().rev().fold(0, |acc, p| acc * 3 + p.index())
}

pub fn state_from_index(n: usize, mut index: usize) -> TohState {
    let pegs: Vec<Peg> = (0..n)
        .map(|_| {
            let p = Peg::from_index(index % 3);
            index /= 3;
            p
        })
        .collect();
    TohState::from_assignment(&pegs)
}

/// All `3^n` legal states, ordered by [`state_index`].
pub fn all_states(n: usize) -> Vec<TohState> {
    (0..3usize.pow(n as u32)).map(|i| state_from_index(n, i)).collect()
}

/// Exact move distance from every state to `goal`, indexed by [`state_index`].
///
/// Moves are reversible, so a single breadth-first sweep outward from the
/// goal covers all sources.
pub fn distance_table(goal: &TohState) -> Vec<u32> {
    let n = goal.n_disks();
    let mut dist = vec![u32::MAX; 3usize.pow(n as u32)];
    let mut queue = VecDeque::new();
    dist[state_index(goal)] = 0;
    queue.push_back(goal.clone());
    while let Some(s) = queue.pop_front() {
        let d = dist[state_index(&s)];
        for m in legal_moves(&s) {
            let Ok(Configuration::Toh(next)) = apply_move(&Configuration::Toh(s.clone()), &m) else {
                unreachable!("legal move failed to apply")
            };
            let i = state_index(&next);
            if dist[i] == u32::MAX {
                dist[i] = d + 1;
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Minimum number of legal moves between two states of the same size.
pub fn bfs_optimal(from: &TohState, goal: &TohState) -> Result<u32> {
    if from.n_disks() != goal.n_disks() {
        return Err(Error::Invariant(format!("states hold {} and {} numbers", from.n_disks(), goal.n_disks())));
    }
    Ok(distance_table(goal)[state_index(from)])
}

/// Intermediate configuration from the goal-recursion strategy.
///
/// Finds the smallest number `m` not yet in its final place at the start of
/// list C, then moves every number blocking it (those to its right in its own
/// list and those larger than it already in C) onto the remaining list, in
/// ascending order. Only defined for the all-in-C goal.
pub fn goal_recursion_subgoal(state: &TohState, goal: &TohState) -> Result<TohState> {
    let n = state.n_disks() as u32;
    if goal != &TohState::stacked(n, Peg::C) {
        return Err(Error::Invariant("goal recursion needs every number ascending in list C".into()));
    }
    let c_list = state.list(Peg::C);
    let placed = c_list.iter().enumerate().take_while(|(i, &x)| x == *i as u32).count() as u32;
    if placed == n {
        return Err(Error::NoSubgoal);
    }
    let m = placed;
    let src = state.peg_of(m).expect("state holds every number");
    debug_assert_ne!(src, Peg::C);
    let aux = src.third(Peg::C);

    let mut lists = state.clone().into_lists();
    let pos = lists[src.index()].iter().position(|&x| x == m).unwrap();
    let mut blocking: Vec<u32> = lists[src.index()].split_off(pos + 1);
    let c = &mut lists[Peg::C.index()];
    blocking.extend(c.iter().copied().filter(|&x| x > m));
    c.retain(|&x| x < m);
    if blocking.is_empty() {
        return Ok(goal.clone());
    }
    let aux_list = &mut lists[aux.index()];
    aux_list.extend(blocking);
    aux_list.sort_unstable();
    Ok(TohState::from_lists_unchecked(lists))
}

/// One evaluation problem: reach all numbers ascending in list C.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TohProblem {
    pub id: String,
    pub n_disks: u32,
    pub initial: TohState,
    pub goal: TohState,
}

/// Every legal start other than the goal itself: 26 for three numbers, 80 for four.
pub fn enumerate_problems(n_disks: u32) -> Result<Vec<TohProblem>> {
    if n_disks < 2 {
        return Err(Error::Config(format!("need at least 2 numbers, got {n_disks}")));
    }
    let goal = TohState::stacked(n_disks, Peg::C);
    Ok(all_states(n_disks as usize)
        .into_iter()
        .filter(|s| s != &goal)
        .enumerate()
        .map(|(i, initial)| TohProblem { id: format!("toh{n_disks}-{i:03}"), n_disks, initial, goal: goal.clone() })
        .collect())
}

/// Starts used as worked examples in the actor prompt, excluded from evaluation.
pub fn default_in_context_starts() -> Vec<TohState> {
    vec![TohState::new(vec![0, 1], vec![2], vec![]).unwrap(), TohState::new(vec![1], vec![0], vec![2]).unwrap()]
}

/// Exported problem set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TohProblemSet {
    pub n_disks: u32,
    pub problems: Vec<TohProblem>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(a: &[u32], b: &[u32], c: &[u32]) -> TohState {
        TohState::new(a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    fn cfg(a: &[u32], b: &[u32], c: &[u32]) -> Configuration {
        Configuration::Toh(st(a, b, c))
    }

    fn mv(n: u32, s: Peg, t: Peg) -> MoveAction {
        MoveAction::toh(n, s, t).unwrap()
    }

    #[test]
    fn legality_examples() {
        let v = is_legal_move(&cfg(&[], &[1], &[0, 2]), &mv(0, Peg::C, Peg::B));
        assert!(!v.is_valid());
        assert!(v.feedback().unwrap().text.contains("violates both Rule #1 and Rule #2"));
        assert!(is_legal_move(&cfg(&[], &[1], &[0, 2]), &mv(2, Peg::C, Peg::B)).is_valid());
        assert!(is_legal_move(&cfg(&[0, 1, 2], &[], &[]), &mv(2, Peg::A, Peg::B)).is_valid());
        let v = is_legal_move(&cfg(&[0, 1, 2], &[], &[]), &mv(1, Peg::A, Peg::B));
        assert!(v.feedback().unwrap().text.contains("violates Rule #1, it is invalid"));
        assert!(!is_legal_move(&Configuration::room(1), &mv(1, Peg::A, Peg::B)).is_valid());
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply_move(&cfg(&[], &[1], &[0, 2]), &mv(2, Peg::C, Peg::B)).unwrap(), cfg(&[], &[1, 2], &[0]));
        assert_eq!(apply_move(&cfg(&[], &[1], &[0, 2]), &mv(1, Peg::B, Peg::A)).unwrap(), cfg(&[1], &[], &[0, 2]));
        let start = cfg(&[0, 1, 2], &[], &[]);
        let next = apply_move(&start, &mv(2, Peg::A, Peg::B)).unwrap();
        assert_eq!(apply_move(&next, &mv(2, Peg::B, Peg::A)).unwrap(), start);
        assert!(matches!(apply_move(&start, &mv(0, Peg::A, Peg::B)), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn force_move_keeps_invariants() {
        let c = cfg(&[], &[1], &[0, 2]);
        assert_eq!(force_move(&c, &mv(0, Peg::C, Peg::B)).unwrap(), cfg(&[], &[0, 1], &[2]));
        assert!(force_move(&c, &mv(1, Peg::A, Peg::B)).is_err());
    }

    #[test]
    fn distances() {
        let goal = TohState::stacked(3, Peg::C);
        assert_eq!(bfs_optimal(&st(&[0, 1, 2], &[], &[]), &goal).unwrap(), 7);
        assert_eq!(bfs_optimal(&st(&[1, 2], &[0], &[]), &goal).unwrap(), 4);
        assert_eq!(bfs_optimal(&goal, &goal).unwrap(), 0);
        for n in 2..=4u32 {
            let g = TohState::stacked(n, Peg::C);
            assert_eq!(bfs_optimal(&TohState::stacked(n, Peg::A), &g).unwrap(), 2u32.pow(n) - 1);
        }
    }

    #[test]
    fn problem_counts() {
        assert_eq!(all_states(3).len(), 27);
        assert_eq!(enumerate_problems(3).unwrap().len(), 26);
        assert_eq!(enumerate_problems(4).unwrap().len(), 80);
        assert!(enumerate_problems(1).is_err());
    }

    #[test]
    fn subgoal_examples() {
        let goal = TohState::stacked(3, Peg::C);
        assert_eq!(goal_recursion_subgoal(&st(&[0, 1], &[2], &[]), &goal).unwrap(), st(&[0], &[1, 2], &[]));
        assert_eq!(goal_recursion_subgoal(&st(&[1], &[0], &[2]), &goal).unwrap(), st(&[1, 2], &[0], &[]));
        assert_eq!(goal_recursion_subgoal(&st(&[0, 1, 2], &[], &[]), &goal).unwrap(), st(&[0], &[1, 2], &[]));
        assert!(matches!(goal_recursion_subgoal(&goal, &goal), Err(Error::NoSubgoal)));
        // nothing blocks the smallest misplaced number: the subgoal is the goal
        let g2 = TohState::stacked(2, Peg::C);
        assert_eq!(goal_recursion_subgoal(&st(&[1], &[0], &[]), &g2).unwrap(), g2);
    }

    #[test]
    fn index_round_trip() {
        for (i, s) in all_states(4).iter().enumerate() {
            assert_eq!(state_index(s), i);
        }
    }
}
