//! Rule-exact implementations of the six module roles, with seeded fault
//! injection for degradation studies.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::ModuleBackend;
use crate::error::{Error, Result};
use crate::task::TaskEnv;
use crate::toh;
use crate::types::{Configuration, Feedback, Goal, MoveAction, Peg, TohState, Value, Verdict};

/// Fault-injection knobs. All zero reproduces the ground truth exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseProfile {
    /// Probability that each actor slot is replaced by a rule-breaking move.
    pub invalid_action_rate: f64,
    /// Added to every distance estimate before negation.
    pub evaluator_error_bias: i64,
    /// Probability that the monitor approves a rule-breaking move.
    pub monitor_false_accept_rate: f64,
    pub seed: u64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        NoiseProfile { invalid_action_rate: 0.0, evaluator_error_bias: 0, monitor_false_accept_rate: 0.0, seed: 0 }
    }
}

impl NoiseProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("invalid_action_rate", self.invalid_action_rate),
            ("monitor_false_accept_rate", self.monitor_false_accept_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.invalid_action_rate == 0.0 && self.evaluator_error_bias == 0 && self.monitor_false_accept_rate == 0.0
    }
}

pub struct OracleBackend {
    env: TaskEnv,
    noise: NoiseProfile,
    rng: ChaCha8Rng,
    distances: HashMap<TohState, Arc<Vec<u32>>>,
}

impl OracleBackend {
    pub fn new(env: TaskEnv, noise: NoiseProfile) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(noise.seed);
        OracleBackend { env, noise, rng, distances: HashMap::new() }
    }

    pub fn exact(env: TaskEnv) -> Self {
        OracleBackend::new(env, NoiseProfile::default())
    }

    pub fn toh() -> Self {
        OracleBackend::exact(TaskEnv::Toh)
    }

    /// A fresh instance for another worker, drawing from stream `stream`.
    pub fn fork(&self, stream: u64) -> Self {
        let mut noise = self.noise.clone();
        noise.seed = crate::mix_seed(self.noise.seed, stream);
        OracleBackend { env: self.env.clone(), noise, rng: ChaCha8Rng::seed_from_u64(0), distances: HashMap::new() }
            .reseeded()
    }

    fn reseeded(mut self) -> Self {
        self.rng = ChaCha8Rng::seed_from_u64(self.noise.seed);
        self
    }

    pub fn env(&self) -> &TaskEnv {
        &self.env
    }

    pub fn noise(&self) -> &NoiseProfile {
        &self.noise
    }

    fn distance(&mut self, state: &Configuration, goal: &Goal) -> Result<u32> {
        if let (TaskEnv::Toh, Some(s), Some(Configuration::Toh(g))) =
            (&self.env, state.as_toh(), goal.target_configuration())
        {
            if s.n_disks() != g.n_disks() {
                return Err(Error::Invariant("state and goal hold different numbers".into()));
            }
            let table = self.distances.entry(g.clone()).or_insert_with(|| Arc::new(toh::distance_table(g)));
            return Ok(table[toh::state_index(s)]);
        }
        self.env.distance(state, goal)
    }
}

impl ModuleBackend for OracleBackend {
    fn decompose(&mut self, state: &Configuration, goal: &Goal) -> Result<Vec<Goal>> {
        let (Some(s), Some(Configuration::Toh(g))) = (state.as_toh(), goal.target_configuration()) else {
            return Ok(Vec::new());
        };
        if g != &TohState::stacked(g.n_disks() as u32, Peg::C) {
            return Ok(Vec::new());
        }
        match toh::goal_recursion_subgoal(s, g) {
            Ok(sub) => Ok(vec![Goal::configuration(Configuration::Toh(sub))]),
            Err(Error::NoSubgoal) => Ok(vec![goal.clone()]),
            Err(e) => Err(e),
        }
    }

    fn propose(
        &mut self,
        state: &Configuration,
        goal: &Goal,
        feedback: &[Feedback],
        branches: usize,
    ) -> Result<Vec<MoveAction>> {
        let mut ranked = Vec::new();
        for a in self.env.legal_actions(state)? {
            let next = self.env.apply(state, &a)?;
            let d = self.distance(&next, goal)?;
            ranked.push((d, a.render(), a));
        }
        ranked.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
        let mut out: Vec<MoveAction> = ranked.into_iter().take(branches).map(|(_, _, a)| a).collect();

        if self.noise.invalid_action_rate > 0.0 {
            let candidates: Vec<MoveAction> = self
                .env
                .illegal_actions(state)?
                .into_iter()
                .filter(|a| !feedback.iter().any(|f| &f.action == a))
                .collect();
            for slot in out.iter_mut() {
                let flip = self.rng.random::<f64>() < self.noise.invalid_action_rate;
                if flip {
                    if let Some(bad) = candidates.choose(&mut self.rng) {
                        *slot = bad.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    fn assess(&mut self, state: &Configuration, action: &MoveAction) -> Result<Verdict> {
        let verdict = self.env.is_legal(state, action)?;
        if !verdict.is_valid()
            && self.noise.monitor_false_accept_rate > 0.0
            && self.rng.random::<f64>() < self.noise.monitor_false_accept_rate
        {
            return Ok(Verdict::valid());
        }
        Ok(verdict)
    }

    fn predict(&mut self, state: &Configuration, action: &MoveAction) -> Result<Configuration> {
        if self.env.is_legal(state, action)?.is_valid() {
            self.env.apply(state, action)
        } else {
            self.env.outcome(state, action)
        }
    }

    fn evaluate(&mut self, state: &Configuration, goal: &Goal) -> Result<Value> {
        let d = self.distance(state, goal)? as i64 + self.noise.evaluator_error_bias;
        Ok(Value::from_steps(d.max(0) as f64))
    }

    fn check(&mut self, state: &Configuration, goal: &Goal) -> Result<bool> {
        Ok(self.env.satisfies(state, goal))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RoomGraph;

    fn cfg(a: &[u32], b: &[u32], c: &[u32]) -> Configuration {
        Configuration::toh(a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    fn goal3() -> Goal {
        Goal::configuration(cfg(&[], &[], &[0, 1, 2]))
    }

    #[test]
    fn propose_ranks_by_distance() {
        let mut o = OracleBackend::toh();
        let a = o.propose(&cfg(&[0, 1], &[2], &[]), &goal3(), &[], 2).unwrap();
        assert_eq!(a[0], MoveAction::toh(2, Peg::B, Peg::C).unwrap());
        assert_eq!(a.len(), 2);
        // one move from the goal: the finishing move ranks first
        let a = o.propose(&cfg(&[], &[2], &[0, 1]), &goal3(), &[], 2).unwrap();
        assert_eq!(a[0], MoveAction::toh(2, Peg::B, Peg::C).unwrap());
    }

    #[test]
    fn evaluate_and_bias() {
        let mut o = OracleBackend::toh();
        assert_eq!(o.evaluate(&cfg(&[0, 1, 2], &[], &[]), &goal3()).unwrap().get(), -7.0);
        assert_eq!(o.evaluate(&cfg(&[], &[], &[0, 1, 2]), &goal3()).unwrap(), Value::GOAL);
        let mut biased =
            OracleBackend::new(TaskEnv::Toh, NoiseProfile { evaluator_error_bias: 2, ..Default::default() });
        assert_eq!(biased.evaluate(&cfg(&[0, 1, 2], &[], &[]), &goal3()).unwrap().get(), -9.0);
    }

    #[test]
    fn check_examples() {
        let mut o = OracleBackend::toh();
        assert!(o.check(&cfg(&[], &[], &[0, 1, 2]), &goal3()).unwrap());
        assert!(!o.check(&cfg(&[0, 1], &[2], &[]), &goal3()).unwrap());
        let g = Arc::new(RoomGraph::default_graph());
        let goal = g.reward_goal().unwrap();
        let mut o = OracleBackend::exact(TaskEnv::Graph(g));
        assert!(o.check(&Configuration::room(12), &goal).unwrap());
        assert!(!o.check(&Configuration::room(2), &goal).unwrap());
    }

    #[test]
    fn decompose_returns_single_subgoal() {
        let mut o = OracleBackend::toh();
        let z = o.decompose(&cfg(&[0, 1], &[2], &[]), &goal3()).unwrap();
        assert_eq!(z, vec![Goal::configuration(cfg(&[0], &[1, 2], &[]))]);
        assert_eq!(o.decompose(&cfg(&[], &[], &[0, 1, 2]), &goal3()).unwrap(), vec![goal3()]);
    }

    #[test]
    fn predict_forces_rule_breaking_moves() {
        let mut o = OracleBackend::toh();
        let c = cfg(&[], &[1], &[0, 2]);
        assert_eq!(o.predict(&c, &MoveAction::toh(2, Peg::C, Peg::B).unwrap()).unwrap(), cfg(&[], &[1, 2], &[0]));
        assert_eq!(o.predict(&c, &MoveAction::toh(0, Peg::C, Peg::B).unwrap()).unwrap(), cfg(&[], &[0, 1], &[2]));
        assert!(matches!(o.predict(&c, &MoveAction::toh(0, Peg::A, Peg::B).unwrap()), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn injected_moves_avoid_feedback() {
        let noise = NoiseProfile { invalid_action_rate: 1.0, seed: 5, ..Default::default() };
        let mut o = OracleBackend::new(TaskEnv::Toh, noise);
        let c = cfg(&[0, 1, 2], &[], &[]);
        let bad = toh::illegal_moves(c.as_toh().unwrap());
        let fb: Vec<Feedback> = bad[1..].iter().map(|a| Feedback { text: "no".into(), action: a.clone() }).collect();
        for _ in 0..20 {
            let p = o.propose(&c, &goal3(), &fb, 2).unwrap();
            assert!(p.iter().all(|a| a == &bad[0]));
        }
    }

    #[test]
    fn false_accepts() {
        let noise = NoiseProfile { monitor_false_accept_rate: 1.0, ..Default::default() };
        let mut o = OracleBackend::new(TaskEnv::Toh, noise);
        let c = cfg(&[], &[1], &[0, 2]);
        assert!(o.assess(&c, &MoveAction::toh(0, Peg::C, Peg::B).unwrap()).unwrap().is_valid());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseProfile { invalid_action_rate: 1.5, ..Default::default() }.validate().is_err());
        assert!(NoiseProfile::default().validate().is_ok());
    }
}
