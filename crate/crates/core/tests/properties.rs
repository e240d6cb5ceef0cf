use std::collections::HashSet;
use std::sync::Arc;

use pfc_core::graph::RoomGraph;
use pfc_core::harness::{replay_plan, summarize, BackendKind, Method, Problem, ProblemResult, TaskKind};
use pfc_core::llm::{parse_subgoal, parse_value, parse_verdict, parse_yes_no};
use pfc_core::toh::{self, check_rules};
use pfc_core::{
    generate_plan, parse_action, parse_actions, parse_configuration, render_configuration, Configuration, Goal,
    MoveAction, NoiseProfile, OracleBackend, Peg, SearchConfig, TaskEnv, TohState,
};
use proptest::prelude::*;

fn peg() -> impl Strategy<Value = Peg> {
    (0usize..3).prop_map(Peg::from_index)
}

fn state(max_disks: usize) -> impl Strategy<Value = TohState> {
    (2..=max_disks).prop_flat_map(|n| prop::collection::vec(peg(), n)).prop_map(|a| TohState::from_assignment(&a))
}

fn any_move(n: u32) -> impl Strategy<Value = (u32, Peg, Peg)> {
    (0..n + 1, peg(), peg()).prop_filter("distinct lists", |(_, s, t)| s != t)
}

/// Rules restated from scratch: the number is the last entry of its source
/// list and exceeds everything in the target list.
fn naive_legal(s: &TohState, number: u32, source: Peg, target: Peg) -> bool {
    s.list(source).last() == Some(&number) && s.list(target).iter().all(|&x| x < number)
}

fn well_formed(s: &TohState) {
    let mut all: Vec<u32> = s.lists().iter().flatten().copied().collect();
    for l in s.lists() {
        assert!(l.windows(2).all(|w| w[0] < w[1]), "list not ascending: {l:?}");
    }
    all.sort_unstable();
    assert_eq!(all, (0..s.n_disks() as u32).collect::<Vec<_>>());
}

#[test]
fn every_four_disk_state_round_trips() {
    let states = toh::all_states(4);
    assert_eq!(states.len(), 81);
    let unique: HashSet<String> = states.iter().map(|s| s.render()).collect();
    assert_eq!(unique.len(), 81);
    for (i, s) in states.iter().enumerate() {
        assert_eq!(toh::state_index(s), i);
        assert_eq!(&toh::state_from_index(4, i), s);
        let c = Configuration::Toh(s.clone());
        assert_eq!(parse_configuration(&render_configuration(&c)).unwrap(), c);
        let json = serde_json::to_string(s).unwrap();
        assert_eq!(&serde_json::from_str::<TohState>(&json).unwrap(), s);
    }
}

#[test]
fn subgoal_lies_on_a_shortest_path() {
    for n in [3u32, 4] {
        let goal = TohState::stacked(n, Peg::C);
        let to_goal = toh::distance_table(&goal);
        for s in toh::all_states(n as usize).into_iter().filter(|s| s != &goal) {
            let sub = toh::goal_recursion_subgoal(&s, &goal).unwrap();
            well_formed(&sub);
            let via = toh::bfs_optimal(&s, &sub).unwrap() + to_goal[toh::state_index(&sub)];
            assert_eq!(via, to_goal[toh::state_index(&s)], "{} -> {}", s.render(), sub.render());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn index_round_trip(s in state(6)) {
        let n = s.n_disks();
        prop_assert_eq!(toh::state_from_index(n, toh::state_index(&s)), s);
    }

    #[test]
    fn legality_matches_naive_rules(s in state(5), (number, source, target) in any_move(5)) {
        let expected = naive_legal(&s, number, source, target);
        prop_assert_eq!(check_rules(&s, number, source, target).is_valid(), expected);
        let c = Configuration::Toh(s.clone());
        let a = MoveAction::toh(number, source, target).unwrap();
        let verdict = toh::is_legal_move(&c, &a);
        prop_assert_eq!(verdict.is_valid(), expected);
        prop_assert_eq!(verdict.feedback().is_some(), !expected);
        prop_assert_eq!(toh::apply_move(&c, &a).is_ok(), expected);
    }

    #[test]
    fn legal_moves_are_exactly_the_legal_ones(s in state(5)) {
        let n = s.n_disks() as u32;
        let mut expected = Vec::new();
        for number in 0..n {
            for source in Peg::ALL {
                for target in Peg::ALL {
                    if source != target && naive_legal(&s, number, source, target) {
                        expected.push(MoveAction::toh(number, source, target).unwrap());
                    }
                }
            }
        }
        let mut got = toh::legal_moves(&s);
        got.sort();
        expected.sort();
        prop_assert_eq!(got, expected);
        for a in toh::illegal_moves(&s) {
            prop_assert!(!toh::is_legal_move(&Configuration::Toh(s.clone()), &a).is_valid());
        }
    }

    #[test]
    fn applying_a_legal_move(s in state(5), pick in any::<prop::sample::Index>()) {
        let moves = toh::legal_moves(&s);
        prop_assert!(!moves.is_empty());
        let a = pick.get(&moves);
        let c = Configuration::Toh(s.clone());
        let next = toh::apply_move(&c, a).unwrap();
        let t = next.as_toh().unwrap();
        well_formed(t);
        let MoveAction::Toh { number, source, target } = a else { unreachable!() };
        prop_assert_eq!(t.top(*target), Some(*number));
        prop_assert_eq!(t.list(*source).len() + 1, s.list(*source).len());
        prop_assert_eq!(t.list(source.third(*target)), s.list(source.third(*target)));
        // moves are reversible and shift the distance to any goal by at most one
        let back = MoveAction::toh(*number, *target, *source).unwrap();
        prop_assert_eq!(toh::apply_move(&next, &back).unwrap(), c);
        let goal = TohState::stacked(s.n_disks() as u32, Peg::C);
        let d0 = toh::bfs_optimal(&s, &goal).unwrap() as i64;
        let d1 = toh::bfs_optimal(t, &goal).unwrap() as i64;
        prop_assert!((d0 - d1).abs() <= 1);
    }

    #[test]
    fn forced_moves_stay_well_formed(s in state(5), (number, source, target) in any_move(4)) {
        let c = Configuration::Toh(s.clone());
        let a = MoveAction::toh(number, source, target).unwrap();
        match toh::force_move(&c, &a) {
            Ok(next) => well_formed(next.as_toh().unwrap()),
            Err(_) => prop_assert!(!s.list(source).contains(&number)),
        }
    }

    #[test]
    fn subgoal_on_shortest_path_five_disks(s in state(5).prop_filter("five, not solved", |s| s.n_disks() == 5 && s != &TohState::stacked(5, Peg::C))) {
        let goal = TohState::stacked(5, Peg::C);
        let sub = toh::goal_recursion_subgoal(&s, &goal).unwrap();
        let direct = toh::bfs_optimal(&s, &goal).unwrap();
        let via = toh::bfs_optimal(&s, &sub).unwrap() + toh::bfs_optimal(&sub, &goal).unwrap();
        prop_assert_eq!(via, direct);
    }

    #[test]
    fn parsers_are_total(text in ".{0,200}") {
        if let Ok(c) = parse_configuration(&text) {
            prop_assert_eq!(parse_configuration(&render_configuration(&c)).unwrap(), c.clone());
            if let Some(s) = c.as_toh() { well_formed(s); }
        }
        if let Ok(a) = parse_action(&text) {
            prop_assert_eq!(parse_action(&a.render()).unwrap(), a.clone());
            if let MoveAction::Toh { source, target, .. } = a { prop_assert_ne!(source, target); }
        }
        if let Ok(actions) = parse_actions(&text) { prop_assert!(!actions.is_empty()); }
        let _ = parse_verdict(&text);
        let _ = parse_yes_no(&text);
        let _ = parse_value(&text);
        if let Ok(Goal::TargetConfiguration { configuration: c }) = parse_subgoal(&text) {
            if let Some(s) = c.as_toh() { well_formed(s); }
        }
    }

    #[test]
    fn parsers_survive_structured_noise(
        lists in prop::collection::vec(prop::collection::vec(0u32..6, 0..4), 3),
        noise in "[ \\[\\],0-9ABC=]{0,20}",
    ) {
        let text = format!("A = {:?}\nB = {:?}{noise}\nC = {:?}", lists[0], lists[1], lists[2]);
        match parse_configuration(&text) {
            Ok(c) => well_formed(c.as_toh().unwrap()),
            Err(e) => prop_assert!(!e.to_string().is_empty()),
        }
    }

    #[test]
    fn metric_fractions_are_bounded(
        plans in prop::collection::vec((0usize..26, prop::collection::vec((0u32..3, peg(), peg()), 0..12)), 1..20),
        runs in 1u32..4,
        strict in any::<bool>(),
    ) {
        let problems = toh::enumerate_problems(3).unwrap();
        let env = TaskEnv::Toh;
        let mut results = Vec::new();
        for run in 0..runs {
            for (k, (pi, moves)) in plans.iter().enumerate() {
                let p = &problems[*pi];
                let problem = Problem {
                    id: format!("{}-{k}", p.id),
                    initial: Configuration::Toh(p.initial.clone()),
                    goal: Goal::configuration(Configuration::Toh(p.goal.clone())),
                    optimal_steps: toh::bfs_optimal(&p.initial, &p.goal).unwrap(),
                };
                let actions: Vec<MoveAction> = moves
                    .iter()
                    .filter(|(_, s, t)| s != t)
                    .map(|&(n, s, t)| MoveAction::toh(n, s, t).unwrap())
                    .collect();
                let replay = replay_plan(&env, &problem, &actions, strict, 10);
                results.push(ProblemResult {
                    run,
                    problem_id: problem.id.clone(),
                    task: TaskKind::Toh3,
                    method: if strict { Method::Pfc } else { Method::ZeroShot },
                    backend: BackendKind::Oracle,
                    label: "x".into(),
                    ablations: vec![],
                    optimal_steps: problem.optimal_steps,
                    budget: 10,
                    actions,
                    counters: Default::default(),
                    subgoals: vec![],
                    goal_confirmed: false,
                    budget_exhausted: false,
                    error: None,
                    replay,
                });
            }
        }
        let s = summarize(&results).unwrap();
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        for st in [s.fraction_solved_strict, s.fraction_solved_any, s.fraction_invalid_actions, s.fraction_rejected_proposals] {
            prop_assert!(unit(st.mean) && st.sem >= 0.0);
        }
        prop_assert!(s.fraction_solved_strict.mean <= s.fraction_solved_any.mean);
        for b in &s.buckets {
            prop_assert!(unit(b.fraction_solved_strict.mean) && unit(b.fraction_invalid_actions.mean));
            if let Some(avg) = b.avg_plan_steps {
                prop_assert!(avg.mean + 1e-9 >= b.optimal_steps as f64);
            }
        }
        for r in &s.per_run {
            prop_assert!(unit(r.fraction_solved_strict) && unit(r.fraction_invalid_actions));
        }
    }

    #[test]
    fn noisy_planner_never_overruns_its_budget(
        idx in 0usize..80,
        rate in 0.0f64..0.8,
        accept in 0.0f64..0.5,
        bias in -2i64..3,
        seed in any::<u64>(),
        monitor in any::<bool>(),
        search in any::<bool>(),
    ) {
        let p = &toh::enumerate_problems(4).unwrap()[idx];
        let noise = NoiseProfile { invalid_action_rate: rate, evaluator_error_bias: bias, monitor_false_accept_rate: accept, seed };
        let mut backend = OracleBackend::new(TaskEnv::Toh, noise);
        let cfg = SearchConfig { budget: 20, use_monitor: monitor, use_search: search, rng_seed: seed, ..Default::default() };
        let goal = Goal::configuration(Configuration::Toh(p.goal.clone()));
        let (plan, record) = generate_plan(&p.id, &Configuration::Toh(p.initial.clone()), &goal, &cfg, &mut backend).unwrap();
        prop_assert!(plan.len() <= 20);
        prop_assert!(record.counters.invalid_proposals <= record.counters.total_proposals);
        if monitor && accept == 0.0 {
            let mut s = Configuration::Toh(p.initial.clone());
            for a in plan.actions() {
                prop_assert!(toh::is_legal_move(&s, a).is_valid(), "monitored plan contains {}", a.render());
                s = toh::apply_move(&s, a).unwrap();
            }
        }
    }

    #[test]
    fn graph_distances_are_symmetric(a in 1u32..16, b in 1u32..16) {
        let g = Arc::new(RoomGraph::default_graph());
        if g.contains(a) && g.contains(b) {
            prop_assert_eq!(g.bfs_distance(a, b).unwrap(), g.bfs_distance(b, a).unwrap());
            let env = TaskEnv::Graph(g.clone());
            let d = env.distance(&Configuration::room(a), &Goal::room(b)).unwrap();
            prop_assert_eq!(d, g.bfs_distance(a, b).unwrap());
        }
    }
}
