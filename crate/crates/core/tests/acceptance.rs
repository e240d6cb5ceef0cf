//! Acceptance criteria 1-10. Runs as a plain binary so every criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use pfc_core::graph::{generate_steppath, RoomGraph};
use pfc_core::harness::{
    build_problem_set, fmt_num, recompute_dir, recompute_metrics, run_experiment_with, trace_files, BackendKind,
    ExperimentConfig, ExperimentOutput, Method, MetricsSummary, Stat, TaskKind,
};
use pfc_core::llm::{
    parse_subgoal, parse_value, parse_verdict, parse_yes_no, ChatRequest, LlmBackend, LlmClient, LlmConfig, PromptSet,
    SimulatedModel, Transport, TransportFailure,
};
use pfc_core::toh;
use pfc_core::{
    generate_plan, parse_configuration, Configuration, Goal, ModuleBackend, MoveAction, NoiseProfile, OracleBackend,
    Peg, Planner, SearchConfig, TaskEnv, TohState,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
/// (task, row label, [(metric key, printed value)])
type ReferenceRow = (TaskKind, &'static str, Vec<(&'static str, &'static str)>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn oracle(task: TaskKind) -> ExperimentConfig {
    ExperimentConfig::new(task, Method::Pfc, BackendKind::Oracle)
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    run_experiment_with(cfg, None).map_err(|e| e.to_string())
}

fn pm(s: Stat) -> String {
    format!("{:.3} ± {:.3}", s.mean, s.sem)
}

/// Checks shared by the exact-oracle sweeps: every plan solved, legal and
/// exactly as long as the breadth-first optimum.
fn all_optimal(out: &ExperimentOutput) -> Result<(), String> {
    let s = &out.summary;
    ensure!(s.fraction_solved_strict.mean == 1.0, "solved {}", pm(s.fraction_solved_strict));
    ensure!(s.fraction_invalid_actions.mean == 0.0, "invalid {}", pm(s.fraction_invalid_actions));
    for r in &out.results {
        let p = out.problems.problems.iter().find(|p| p.id == r.problem_id).unwrap();
        let bfs = out.problems.env.distance(&p.initial, &p.goal).map_err(|e| e.to_string())?;
        ensure!(r.replay.length == bfs, "{}: length {} vs optimum {bfs}", r.problem_id, r.replay.length);
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let out = run(&oracle(TaskKind::Toh3))?;
    let elapsed = t.elapsed();
    ensure!(out.problems.problems.len() == 24, "{} problems", out.problems.problems.len());
    all_optimal(&out)?;
    let all = build_problem_set(&ExperimentConfig { include_in_context: true, ..oracle(TaskKind::Toh3) })
        .map_err(|e| e.to_string())?;
    let (mean26, mean24) = (all.mean_optimal(), out.problems.mean_optimal());
    ensure!((mean24 - 4.4).abs() <= 0.5, "evaluated-set mean optimal {mean24:.3} not within 4.4 ± 0.5");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "24/24 solved, 0 invalid, all lengths = BFS; mean optimal 26-set {mean26:.3}, 24-set {mean24:.3}; {elapsed:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let out = run(&oracle(TaskKind::Toh4))?;
    let elapsed = t.elapsed();
    ensure!(out.problems.problems.len() == 80, "{} problems", out.problems.problems.len());
    ensure!(out.summary.budget == 20, "budget {}", out.summary.budget);
    all_optimal(&out)?;
    let longest = out.results.iter().map(|r| r.replay.length).max().unwrap_or(0);
    ensure!(longest <= 15, "longest plan {longest}");
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("80/80 solved within T=20, 0 invalid, longest plan {longest}; {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let vp = run(&oracle(TaskKind::Valuepath))?;
    ensure!(vp.problems.problems.len() == 13, "{} valuepath problems", vp.problems.problems.len());
    all_optimal(&vp)?;
    let g = vp.problems.env.graph().unwrap();
    let target = g.reward_goal().unwrap().reward_target().unwrap();
    for r in &vp.results {
        let p = vp.problems.problems.iter().find(|p| p.id == r.problem_id).unwrap();
        let d = g.bfs_distance(p.initial.as_room().unwrap(), target).unwrap();
        ensure!(r.replay.length == d, "{}: {} steps vs distance {d} to room {target}", r.problem_id, r.replay.length);
    }
    let sp = run(&oracle(TaskKind::Steppath))?;
    ensure!(sp.problems.problems.len() == 60, "{} steppath problems", sp.problems.problems.len());
    all_optimal(&sp)?;
    for k in [2u32, 3, 4] {
        let n = sp
            .results
            .iter()
            .filter(|r| r.optimal_steps == k && r.replay.solved_strict() && r.replay.length == k)
            .count();
        ensure!(n == 20, "{n}/20 {k}-step problems solved in exactly {k} steps");
    }
    let elapsed = t.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("Valuepath 13/13 at BFS distance to room {target}, Steppath 60/60 at 2/3/4 steps; {elapsed:.2?}"))
}

/// Noise used for criteria 4 and 5: three in ten actor slots rule-breaking.
fn calibrated() -> NoiseProfile {
    NoiseProfile { invalid_action_rate: 0.3, ..NoiseProfile::default() }
}

fn criterion_4() -> Outcome {
    let base = ExperimentConfig { runs: 5, seed: 7, noise: calibrated(), ..oracle(TaskKind::Toh3) };
    let full = run(&base)?;
    let bare = run(&ExperimentConfig { no_monitor: true, ..base.clone() })?;
    let total_invalid: u32 = full.results.iter().map(|r| r.replay.invalid_count).sum();
    ensure!(total_invalid == 0, "full pipeline emitted {total_invalid} invalid actions");
    let f = bare.summary.fraction_invalid_actions;
    ensure!((0.1..=0.5).contains(&f.mean), "w/o monitor invalid fraction {} outside [0.1, 0.5]", pm(f));
    Ok(format!(
        "full: invalid {} (solved {}); w/o monitor: invalid {} (solved {}), 5 runs",
        pm(full.summary.fraction_invalid_actions),
        pm(full.summary.fraction_solved_strict),
        pm(f),
        pm(bare.summary.fraction_solved_strict)
    ))
}

fn criterion_5() -> Outcome {
    let mut means = [0.0f64; 4];
    for seed in 0..5u64 {
        let base = ExperimentConfig { seed, noise: calibrated(), ..oracle(TaskKind::Toh3) };
        let variants = [
            base.clone(),
            ExperimentConfig { no_decomposer: true, ..base.clone() },
            ExperimentConfig { no_search: true, ..base.clone() },
            ExperimentConfig { no_monitor: true, ..base.clone() },
        ];
        let solved: Vec<f64> =
            variants.iter().map(|c| run(c).map(|o| o.summary.fraction_solved_strict.mean)).collect::<Result<_, _>>()?;
        for (i, &s) in solved.iter().enumerate().skip(1) {
            ensure!(solved[0] >= s, "seed {seed}: full {} < {} {}", solved[0], variants[i].label(), s);
        }
        for (m, s) in means.iter_mut().zip(&solved) {
            *m += s / 5.0;
        }
    }
    Ok(format!(
        "mean solved over 5 seeds: full {:.3}, w/o decomposer {:.3}, w/o search {:.3}, w/o monitor {:.3}; no inversions",
        means[0], means[1], means[2], means[3]
    ))
}

fn criterion_6() -> Outcome {
    let three = toh::enumerate_problems(3).map_err(|e| e.to_string())?;
    let four = toh::enumerate_problems(4).map_err(|e| e.to_string())?;
    ensure!(three.len() == 26 && four.len() == 80, "{} / {} disk problems", three.len(), four.len());
    let g = RoomGraph::default_graph();
    for k in [2u32, 3, 4] {
        let ps = generate_steppath(&g, k, 20, 0).map_err(|e| e.to_string())?;
        ensure!(ps.len() == 20, "{} {k}-step problems", ps.len());
        for p in &ps {
            let d = g.bfs_distance(p.start, p.target).map_err(|e| e.to_string())?;
            ensure!(d == k, "{} -> {} is {d} steps, not {k}", p.start, p.target);
        }
    }
    Ok("26 three-disk, 80 four-disk, 20 Steppath problems per 2/3/4 steps (BFS-verified)".into())
}

fn criterion_7() -> Outcome {
    let goal_state = TohState::stacked(3, Peg::C);
    let goal = Goal::configuration(Configuration::Toh(goal_state.clone()));
    let cfg = SearchConfig { branches: 3, depth: 2, ..SearchConfig::default() };
    let mut reducing = 0;
    let states = toh::all_states(3);
    ensure!(states.len() == 27, "{} states", states.len());
    for s in &states {
        let start = Configuration::Toh(s.clone());
        let d0 = toh::bfs_optimal(s, &goal_state).unwrap();
        if d0 > 0 {
            let mut backend = OracleBackend::exact(TaskEnv::Toh);
            let mut planner = Planner::new(&mut backend, cfg.clone(), "eq").map_err(|e| e.to_string())?;
            let out = planner.search(1, &start, &goal).map_err(|e| e.to_string())?;
            let next = toh::apply_move(&start, &out.action).map_err(|e| format!("{}: {e}", s.render()))?;
            let d1 = toh::bfs_optimal(next.as_toh().unwrap(), &goal_state).unwrap();
            ensure!(d1 < d0, "{}: {} keeps distance {d0}", s.render(), out.action.render());
        }
        reducing += 1;
        let mut plans = Vec::new();
        for use_cache in [true, false] {
            let c = SearchConfig { use_cache, rng_seed: 42, ..cfg.clone() };
            let (plan, _) = generate_plan("eq", &start, &goal, &c, &mut OracleBackend::exact(TaskEnv::Toh))
                .map_err(|e| e.to_string())?;
            ensure!(plan.len() as u32 == d0, "{}: plan of {} for optimum {d0}", s.render(), plan.len());
            plans.push(plan);
        }
        ensure!(plans[0] == plans[1], "{}: cached and uncached plans differ", s.render());
    }
    Ok(format!(
        "{reducing}/27 states: search picks a distance-reducing move (goal state needs none); cached = uncached"
    ))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.txt"))).unwrap()
}

/// Replies from a fixed closure; records every request.
struct Stub {
    reply: Box<dyn Fn(&ChatRequest) -> String + Send + Sync>,
    log: std::sync::Mutex<Vec<ChatRequest>>,
}

impl Transport for Stub {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportFailure> {
        self.log.lock().unwrap().push(request.clone());
        Ok((self.reply)(request))
    }
}

fn stub(f: impl Fn(&ChatRequest) -> String + Send + Sync + 'static) -> Arc<Stub> {
    Arc::new(Stub { reply: Box::new(f), log: Default::default() })
}

fn llm(t: Arc<Stub>) -> LlmBackend {
    let client = LlmClient::new(LlmConfig::default(), t).unwrap();
    LlmBackend::new(Arc::new(client), Arc::new(PromptSet::builtin()), &TaskEnv::Toh)
}

fn cfg3(a: &[u32], b: &[u32], c: &[u32]) -> Configuration {
    Configuration::toh(a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
}

fn mv(n: u32, s: Peg, t: Peg) -> MoveAction {
    MoveAction::toh(n, s, t).unwrap()
}

fn criterion_8() -> Outcome {
    let goal = Goal::configuration(cfg3(&[], &[], &[0, 1, 2]));
    let mut checked = 0;

    // parsed worked-example answers
    let sub = parse_subgoal("...Hence I will move 1 from list A to list B.\nSubgoal:\nA = [0]\nB = [1, 2]\nC = []")
        .map_err(|e| e.to_string())?;
    ensure!(sub == Goal::configuration(cfg3(&[0], &[1, 2], &[])), "decomposer example 1 parsed to {sub:?}");
    let sub = parse_subgoal("...Hence, I will move 2 from list C to list A.\nSubgoal:\nA = [1, 2]\nB = [0]\nC = []")
        .map_err(|e| e.to_string())?;
    ensure!(sub == Goal::configuration(cfg3(&[1, 2], &[0], &[])), "decomposer example 2 parsed to {sub:?}");
    ensure!(
        parse_verdict("Since the Move 0 from list C to list B violates both Rule #1 and Rule #2, it is invalid.").ok()
            == Some(false),
        "monitor example 1"
    );
    ensure!(
        parse_verdict("Since the Move 2 from list C to list B satisfies both Rule #1 and Rule #2, it is valid.").ok()
            == Some(true),
        "monitor example 2"
    );
    ensure!(parse_verdict("maybe").is_err(), "'maybe' parsed as a verdict");
    for (text, want) in [
        ("A = []\nB = [1, 2]\nC = [0]", cfg3(&[], &[1, 2], &[0])),
        ("A = [1]\nB = []\nC = [0, 2]", cfg3(&[1], &[], &[0, 2])),
    ] {
        ensure!(parse_configuration(text).ok() == Some(want.clone()), "predictor answer {text:?}");
    }
    let phrase =
        "The minimum number of valid moves required to reach the goal configuration from the current configuration is";
    ensure!(parse_value(&format!("{phrase} 7.")).ok() == Some(7), "evaluator 'is 7'");
    ensure!(parse_value(&format!("{phrase} 4.")).ok() == Some(4), "evaluator 'is 4'");
    ensure!(parse_value(&format!("{phrase} -3.")).is_err(), "evaluator 'is -3' accepted");
    ensure!(
        parse_yes_no("The current configuraton matches the goal configuration. Hence yes.").ok() == Some(true),
        "coordinator yes"
    );
    ensure!(
        parse_yes_no("The current configuraton doesn't match the goal configuration. Hence no.").ok() == Some(false),
        "coordinator no"
    );
    checked += 12;

    // rendered prompts, byte for byte
    let prompt = |reply: &'static str, call: &dyn Fn(&mut LlmBackend)| {
        let t = stub(move |_| reply.to_string());
        call(&mut llm(t.clone()));
        let log = t.log.lock().unwrap();
        log[0].messages[0].content.clone() + "\n"
    };
    let renders = [
        (
            "task_decomposer",
            prompt("Subgoal:\nA = [0]\nB = [1, 2]\nC = []", &|b| drop(b.decompose(&cfg3(&[0, 1, 2], &[], &[]), &goal))),
        ),
        (
            "actor",
            prompt("1. Move 2 from A to C.", &|b| {
                drop(b.propose(&cfg3(&[0, 1, 2], &[], &[]), &Goal::configuration(cfg3(&[0], &[1, 2], &[])), &[], 2))
            }),
        ),
        ("monitor", prompt("it is valid.", &|b| drop(b.assess(&cfg3(&[], &[0, 1], &[2]), &mv(1, Peg::B, Peg::A))))),
        (
            "predictor",
            prompt("A = [1]\nB = [0]\nC = [2]", &|b| {
                drop(b.predict(&cfg3(&[], &[0, 1], &[2]), &mv(1, Peg::B, Peg::A)))
            }),
        ),
        ("task_coordinator", prompt("Hence no.", &|b| drop(b.check(&cfg3(&[], &[0, 1, 2], &[]), &goal)))),
    ];
    for (name, text) in &renders {
        ensure!(*text == golden(name), "{name} prompt differs from its golden file");
        checked += 1;
    }
    let heuristic = golden("evaluator_heuristic_reply").trim_end().to_string();
    let t = stub(move |r| if r.messages.len() == 1 { heuristic.clone() } else { format!("{phrase} 2.") });
    let v = llm(t.clone())
        .evaluate(&cfg3(&[0], &[], &[1, 2]), &Goal::configuration(cfg3(&[0], &[1, 2], &[])))
        .map_err(|e| e.to_string())?;
    ensure!(v.get() == -2.0, "evaluator value {}", v.get());
    let log = t.log.lock().unwrap();
    let conv = &log[1].messages;
    ensure!(conv.len() == 3, "evaluator conversation has {} turns", conv.len());
    for (msg, name) in conv.iter().zip(["evaluator_heuristic", "evaluator_heuristic_reply", "evaluator"]) {
        ensure!(msg.content.clone() + "\n" == golden(name), "{name} turn differs from its golden file");
        checked += 1;
    }
    Ok(format!("{checked} worked-example parses and prompt snapshots match"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/reference_tables")
}

/// Expected table values, as printed (two decimals, trailing zero trimmed).
fn reference_values() -> Vec<ReferenceRow> {
    use TaskKind::*;
    vec![
        (
            Valuepath,
            "Zero-shot",
            vec![("solved", "0.54"), ("invalid", "0.08"), ("avg1", "2.5"), ("avg2", "2.5"), ("avg4", "5.0")],
        ),
        (
            Valuepath,
            "ICL",
            vec![("solved", "0.91"), ("invalid", "0.0"), ("avg1", "1.75"), ("avg2", "2.33"), ("avg4", "4.67")],
        ),
        (
            Valuepath,
            "LLM-PFC",
            vec![("solved", "1.0"), ("invalid", "0.0"), ("avg1", "1.5"), ("avg2", "2.0"), ("avg4", "4.75")],
        ),
        (
            Steppath,
            "Zero-shot",
            vec![
                ("s2", "0.75"),
                ("s3", "0.4"),
                ("s4", "0.2"),
                ("i2", "0.09"),
                ("i3", "0.13"),
                ("i4", "0.18"),
                ("avg2", "2.07"),
                ("avg3", "4.0"),
                ("avg4", "5.25"),
            ],
        ),
        (
            Steppath,
            "ICL",
            vec![
                ("s2", "0.74"),
                ("s3", "0.74"),
                ("s4", "0.42"),
                ("i2", "0.1"),
                ("i3", "0.06"),
                ("i4", "0.14"),
                ("avg2", "2.14"),
                ("avg3", "3.78"),
                ("avg4", "4.38"),
            ],
        ),
        (
            Steppath,
            "LLM-PFC",
            vec![
                ("s2", "1.0"),
                ("s3", "1.0"),
                ("s4", "0.95"),
                ("i2", "0.0"),
                ("i3", "0.0"),
                ("i4", "0.0"),
                ("avg2", "2.1"),
                ("avg3", "3.42"),
                ("avg4", "4.5"),
            ],
        ),
        (Toh3, "Zero-shot", vec![("solved", "0.11"), ("invalid", "0.3")]),
        (Toh3, "ICL", vec![("solved", "0.46"), ("invalid", "0.12")]),
        (Toh3, "LLM-PFC", vec![("solved", "0.74"), ("invalid", "0.0")]),
        (Toh4, "Zero-shot", vec![("solved", "0.02"), ("invalid", "0.5")]),
        (Toh4, "ICL", vec![("solved", "0.01"), ("invalid", "0.41")]),
        (Toh4, "LLM-PFC", vec![("solved", "0.24"), ("invalid", "0.0")]),
        (Toh3, "w/o Task Decomposer", vec![("solved", "0.5"), ("invalid", "0.0")]),
        (Toh3, "w/o Tree Search", vec![("solved", "0.32"), ("invalid", "0.0")]),
        (Toh3, "w/o Monitor", vec![("solved", "0.27"), ("invalid", "0.31")]),
    ]
}

fn value_of(s: &MetricsSummary, key: &str) -> Option<f64> {
    let bucket = |k: u32| s.buckets.iter().find(|b| b.optimal_steps == k);
    let step = |p: &str| key.strip_prefix(p).and_then(|d| d.parse::<u32>().ok());
    match key {
        "solved" => Some(s.fraction_solved_strict.mean),
        "invalid" => Some(s.fraction_invalid_actions.mean),
        _ if step("avg").is_some() => bucket(step("avg")?)?.avg_plan_steps.map(|a| a.mean),
        _ if step("s").is_some() => Some(bucket(step("s")?)?.fraction_solved_strict.mean),
        _ if step("i").is_some() => Some(bucket(step("i")?)?.fraction_invalid_actions.mean),
        _ => None,
    }
}

fn criterion_9() -> Outcome {
    // (a) exact recomputation from the trace fixtures, in-process and via the CLI
    let summaries =
        recompute_metrics(&trace_files(&fixtures()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for (task, label, values) in reference_values() {
        let s = summaries
            .iter()
            .find(|s| s.task == task && s.label == label)
            .ok_or(format!("no {task} {label} summary"))?;
        for (key, want) in values {
            let got = value_of(s, key).map(fmt_num).unwrap_or_else(|| "-".into());
            ensure!(got == want, "{task} {label} {key}: {got} != {want}");
            cells += 1;
        }
    }
    let out =
        Command::new(env!("CARGO_BIN_EXE_pfc")).arg("recompute").arg(fixtures()).output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure!(out.status.success(), "pfc recompute failed: {}", String::from_utf8_lossy(&out.stderr));
    ensure!(stdout.contains("| LLM-PFC | 0.74 | 0.24 | 0.0 | 0.0 |"), "pfc recompute output lacks the 3/4-disk row");

    // (b) the chat-model path runs the same protocol; a local model stands in for credentials
    let mut protocol = Vec::new();
    for (task, method) in [
        (TaskKind::Toh3, Method::Pfc),
        (TaskKind::Toh3, Method::Icl),
        (TaskKind::Valuepath, Method::ZeroShot),
        (TaskKind::Steppath, Method::Pfc),
    ] {
        let cfg = ExperimentConfig { method, backend: BackendKind::Llm, ..oracle(task) };
        let model = SimulatedModel::exact();
        let o = run_experiment_with(&cfg, Some(model.clone())).map_err(|e| e.to_string())?;
        let n = if task == TaskKind::Steppath {
            60
        } else if task == TaskKind::Toh3 {
            24
        } else {
            13
        };
        ensure!(o.summary.problems == n, "{task} {method}: {} problems", o.summary.problems);
        ensure!(o.summary.errors == 0, "{task} {method}: {} errors", o.summary.errors);
        ensure!(
            o.results.iter().all(|r| r.actions.len() <= cfg.budget() || method != Method::Pfc),
            "{task}: budget overrun"
        );
        ensure!(!model.requests().is_empty(), "{task} {method}: no chat requests issued");
        protocol.push(format!("{task}/{method} solved {}", fmt_num(o.summary.fraction_solved_strict.mean)));
    }
    let creds = std::env::var_os(pfc_core::llm::ENV_API_KEY).is_some();
    Ok(format!(
        "{cells} table cells recomputed exactly; chat path via local model: {}{}",
        protocol.join(", "),
        if creds { "" } else { " (no credentials: live model run not attempted)" }
    ))
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut noisy =
        ExperimentConfig { runs: 3, seed: 9, noise: calibrated(), no_monitor: true, ..oracle(TaskKind::Toh3) };
    noisy.noise.evaluator_error_bias = 1;
    let configs = [
        oracle(TaskKind::Toh3),
        noisy,
        ExperimentConfig { runs: 2, ..oracle(TaskKind::Steppath) },
        ExperimentConfig { runs: 2, ..oracle(TaskKind::Valuepath) },
        ExperimentConfig { method: Method::ZeroShot, backend: BackendKind::Simulated, ..oracle(TaskKind::Toh4) },
    ];
    for (i, cfg) in configs.into_iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        let cfg = ExperimentConfig { out: Some(dir.clone()), ..cfg };
        let live = run(&cfg)?.summary;
        let again = recompute_dir(&dir).map_err(|e| e.to_string())?;
        ensure!(again == vec![live], "{} {}: recomputed summary differs", cfg.task, cfg.label());
    }
    Ok("recomputed = live for 5 runs (oracle exact/noisy, graph tasks, simulated baseline)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle-exact 3-disk end to end", criterion_1),
        ("oracle-exact 4-disk sweep", criterion_2),
        ("oracle-exact graph tasks", criterion_3),
        ("monitor efficacy under noise", criterion_4),
        ("ablation ordering", criterion_5),
        ("enumeration counts", criterion_6),
        ("search oracle equivalence", criterion_7),
        ("parser and template goldens", criterion_8),
        ("reference tables from traces", criterion_9),
        ("recomputation fixpoint", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
