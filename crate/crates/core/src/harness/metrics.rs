use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{Ablation, BackendKind, Method, TaskKind};
use super::replay::ReplayOutcome;
use crate::orchestrator::Counters;
use crate::types::{Goal, MoveAction};

/// Everything scored about one problem in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub run: u32,
    pub problem_id: String,
    pub task: TaskKind,
    pub method: Method,
    pub backend: BackendKind,
    pub label: String,
    #[serde(default)]
    pub ablations: Vec<Ablation>,
    pub optimal_steps: u32,
    pub budget: usize,
    /// Emitted plan, or every parsed move for the baselines.
    pub actions: Vec<MoveAction>,
    #[serde(default)]
    pub counters: Counters,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subgoals: Vec<Goal>,
    #[serde(default)]
    pub goal_confirmed: bool,
    #[serde(default)]
    pub budget_exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub replay: ReplayOutcome,
}

/// Mean over runs with the standard error of that mean (0 for a single run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sem: f64,
}

impl Stat {
    /// `None` when there are no samples.
    pub fn of(samples: &[f64]) -> Option<Stat> {
        let n = samples.len();
        if n == 0 {
            return None;
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let sem = if n < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Some(Stat { mean, sem })
    }
}

/// Metrics of one run, or of one optimal-length bucket within a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: u32,
    pub problems: usize,
    pub solved_strict: usize,
    pub solved_any: usize,
    pub fraction_solved_strict: f64,
    pub fraction_solved_any: f64,
    /// Rule-breaking actions over all emitted (or parsed) actions.
    pub fraction_invalid_actions: f64,
    /// Monitor rejections over all actor proposals.
    pub fraction_rejected_proposals: f64,
    /// Mean plan length over strictly solved problems.
    pub avg_plan_steps: Option<f64>,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketMetrics {
    pub optimal_steps: u32,
    /// Problems per run in this bucket.
    pub problems: usize,
    pub fraction_solved_strict: Stat,
    pub fraction_solved_any: Stat,
    pub fraction_invalid_actions: Stat,
    pub avg_plan_steps: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub task: TaskKind,
    pub method: Method,
    pub backend: BackendKind,
    pub label: String,
    pub ablations: Vec<Ablation>,
    pub runs: usize,
    /// Problems per run.
    pub problems: usize,
    pub budget: usize,
    pub mean_optimal_steps: f64,
    pub fraction_solved_strict: Stat,
    pub fraction_solved_any: Stat,
    pub fraction_invalid_actions: Stat,
    pub fraction_rejected_proposals: Stat,
    pub avg_plan_steps: Option<Stat>,
    pub errors: usize,
    pub buckets: Vec<BucketMetrics>,
    pub per_run: Vec<RunMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn run_metrics(run: u32, results: &[&ProblemResult]) -> RunMetrics {
    let n = results.len();
    let strict: Vec<&&ProblemResult> = results.iter().filter(|r| r.replay.solved_strict()).collect();
    let solved_any = results.iter().filter(|r| r.replay.solved).count();
    let invalid: u64 = results.iter().map(|r| r.replay.invalid_count as u64).sum();
    let emitted: u64 = results.iter().map(|r| r.replay.length as u64).sum();
    let rejected: u64 = results.iter().map(|r| r.counters.invalid_proposals).sum();
    let proposed: u64 = results.iter().map(|r| r.counters.total_proposals).sum();
    let avg_plan_steps =
        (!strict.is_empty()).then(|| strict.iter().map(|r| r.replay.length as f64).sum::<f64>() / strict.len() as f64);
    RunMetrics {
        run,
        problems: n,
        solved_strict: strict.len(),
        solved_any,
        fraction_solved_strict: ratio(strict.len() as u64, n as u64),
        fraction_solved_any: ratio(solved_any as u64, n as u64),
        fraction_invalid_actions: ratio(invalid, emitted),
        fraction_rejected_proposals: ratio(rejected, proposed),
        avg_plan_steps,
        errors: results.iter().filter(|r| r.error.is_some()).count(),
    }
}

fn stat(runs: &[RunMetrics], f: impl Fn(&RunMetrics) -> f64) -> Stat {
    Stat::of(&runs.iter().map(f).collect::<Vec<_>>()).unwrap_or(Stat { mean: 0.0, sem: 0.0 })
}

fn plan_steps(runs: &[RunMetrics]) -> Option<Stat> {
    Stat::of(&runs.iter().filter_map(|r| r.avg_plan_steps).collect::<Vec<_>>())
}

/// Aggregates per-problem results into a summary. Input order is irrelevant;
/// results are grouped by run and ordered by problem id first, so live and
/// recomputed summaries agree bit for bit. `None` for an empty slice.
pub fn summarize(results: &[ProblemResult]) -> Option<MetricsSummary> {
    let mut sorted: Vec<&ProblemResult> = results.iter().collect();
    sorted.sort_by(|a, b| (a.run, &a.problem_id).cmp(&(b.run, &b.problem_id)));
    let first = *sorted.first()?;

    let mut by_run: BTreeMap<u32, Vec<&ProblemResult>> = BTreeMap::new();
    for r in &sorted {
        by_run.entry(r.run).or_default().push(r);
    }
    let per_run: Vec<RunMetrics> = by_run.iter().map(|(&run, rs)| run_metrics(run, rs)).collect();

    let mut by_bucket: BTreeMap<u32, BTreeMap<u32, Vec<&ProblemResult>>> = BTreeMap::new();
    for r in &sorted {
        by_bucket.entry(r.optimal_steps).or_default().entry(r.run).or_default().push(r);
    }
    let buckets = by_bucket
        .iter()
        .map(|(&optimal_steps, runs)| {
            let rm: Vec<RunMetrics> = runs.iter().map(|(&run, rs)| run_metrics(run, rs)).collect();
            BucketMetrics {
                optimal_steps,
                problems: rm.iter().map(|r| r.problems).max().unwrap_or(0),
                fraction_solved_strict: stat(&rm, |r| r.fraction_solved_strict),
                fraction_solved_any: stat(&rm, |r| r.fraction_solved_any),
                fraction_invalid_actions: stat(&rm, |r| r.fraction_invalid_actions),
                avg_plan_steps: plan_steps(&rm),
            }
        })
        .collect();

    let first_run = &by_run[&first.run];
    Some(MetricsSummary {
        task: first.task,
        method: first.method,
        backend: first.backend,
        label: first.label.clone(),
        ablations: first.ablations.clone(),
        runs: per_run.len(),
        problems: first_run.len(),
        budget: first.budget,
        mean_optimal_steps: first_run.iter().map(|r| r.optimal_steps as f64).sum::<f64>() / first_run.len() as f64,
        fraction_solved_strict: stat(&per_run, |r| r.fraction_solved_strict),
        fraction_solved_any: stat(&per_run, |r| r.fraction_solved_any),
        fraction_invalid_actions: stat(&per_run, |r| r.fraction_invalid_actions),
        fraction_rejected_proposals: stat(&per_run, |r| r.fraction_rejected_proposals),
        avg_plan_steps: plan_steps(&per_run),
        errors: per_run.iter().map(|r| r.errors).sum(),
        buckets,
        per_run,
    })
}
