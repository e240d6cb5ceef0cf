use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{BackendKind, ExperimentConfig, Method};
use super::metrics::{summarize, MetricsSummary, ProblemResult};
use super::problems::{build_problem_set, Problem, ProblemSet};
use super::replay::replay_plan;
use super::tables::emit_tables;
use super::trace::write_trace;
use crate::backend::Module;
use crate::error::{Error, Result};
use crate::llm::{llm_full_solution, LlmBackend, LlmClient, PromptSet, SimulatedModel, SolutionMode, Transport};
use crate::mix_seed;
use crate::oracle::{NoiseProfile, OracleBackend};
use crate::orchestrator::{generate_plan, Counters, ModuleEvent};
use crate::task::TaskEnv;

/// Everything a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: MetricsSummary,
    /// Ordered by (run, problem id).
    pub results: Vec<ProblemResult>,
    pub problems: ProblemSet,
}

/// Seed of job `index` in run `run`.
pub fn job_seed(seed: u64, run: u32, index: usize) -> u64 {
    mix_seed(mix_seed(seed, run as u64), index as u64)
}

enum Backends {
    Oracle,
    Simulated { prompts: Arc<PromptSet> },
    Chat { backend: LlmBackend },
}

struct Job<'a> {
    run: u32,
    index: usize,
    problem: &'a Problem,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    env: &'a TaskEnv,
    backends: &'a Backends,
    label: String,
}

impl Context<'_> {
    fn noise(&self, seed: u64) -> NoiseProfile {
        NoiseProfile { seed, ..self.cfg.noise.clone() }
    }

    fn chat_backend(&self, seed: u64) -> Result<LlmBackend> {
        match self.backends {
            Backends::Chat { backend } => Ok(backend.fork()),
            Backends::Simulated { prompts } => {
                let model: Arc<dyn Transport> = Arc::new(SimulatedModel::new(self.noise(seed)));
                let client = LlmClient::new(self.cfg.llm.clone(), model)?;
                Ok(LlmBackend::new(Arc::new(client), prompts.clone(), self.env))
            }
            Backends::Oracle => Err(Error::Config("the oracle backend cannot play a chat model".into())),
        }
    }

    fn run_job(&self, job: &Job) -> (ProblemResult, Vec<ModuleEvent>) {
        let seed = job_seed(self.cfg.seed, job.run, job.index);
        let p = job.problem;
        let mut result = ProblemResult {
            run: job.run,
            problem_id: p.id.clone(),
            task: self.cfg.task,
            method: self.cfg.method,
            backend: self.cfg.backend,
            label: self.label.clone(),
            ablations: self.cfg.ablations(),
            optimal_steps: p.optimal_steps,
            budget: self.cfg.budget(),
            actions: Vec::new(),
            counters: Counters::default(),
            subgoals: Vec::new(),
            goal_confirmed: false,
            budget_exhausted: false,
            error: None,
            replay: replay_plan(self.env, p, &[], true, self.cfg.budget()),
        };
        let events = match self.cfg.method {
            Method::Pfc => self.plan(p, seed, &mut result),
            Method::ZeroShot => self.baseline(p, seed, SolutionMode::ZeroShot, &mut result),
            Method::Icl => self.baseline(p, seed, SolutionMode::Icl, &mut result),
        };
        let strict_plan = self.cfg.method == Method::Pfc;
        result.replay = replay_plan(self.env, p, &result.actions, strict_plan, self.cfg.budget());
        (result, events)
    }

    fn plan(&self, p: &Problem, seed: u64, result: &mut ProblemResult) -> Vec<ModuleEvent> {
        let scfg = self.cfg.search_config(mix_seed(seed, 1));
        let outcome = match self.backends {
            Backends::Oracle => {
                let mut b = OracleBackend::new(self.env.clone(), self.noise(seed));
                generate_plan(&p.id, &p.initial, &p.goal, &scfg, &mut b)
            }
            _ => self.chat_backend(seed).and_then(|mut b| generate_plan(&p.id, &p.initial, &p.goal, &scfg, &mut b)),
        };
        match outcome {
            Ok((plan, record)) => {
                result.actions = plan.actions().to_vec();
                result.counters = record.counters;
                result.subgoals = record.subgoals;
                result.goal_confirmed = record.goal_confirmed;
                result.budget_exhausted = record.budget_exhausted;
                result.error = record.error;
                record.events
            }
            Err(e) => {
                result.error = Some(e.to_string());
                Vec::new()
            }
        }
    }

    fn baseline(&self, p: &Problem, seed: u64, mode: SolutionMode, result: &mut ProblemResult) -> Vec<ModuleEvent> {
        let budget = self.cfg.budget();
        let outcome =
            self.chat_backend(seed).and_then(|mut b| llm_full_solution(&mut b, &p.initial, &p.goal, mode, budget));
        let (actions, exchanges) = match outcome {
            Ok(x) => x,
            Err(e) => {
                result.error = Some(e.to_string());
                return Vec::new();
            }
        };
        let parsed = serde_json::to_value(&actions).unwrap_or_default();
        let event = ModuleEvent {
            step: 0,
            depth: 0,
            module: Module::Actor,
            input_text: exchanges.first().map(|x| x.input.clone()).unwrap_or_default(),
            output_text: exchanges.last().map(|x| x.output.clone()).unwrap_or_default(),
            parsed,
            verdict: None,
            value: None,
            temperatures: exchanges.iter().filter_map(|x| x.temperature).collect(),
            cached: false,
            exchanges,
        };
        result.counters = Counters { module_calls: 1, ..Default::default() };
        result.actions = actions;
        vec![event]
    }
}

fn thread_count(cfg: &ExperimentConfig) -> usize {
    if let Some(n) = cfg.threads {
        return n;
    }
    match cfg.backend {
        BackendKind::Llm => cfg.llm.max_concurrent,
        BackendKind::Oracle | BackendKind::Simulated => {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }
}

fn prompt_set(cfg: &ExperimentConfig) -> Result<Arc<PromptSet>> {
    Ok(Arc::new(match &cfg.prompts {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::builtin(),
    }))
}

/// Runs `cfg` and returns its summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsSummary> {
    run_experiment_with(cfg, None).map(|o| o.summary)
}

/// Runs `cfg`. A supplied `transport` replaces the HTTP client of the `llm`
/// backend (credentials are then not required). Outputs are written when
/// `cfg.out` is set.
pub fn run_experiment_with(cfg: &ExperimentConfig, transport: Option<Arc<dyn Transport>>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let problems = build_problem_set(cfg)?;
    let backends = match cfg.backend {
        BackendKind::Oracle => Backends::Oracle,
        BackendKind::Simulated => Backends::Simulated { prompts: prompt_set(cfg)? },
        BackendKind::Llm => {
            let llm = cfg.llm.clone().with_env();
            let client = match transport {
                Some(t) => LlmClient::new(llm, t)?,
                None => LlmClient::http(llm)?,
            };
            Backends::Chat { backend: LlmBackend::new(Arc::new(client), prompt_set(cfg)?, &problems.env) }
        }
    };
    let ctx = Context { cfg, env: &problems.env, backends: &backends, label: cfg.label() };
    let jobs: Vec<Job> = (0..cfg.runs)
        .flat_map(|run| problems.problems.iter().enumerate().map(move |(index, problem)| Job { run, index, problem }))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cfg))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    log::info!("{} {} on {} problems x {} runs", cfg.task, cfg.label(), problems.problems.len(), cfg.runs);
    let mut outputs: Vec<(ProblemResult, Vec<ModuleEvent>)> =
        pool.install(|| jobs.par_iter().map(|j| ctx.run_job(j)).collect());
    outputs.sort_by(|a, b| (a.0.run, &a.0.problem_id).cmp(&(b.0.run, &b.0.problem_id)));

    let results: Vec<ProblemResult> = outputs.iter().map(|(r, _)| r.clone()).collect();
    let summary = summarize(&results).ok_or_else(|| Error::Config("the problem set is empty".into()))?;
    if let Some(out) = &cfg.out {
        write_outputs(out, cfg, &problems, &outputs, &summary)?;
    }
    Ok(ExperimentOutput { summary, results, problems })
}

fn write_outputs(
    out: &Path,
    cfg: &ExperimentConfig,
    problems: &ProblemSet,
    outputs: &[(ProblemResult, Vec<ModuleEvent>)],
    summary: &MetricsSummary,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let traces = out.join("traces");
    if traces.is_dir() {
        std::fs::remove_dir_all(&traces)?;
    }
    for (result, events) in outputs {
        write_trace(&traces, events, result)?;
    }
    problems.write(&out.join("problems"))?;
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    std::fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)? + "\n")?;
    let tables = emit_tables(std::slice::from_ref(summary));
    std::fs::write(out.join("tables.md"), tables.markdown)?;
    std::fs::write(out.join("tables.csv"), tables.csv)?;
    Ok(())
}
