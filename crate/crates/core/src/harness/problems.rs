use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, TaskKind};
use crate::error::Result;
use crate::graph::{generate_steppath, generate_valuepath, GraphFile, RoomGraph};
use crate::task::TaskEnv;
use crate::toh;
use crate::types::{Configuration, Goal};

/// One evaluation problem with its BFS-optimal solution length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub initial: Configuration,
    pub goal: Goal,
    pub optimal_steps: u32,
}

#[derive(Debug, Clone)]
pub struct ProblemSet {
    pub task: TaskKind,
    pub env: TaskEnv,
    pub problems: Vec<Problem>,
}

/// Serialized form written under `problems/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    pub problems: Vec<Problem>,
}

impl ProblemSet {
    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            task: self.task,
            graph: self.env.graph().map(RoomGraph::to_file),
            problems: self.problems.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&self.to_file())? + "\n";
        std::fs::write(dir.join(format!("{}.json", self.task)), text)?;
        Ok(())
    }

    pub fn mean_optimal(&self) -> f64 {
        self.problems.iter().map(|p| p.optimal_steps as f64).sum::<f64>() / self.problems.len().max(1) as f64
    }
}

pub fn load_graph(cfg: &ExperimentConfig) -> Result<RoomGraph> {
    match &cfg.graph {
        Some(path) => RoomGraph::load(path),
        None => Ok(RoomGraph::default_graph()),
    }
}

fn toh_set(task: TaskKind, n: u32, keep_examples: bool) -> Result<ProblemSet> {
    let examples = toh::default_in_context_starts();
    let problems = toh::enumerate_problems(n)?
        .into_iter()
        .filter(|p| keep_examples || !examples.contains(&p.initial))
        .map(|p| {
            let optimal_steps = toh::bfs_optimal(&p.initial, &p.goal)?;
            Ok(Problem {
                id: p.id,
                initial: Configuration::Toh(p.initial),
                goal: Goal::configuration(Configuration::Toh(p.goal)),
                optimal_steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProblemSet { task, env: TaskEnv::Toh, problems })
}

/// The evaluation set for `cfg.task`: 24 three-disk problems (the two
/// worked-example starts removed), 80 four-disk problems, 20 Steppath
/// problems per step count, and one Valuepath problem per reward-free room.
pub fn build_problem_set(cfg: &ExperimentConfig) -> Result<ProblemSet> {
    match cfg.task {
        TaskKind::Toh3 => toh_set(cfg.task, 3, cfg.include_in_context),
        TaskKind::Toh4 => toh_set(cfg.task, 4, true),
        TaskKind::Steppath => {
            let g = load_graph(cfg)?;
            let mut problems = Vec::new();
            for &steps in &cfg.steppath_steps {
                for p in generate_steppath(&g, steps, cfg.steppath_count, crate::mix_seed(cfg.seed, steps as u64))? {
                    problems.push(Problem {
                        id: p.id,
                        initial: Configuration::room(p.start),
                        goal: Goal::room(p.target),
                        optimal_steps: p.optimal_steps,
                    });
                }
            }
            Ok(ProblemSet { task: cfg.task, env: TaskEnv::Graph(Arc::new(g)), problems })
        }
        TaskKind::Valuepath => {
            let g = load_graph(cfg)?;
            let goal = g.reward_goal()?;
            let problems = generate_valuepath(&g)?
                .into_iter()
                .map(|p| Problem {
                    id: p.id,
                    initial: Configuration::room(p.start),
                    goal: goal.clone(),
                    optimal_steps: p.optimal_steps,
                })
                .collect();
            Ok(ProblemSet { task: cfg.task, env: TaskEnv::Graph(Arc::new(g)), problems })
        }
    }
}
