use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::LlmConfig;
use crate::oracle::NoiseProfile;
use crate::types::SearchConfig;

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = s.trim().to_ascii_lowercase().replace('-', "_");
                $name::ALL.iter().copied().find(|v| v.as_str() == norm).ok_or_else(|| {
                    let names: Vec<&str> = $name::ALL.iter().map(|v| v.as_str()).collect();
                    Error::Config(format!("unknown {} {s:?}; expected one of {}", stringify!($name), names.join(", ")))
                })
            }
        }
    };
}

string_enum!(TaskKind { Toh3 => "toh3", Toh4 => "toh4", Steppath => "steppath", Valuepath => "valuepath" });
string_enum!(Method { Pfc => "pfc", ZeroShot => "zero_shot", Icl => "icl" });
string_enum!(BackendKind { Oracle => "oracle", Llm => "llm", Simulated => "simulated" });

impl TaskKind {
    pub fn is_graph(self) -> bool {
        matches!(self, TaskKind::Steppath | TaskKind::Valuepath)
    }

    pub fn default_budget(self) -> usize {
        match self {
            TaskKind::Toh3 => 10,
            TaskKind::Toh4 => 20,
            TaskKind::Steppath | TaskKind::Valuepath => 6,
        }
    }
}

impl Method {
    /// Row label used in tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Pfc => "LLM-PFC",
            Method::ZeroShot => "Zero-shot",
            Method::Icl => "ICL",
        }
    }
}

/// A module switched off by request (not by the task's own protocol).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    TaskDecomposer,
    TreeSearch,
    Monitor,
    Predictor,
    Cache,
}

impl Ablation {
    pub fn label(self) -> &'static str {
        match self {
            Ablation::TaskDecomposer => "w/o Task Decomposer",
            Ablation::TreeSearch => "w/o Tree Search",
            Ablation::Monitor => "w/o Monitor",
            Ablation::Predictor => "w/o Predictor",
            Ablation::Cache => "w/o Cache",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub method: Method,
    pub backend: BackendKind,
    pub branches: usize,
    pub depth: usize,
    /// Plan budget T; the task default when unset.
    pub budget: Option<usize>,
    pub no_monitor: bool,
    pub no_search: bool,
    pub no_decomposer: bool,
    pub no_predictor: bool,
    pub no_cache: bool,
    pub runs: u32,
    pub seed: u64,
    /// Fault injection; its own seed is replaced per problem.
    pub noise: NoiseProfile,
    pub out: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub prompts: Option<PathBuf>,
    pub llm: LlmConfig,
    pub steppath_steps: Vec<u32>,
    pub steppath_count: usize,
    /// Keep the worked-example starts in the 3-disk evaluation set.
    pub include_in_context: bool,
    pub threads: Option<usize>,
    /// Table row label; derived from method and ablations when unset.
    pub label: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: TaskKind::Toh3,
            method: Method::Pfc,
            backend: BackendKind::Oracle,
            branches: 2,
            depth: 2,
            budget: None,
            no_monitor: false,
            no_search: false,
            no_decomposer: false,
            no_predictor: false,
            no_cache: false,
            runs: 1,
            seed: 0,
            noise: NoiseProfile::default(),
            out: None,
            graph: None,
            prompts: None,
            llm: LlmConfig::default(),
            steppath_steps: vec![2, 3, 4],
            steppath_count: 20,
            include_in_context: false,
            threads: None,
            label: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(task: TaskKind, method: Method, backend: BackendKind) -> Self {
        ExperimentConfig { task, method, backend, ..Default::default() }
    }

    /// Reads TOML or JSON, chosen by extension (TOML when ambiguous).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or_else(|| self.task.default_budget())
    }

    /// Explicit label, else the ablation labels joined, else the method label.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let abl = self.ablations();
        if abl.is_empty() {
            self.method.label().to_string()
        } else {
            abl.iter().map(|a| a.label()).collect::<Vec<_>>().join(", ")
        }
    }

    /// Modules switched off by request, in table order.
    pub fn ablations(&self) -> Vec<Ablation> {
        let mut out = Vec::new();
        if self.no_decomposer && !self.task.is_graph() {
            out.push(Ablation::TaskDecomposer);
        }
        if self.no_search && self.task != TaskKind::Steppath {
            out.push(Ablation::TreeSearch);
        }
        if self.no_monitor {
            out.push(Ablation::Monitor);
        }
        if self.no_predictor && !self.task.is_graph() {
            out.push(Ablation::Predictor);
        }
        if self.no_cache {
            out.push(Ablation::Cache);
        }
        out
    }

    /// Planner settings after the task's fixed protocol is applied: graph tasks
    /// run without decomposer and predictor, Steppath also without search.
    pub fn search_config(&self, rng_seed: u64) -> SearchConfig {
        let graph = self.task.is_graph();
        SearchConfig {
            branches: self.branches,
            depth: self.depth,
            budget: self.budget(),
            use_decomposer: !self.no_decomposer && !graph,
            use_search: !self.no_search && self.task != TaskKind::Steppath,
            use_predictor: !self.no_predictor && !graph,
            use_monitor: !self.no_monitor,
            use_cache: !self.no_cache,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.search_config(0).validate()?;
        self.noise.validate()?;
        self.llm.validate()?;
        if self.method != Method::Pfc && self.backend == BackendKind::Oracle {
            return Err(Error::Config(format!(
                "method {} needs a chat backend (llm or simulated); the oracle only plays module roles",
                self.method
            )));
        }
        if self.task == TaskKind::Steppath && (self.steppath_steps.is_empty() || self.steppath_count == 0) {
            return Err(Error::Config("steppath needs at least one step count and a positive count".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }
}
