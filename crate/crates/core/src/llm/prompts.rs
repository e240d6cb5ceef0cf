//! Prompt templates: plain text with `{{slot}}` markers, one file per
//! (task, template name). Built-in copies are compiled in; a directory with
//! the same layout overrides them file by file.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::Module;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTask {
    Toh,
    Graph,
}

impl PromptTask {
    pub fn dir(self) -> &'static str {
        match self {
            PromptTask::Toh => "toh",
            PromptTask::Graph => "graph",
        }
    }
}

impl fmt::Display for PromptTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir())
    }
}

macro_rules! builtin {
    ($task:literal, $name:literal) => {
        ($task, $name, include_str!(concat!("../../prompts/", $task, "/", $name, ".txt")))
    };
}

const BUILTIN: &[(&str, &str, &str)] = &[
    builtin!("toh", "task_decomposer"),
    builtin!("toh", "actor"),
    builtin!("toh", "monitor"),
    builtin!("toh", "predictor"),
    builtin!("toh", "evaluator_heuristic"),
    builtin!("toh", "evaluator_heuristic_reply"),
    builtin!("toh", "evaluator"),
    builtin!("toh", "task_coordinator"),
    builtin!("toh", "solution_zero_shot"),
    builtin!("toh", "solution_icl"),
    builtin!("graph", "task_decomposer"),
    builtin!("graph", "actor"),
    builtin!("graph", "monitor"),
    builtin!("graph", "predictor"),
    builtin!("graph", "evaluator"),
    builtin!("graph", "task_coordinator"),
    builtin!("graph", "solution_zero_shot"),
    builtin!("graph", "solution_icl_steppath"),
    builtin!("graph", "solution_icl_valuepath"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub task: PromptTask,
    pub name: String,
    /// The module the template serves; `None` for baseline solution prompts.
    pub role: Option<Module>,
    pub text: String,
}

impl PromptTemplate {
    pub fn new(task: PromptTask, name: impl Into<String>, text: impl Into<String>) -> Self {
        let name = name.into();
        let mut text: String = text.into();
        if text.ends_with('\n') {
            text.pop();
        }
        let role = Module::ALL.into_iter().find(|m| name.starts_with(m.name()));
        PromptTemplate { task, name, role, text }
    }

    /// Slot names in order of first appearance.
    pub fn slots(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut rest = self.text.as_str();
        while let Some(i) = rest.find("{{") {
            let Some(j) = rest[i..].find("}}") else { break };
            let name = &rest[i + 2..i + j];
            if !out.iter().any(|s| s == name) {
                out.push(name.to_string());
            }
            rest = &rest[i + j + 2..];
        }
        out
    }

    /// Substitutes every slot in one pass; slot values are not rescanned.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String> {
        let mut out = String::with_capacity(self.text.len() + 256);
        let mut rest = self.text.as_str();
        while let Some(i) = rest.find("{{") {
            let Some(j) = rest[i..].find("}}") else { break };
            let name = &rest[i + 2..i + j];
            let value = values.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).ok_or_else(|| {
                Error::Config(format!("template {}/{} has unfilled slot {{{{{name}}}}}", self.task, self.name))
            })?;
            out.push_str(&rest[..i]);
            out.push_str(value);
            rest = &rest[i + j + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: HashMap<(PromptTask, String), PromptTemplate>,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet::builtin()
    }
}

impl PromptSet {
    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|(task, name, text)| {
                let task = if *task == "toh" { PromptTask::Toh } else { PromptTask::Graph };
                ((task, name.to_string()), PromptTemplate::new(task, *name, *text))
            })
            .collect();
        PromptSet { templates }
    }

    /// Built-ins overridden by any `<dir>/<task>/<name>.txt` present.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!("prompt directory {} does not exist", dir.display())));
        }
        let mut set = PromptSet::builtin();
        for task in [PromptTask::Toh, PromptTask::Graph] {
            let sub = dir.join(task.dir());
            if !sub.is_dir() {
                continue;
            }
            for entry in std::fs::read_dir(&sub)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                    continue;
                }
                let Some(name) = path.file_stem().and_then(|s| s.to_str()) else { continue };
                let text = std::fs::read_to_string(&path)?;
                set.templates.insert((task, name.to_string()), PromptTemplate::new(task, name, text));
            }
        }
        Ok(set)
    }

    pub fn get(&self, task: PromptTask, name: &str) -> Result<&PromptTemplate> {
        self.templates
            .get(&(task, name.to_string()))
            .ok_or_else(|| Error::Config(format!("no prompt template {task}/{name}")))
    }

    pub fn render(&self, task: PromptTask, name: &str, values: &[(&str, &str)]) -> Result<String> {
        self.get(task, name)?.render(values)
    }
}

/// English number word for small counts, digits otherwise.
pub fn count_word(n: usize) -> String {
    const WORDS: [&str; 11] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    WORDS.get(n).map(|w| w.to_string()).unwrap_or_else(|| n.to_string())
}
