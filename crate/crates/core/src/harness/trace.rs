use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{summarize, MetricsSummary, ProblemResult};
use crate::error::{Error, Result};
use crate::orchestrator::ModuleEvent;

/// One JSONL line: module events first, then the scored result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceLine {
    Event(ModuleEvent),
    Result(ProblemResult),
}

pub fn trace_file_name(result: &ProblemResult) -> String {
    let id: String =
        result.problem_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("run{}_{id}.jsonl", result.run)
}

/// Writes `events` and `result` as one trace file in `dir`.
pub fn write_trace(dir: &Path, events: &[ModuleEvent], result: &ProblemResult) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(trace_file_name(result));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    for e in events {
        serde_json::to_writer(&mut out, &TraceLine::Event(e.clone()))?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &TraceLine::Result(result.clone()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(path)
}

/// Parses every line of one trace file. Blank lines are skipped.
pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>> {
    let file = std::fs::File::open(path)?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line).map_err(|e| Error::TraceFormat {
            file: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

/// All `*.jsonl` files below `dir`, sorted by path.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Scored results found in `files`. Each file must end with a result line.
pub fn read_results(files: &[PathBuf]) -> Result<Vec<ProblemResult>> {
    let mut results = Vec::new();
    for f in files {
        let lines = read_trace(f)?;
        if !matches!(lines.last(), Some(TraceLine::Result(_))) {
            return Err(Error::TraceFormat {
                file: f.clone(),
                line: lines.len(),
                message: "trace does not end with a result line".into(),
            });
        }
        results.extend(lines.into_iter().filter_map(|l| match l {
            TraceLine::Result(r) => Some(r),
            TraceLine::Event(_) => None,
        }));
    }
    Ok(results)
}

/// Metrics from trace files alone, one summary per (task, label) group.
pub fn recompute_metrics(files: &[PathBuf]) -> Result<Vec<MetricsSummary>> {
    let results = read_results(files)?;
    let mut groups: Vec<((String, String), Vec<ProblemResult>)> = Vec::new();
    for r in results {
        let key = (r.task.to_string(), r.label.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(groups.iter().filter_map(|(_, g)| summarize(g)).collect())
}

/// [`recompute_metrics`] over every trace file below `dir`.
pub fn recompute_dir(dir: &Path) -> Result<Vec<MetricsSummary>> {
    let files = trace_files(dir)?;
    if files.is_empty() {
        return Err(Error::Config(format!("no trace files below {}", dir.display())));
    }
    recompute_metrics(&files)
}
