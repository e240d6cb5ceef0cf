use std::collections::BTreeSet;

use super::config::{Method, TaskKind};
use super::metrics::{MetricsSummary, Stat};

/// Rendered result tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    pub markdown: String,
    pub csv: String,
}

struct Table {
    title: &'static str,
    /// Column group label per column, "" for the model column.
    groups: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Two decimals with trailing zeros trimmed down to one: 0.74, 0.5, 1.0.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.strip_suffix('0').unwrap_or(&s);
    if s == "-0.0" {
        "0.0".into()
    } else {
        s.to_string()
    }
}

/// Means only; standard errors stay in the summary JSON.
fn cell(s: Option<Stat>) -> String {
    s.map_or_else(|| "-".into(), |s| fmt_num(s.mean))
}

fn method_rank(m: Method) -> u8 {
    match m {
        Method::ZeroShot => 0,
        Method::Icl => 1,
        Method::Pfc => 2,
    }
}

/// Summaries of `task` without ablations, in baseline-then-planner order.
fn plain_rows(summaries: &[MetricsSummary], task: TaskKind) -> Vec<&MetricsSummary> {
    let mut rows: Vec<&MetricsSummary> = Vec::new();
    for s in summaries.iter().filter(|s| s.task == task && s.ablations.is_empty()) {
        if !rows.iter().any(|r| r.label == s.label) {
            rows.push(s);
        }
    }
    rows.sort_by_key(|s| method_rank(s.method));
    rows
}

fn bucket_columns(summaries: &[&MetricsSummary], defaults: &[u32]) -> Vec<u32> {
    let mut set: BTreeSet<u32> = defaults.iter().copied().collect();
    set.extend(summaries.iter().flat_map(|s| s.buckets.iter().map(|b| b.optimal_steps)));
    set.into_iter().collect()
}

fn bucket(s: &MetricsSummary, steps: u32) -> Option<&super::metrics::BucketMetrics> {
    s.buckets.iter().find(|b| b.optimal_steps == steps)
}

fn valuepath(summaries: &[MetricsSummary]) -> Table {
    let rows = plain_rows(summaries, TaskKind::Valuepath);
    let steps = bucket_columns(&rows, &[1, 2, 4]);
    let mut groups = vec![String::new(), "Fraction solved problems".into(), "Fraction invalid actions".into()];
    let mut columns = vec!["Model".to_string(), String::new(), String::new()];
    for k in &steps {
        groups.push("Avg plan steps".into());
        columns.push(format!("{k}-step"));
    }
    let rows = rows
        .iter()
        .map(|s| {
            let mut r =
                vec![s.label.clone(), cell(Some(s.fraction_solved_strict)), cell(Some(s.fraction_invalid_actions))];
            r.extend(steps.iter().map(|&k| cell(bucket(s, k).and_then(|b| b.avg_plan_steps))));
            r
        })
        .collect();
    Table { title: "Valuepath", groups, columns, rows }
}

fn steppath(summaries: &[MetricsSummary]) -> Table {
    let rows = plain_rows(summaries, TaskKind::Steppath);
    let steps = bucket_columns(&rows, &[2, 3, 4]);
    let mut groups = vec![String::new()];
    let mut columns = vec!["Model".to_string()];
    for g in ["Fraction solved problems", "Fraction invalid actions", "Avg plan steps"] {
        for k in &steps {
            groups.push(g.into());
            columns.push(format!("{k}-step"));
        }
    }
    let rows = rows
        .iter()
        .map(|s| {
            let mut r = vec![s.label.clone()];
            let b = |k: u32| bucket(s, k);
            r.extend(steps.iter().map(|&k| cell(b(k).map(|b| b.fraction_solved_strict))));
            r.extend(steps.iter().map(|&k| cell(b(k).map(|b| b.fraction_invalid_actions))));
            r.extend(steps.iter().map(|&k| cell(b(k).and_then(|b| b.avg_plan_steps))));
            r
        })
        .collect();
    Table { title: "Steppath", groups, columns, rows }
}

fn hanoi(summaries: &[MetricsSummary]) -> Table {
    let mut labels: Vec<(u8, String)> = Vec::new();
    for s in summaries.iter().filter(|s| matches!(s.task, TaskKind::Toh3 | TaskKind::Toh4) && s.ablations.is_empty()) {
        if !labels.iter().any(|(_, l)| *l == s.label) {
            labels.push((method_rank(s.method), s.label.clone()));
        }
    }
    labels.sort_by_key(|(rank, _)| *rank);
    let find = |task: TaskKind, label: &str| summaries.iter().find(|s| s.task == task && s.label == label);
    let groups = [
        "",
        "Fraction solved problems",
        "Fraction solved problems",
        "Fraction invalid actions",
        "Fraction invalid actions",
    ];
    let columns = ["Model", "3-disk", "4-disk (OOD)", "3-disk", "4-disk (OOD)"];
    let rows = labels
        .iter()
        .map(|(_, label)| {
            let (t3, t4) = (find(TaskKind::Toh3, label), find(TaskKind::Toh4, label));
            let c = |s: Option<&MetricsSummary>, f: fn(&MetricsSummary) -> Stat| match s {
                Some(s) => cell(Some(f(s))),
                None => "-".into(),
            };
            vec![
                label.clone(),
                c(t3, |s| s.fraction_solved_strict),
                c(t4, |s| s.fraction_solved_strict),
                c(t3, |s| s.fraction_invalid_actions),
                c(t4, |s| s.fraction_invalid_actions),
            ]
        })
        .collect();
    Table {
        title: "Tower of Hanoi",
        groups: groups.iter().map(|s| s.to_string()).collect(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

/// Three-disk planner runs: the full configuration first, then single
/// ablations in module order, then combined ablations.
fn ablations(summaries: &[MetricsSummary]) -> Table {
    let mut rows: Vec<&MetricsSummary> = Vec::new();
    for s in summaries.iter().filter(|s| s.task == TaskKind::Toh3 && s.method == Method::Pfc) {
        if !rows.iter().any(|r| r.label == s.label) {
            rows.push(s);
        }
    }
    rows.sort_by(|a, b| (a.ablations.len().min(2), &a.ablations).cmp(&(b.ablations.len().min(2), &b.ablations)));
    Table {
        title: "Ablations (Tower of Hanoi, 3 disks)",
        groups: vec![String::new(); 3],
        columns: vec!["Model".into(), "Fraction solved problems".into(), "Fraction invalid actions".into()],
        rows: rows
            .iter()
            .map(|s| {
                vec![s.label.clone(), cell(Some(s.fraction_solved_strict)), cell(Some(s.fraction_invalid_actions))]
            })
            .collect(),
    }
}

fn markdown(t: &Table) -> String {
    let mut out = format!("## {}\n\n", t.title);
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    if t.groups.iter().any(|g| !g.is_empty()) && t.columns.iter().skip(1).any(|c| !c.is_empty()) {
        out += &line(&t.groups);
        out += &line(&t.columns.iter().map(|_| "---".to_string()).collect::<Vec<_>>());
        out += &line(&t.columns);
    } else {
        let header: Vec<String> =
            t.columns.iter().zip(&t.groups).map(|(c, g)| if c.is_empty() { g.clone() } else { c.clone() }).collect();
        out += &line(&header);
        out += &line(&header.iter().map(|_| "---".to_string()).collect::<Vec<_>>());
    }
    for r in &t.rows {
        out += &line(r);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(t: &Table) -> String {
    let line = |first: &str, cells: &[String]| {
        let mut all = vec![csv_field(first)];
        all.extend(cells.iter().map(|c| csv_field(c)));
        all.join(",") + "\n"
    };
    let header: Vec<String> = t
        .columns
        .iter()
        .zip(&t.groups)
        .map(|(c, g)| match (g.is_empty(), c.is_empty()) {
            (true, _) => c.clone(),
            (false, true) => g.clone(),
            (false, false) => format!("{g} {c}"),
        })
        .collect();
    let mut out = line("table", &header);
    for r in &t.rows {
        out += &line(t.title, r);
    }
    out
}

/// Renders the four result tables. Tables with no matching summaries keep
/// their headers.
pub fn emit_tables(summaries: &[MetricsSummary]) -> Tables {
    let tables = [valuepath(summaries), steppath(summaries), hanoi(summaries), ablations(summaries)];
    let markdown = tables.iter().map(markdown).collect::<Vec<_>>().join("\n");
    let csv = tables.iter().map(csv).collect::<Vec<_>>().join("\n");
    Tables { markdown, csv }
}
