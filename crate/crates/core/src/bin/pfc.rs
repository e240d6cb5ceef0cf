use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pfc_core::harness::{
    build_problem_set, emit_tables, recompute_dir, run_experiment, BackendKind, ExperimentConfig, Method,
    MetricsSummary, TaskKind,
};
use pfc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "pfc", version, about = "Modular planner benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its outputs.
    Run(Box<RunArgs>),
    /// Render tables from every summary.json below the given directories.
    Tables {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Print CSV instead of markdown.
        #[arg(long)]
        csv: bool,
    },
    /// Recompute metrics from trace files and compare with summary.json.
    Recompute {
        dir: PathBuf,
        /// Write summary.json and tables from the recomputed metrics.
        #[arg(long)]
        write: bool,
    },
    /// Print (or write) a generated problem set.
    GenProblems {
        #[arg(long)]
        task: TaskKind,
        /// Steppath distances; repeatable.
        #[arg(long, value_delimiter = ',')]
        steps: Vec<u32>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        include_in_context: bool,
        /// Directory for `<task>.json`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    backend: Option<BackendKind>,
    #[arg(long)]
    branches: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_monitor: bool,
    #[arg(long)]
    no_search: bool,
    #[arg(long)]
    no_decomposer: bool,
    #[arg(long)]
    no_predictor: bool,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    invalid_action_rate: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    evaluator_error_bias: Option<i64>,
    #[arg(long)]
    monitor_false_accept_rate: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    steps: Vec<u32>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    include_in_context: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    label: Option<String>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { c.$field = v; })* };
        }
        set!(task, method, backend, branches, depth, runs, seed);
        macro_rules! set_opt {
            ($($field:ident),*) => { $(if self.$field.is_some() { c.$field = self.$field; })* };
        }
        set_opt!(budget, out, graph, prompts, label, threads);
        c.no_monitor |= self.no_monitor;
        c.no_search |= self.no_search;
        c.no_decomposer |= self.no_decomposer;
        c.no_predictor |= self.no_predictor;
        c.no_cache |= self.no_cache;
        c.include_in_context |= self.include_in_context;
        if let Some(v) = self.invalid_action_rate {
            c.noise.invalid_action_rate = v;
        }
        if let Some(v) = self.evaluator_error_bias {
            c.noise.evaluator_error_bias = v;
        }
        if let Some(v) = self.monitor_false_accept_rate {
            c.noise.monitor_false_accept_rate = v;
        }
        if !self.steps.is_empty() {
            c.steppath_steps = self.steps;
        }
        if let Some(n) = self.count {
            c.steppath_count = n;
        }
        Ok(c)
    }
}

fn print_summary(s: &MetricsSummary) {
    let pm = |x: pfc_core::harness::Stat| format!("{:.4} ± {:.4}", x.mean, x.sem);
    println!(
        "{} {} [{}]: solved {} (any {}), invalid actions {}, rejected proposals {}, runs {}, problems {}, errors {}",
        s.task,
        s.label,
        s.backend,
        pm(s.fraction_solved_strict),
        pm(s.fraction_solved_any),
        pm(s.fraction_invalid_actions),
        pm(s.fraction_rejected_proposals),
        s.runs,
        s.problems,
        s.errors
    );
}

/// `summary.json` holds one summary or a list of them.
fn read_summaries(path: &Path) -> Result<Vec<MetricsSummary>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Ok(match value {
        serde_json::Value::Array(_) => serde_json::from_value(value)?,
        other => vec![serde_json::from_value(other)?],
    })
}

fn find_summaries(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_summaries(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == "summary.json") {
            out.push(p);
        }
    }
    Ok(())
}

fn write_summaries(dir: &Path, summaries: &[MetricsSummary]) -> Result<()> {
    let text = match summaries {
        [one] => serde_json::to_string_pretty(one)?,
        many => serde_json::to_string_pretty(many)?,
    };
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    let t = emit_tables(summaries);
    std::fs::write(dir.join("tables.md"), t.markdown)?;
    std::fs::write(dir.join("tables.csv"), t.csv)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.into_config()?;
            let summary = run_experiment(&cfg)?;
            print_summary(&summary);
            print!("{}", emit_tables(std::slice::from_ref(&summary)).markdown);
            if let Some(out) = &cfg.out {
                eprintln!("outputs written to {}", out.display());
            }
        }
        Command::Tables { dirs, csv } => {
            let mut files = Vec::new();
            for d in &dirs {
                find_summaries(d, &mut files)?;
            }
            let mut summaries = Vec::new();
            for f in &files {
                summaries.extend(read_summaries(f)?);
            }
            let t = emit_tables(&summaries);
            print!("{}", if csv { t.csv } else { t.markdown });
        }
        Command::Recompute { dir, write } => {
            let recomputed = recompute_dir(&dir)?;
            for s in &recomputed {
                print_summary(s);
            }
            print!("{}", emit_tables(&recomputed).markdown);
            let existing = dir.join("summary.json");
            let mut code = ExitCode::SUCCESS;
            if existing.is_file() {
                let stored = read_summaries(&existing)?;
                let same = stored.len() == recomputed.len() && stored.iter().all(|s| recomputed.contains(s));
                if same {
                    println!("summary.json matches the traces");
                } else {
                    eprintln!("summary.json differs from the metrics recomputed from traces");
                    code = ExitCode::FAILURE;
                }
            }
            if write {
                write_summaries(&dir, &recomputed)?;
                code = ExitCode::SUCCESS;
            }
            return Ok(code);
        }
        Command::GenProblems { task, steps, count, seed, graph, include_in_context, out } => {
            let mut cfg = ExperimentConfig { task, seed, graph, include_in_context, ..Default::default() };
            if !steps.is_empty() {
                cfg.steppath_steps = steps;
            }
            if let Some(n) = count {
                cfg.steppath_count = n;
            }
            let set = build_problem_set(&cfg)?;
            match out {
                Some(dir) => {
                    set.write(&dir)?;
                    eprintln!(
                        "{} problems written to {}",
                        set.problems.len(),
                        dir.join(format!("{task}.json")).display()
                    );
                }
                None => println!("{}", serde_json::to_string_pretty(&set.to_file())?),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
