//! File formats, scenario loading and the command-line driver for
//! `catgal-core`.
//!
//! Every subcommand reads one JSON file (or, for `suite`, a directory of
//! them) and prints a report with one entry per check. Exit codes: `0` when
//! every check passes, `1` when a check fails, `2` on unreadable or invalid
//! input.

pub mod commands;
pub mod error;
pub mod formats;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use catgal_core::homology::Mode;
use catgal_core::Config;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use commands::{infer_commands, run_file, Check, FileCommand, GraphAction, Outcome};
pub use error::{CliError, CliResult};
pub use scenario::{load_scenario, parse_scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "catgal", version, about = "Finite checks of categorical Galois theory")]
pub struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Omit wall-clock fields so reports compare byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Largest group built by permutation closure.
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    /// Node budget for homomorphism and lifting searches.
    #[arg(long, global = true)]
    pub hom_budget: Option<u64>,
    /// Word-length bound for the graph exact-sequence checks.
    #[arg(long, global = true)]
    pub max_word_len: Option<usize>,
    /// Worker threads for `suite`.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Dense,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    Pi1,
    Exactseq,
    Deck,
    Galois,
    Monodromy,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order, abelianization and axioms of a group.
    Group { file: PathBuf },
    /// Galois-structure classification of an extension.
    Ext { file: PathBuf },
    /// Galois group of a normal extension by both routes.
    Gal { file: PathBuf },
    /// Fundamental group from a certified weakly universal extension.
    Pi1 { file: PathBuf },
    /// Kan-extension verdict for a scenario.
    Kan { file: PathBuf },
    /// First and second integral homology.
    H2 {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
    },
    /// Graphs and covers.
    Graph {
        #[arg(value_enum)]
        action: GraphArg,
        file: PathBuf,
    },
    /// Every JSON file of a directory with its inferred subcommand.
    Suite { dir: PathBuf },
}

impl Cli {
    pub fn config(&self) -> Config {
        let mut c = Config::default();
        if let Some(n) = self.max_order {
            c.max_order = n;
        }
        if let Some(n) = self.hom_budget {
            c.hom_budget = n;
        }
        if let Some(n) = self.max_word_len {
            c.max_word_len = n;
        }
        c
    }
}

impl From<GraphArg> for GraphAction {
    fn from(a: GraphArg) -> GraphAction {
        match a {
            GraphArg::Pi1 => GraphAction::Pi1,
            GraphArg::Exactseq => GraphAction::ExactSeq,
            GraphArg::Deck => GraphAction::Deck,
            GraphArg::Galois => GraphAction::Galois,
            GraphArg::Monodromy => GraphAction::Monodromy,
        }
    }
}

/// The result of one invocation: the rendered report and the exit code.
pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs a parsed command line; `argv` is echoed into the report.
pub fn run(cli: &Cli, argv: &[String]) -> Run {
    let start = Instant::now();
    let config = cli.config();
    let timing = !cli.no_timing;
    let result = match &cli.command {
        Command::Suite { dir } => suite(dir, config, timing, cli.threads.max(1)),
        other => {
            let (cmd, file) = match other {
                Command::Group { file } => (FileCommand::Group, file),
                Command::Ext { file } => (FileCommand::Ext, file),
                Command::Gal { file } => (FileCommand::Gal, file),
                Command::Pi1 { file } => (FileCommand::Pi1, file),
                Command::Kan { file } => (FileCommand::Kan, file),
                Command::H2 { file, mode } => {
                    let m = match mode {
                        ModeArg::Auto => None,
                        ModeArg::Dense => Some(Mode::Dense),
                        ModeArg::Local => Some(Mode::Local),
                    };
                    (FileCommand::H2(m), file)
                }
                Command::Graph { action, file } => (FileCommand::Graph((*action).into()), file),
                Command::Suite { .. } => unreachable!("handled above"),
            };
            run_file(cmd, file, config, timing)
        }
    };
    match result {
        Ok(out) => {
            let passed = out.passed();
            let mut doc = json!({
                "tool": format!("catgal {VERSION}"),
                "command": argv,
                "passed": passed,
                "checks": out.checks,
                "report": out.report,
            });
            if timing {
                doc["ms"] = json!(start.elapsed().as_millis() as u64);
            }
            let stdout = if cli.pretty { render_human(&doc) } else { format!("{doc}\n") };
            Run { code: if passed { 0 } else { 1 }, stdout, stderr: String::new() }
        }
        Err(e) => Run { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn render_human(doc: &Value) -> String {
    let mut s = String::new();
    let argv: Vec<&str> = doc["command"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
    s.push_str(&format!("catgal {}\n", argv.join(" ")));
    if let Some(files) = doc["report"].get("files").and_then(Value::as_array) {
        for f in files {
            let mark = if f["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            s.push_str(&format!("{mark}  {} [{}]\n", f["file"].as_str().unwrap_or(""), f["command"].as_str().unwrap_or("")));
            if let Some(err) = f.get("error").and_then(Value::as_str) {
                s.push_str(&format!("      error: {err}\n"));
            }
            render_checks(&mut s, &f["checks"], "    ");
        }
    } else if let Some(report) = doc["report"].as_object() {
        render_checks(&mut s, &doc["checks"], "");
        for (k, v) in report {
            s.push_str(&format!("  {k}: {v}\n"));
        }
    }
    if let Some(ms) = doc.get("ms") {
        s.push_str(&format!("  ({ms} ms)\n"));
    }
    let verdict = if doc["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
    s.push_str(&format!("{verdict}\n"));
    s
}

fn render_checks(s: &mut String, checks: &Value, indent: &str) {
    for c in checks.as_array().into_iter().flatten() {
        let mark = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
        s.push_str(&format!("{indent}{mark}  {}", c["name"].as_str().unwrap_or("")));
        if let Some(w) = c.get("witness").and_then(Value::as_str) {
            s.push_str(&format!(": {w}"));
        }
        s.push('\n');
    }
}

/// Runs every `*.json` file of `dir` (not recursive) in filename order.
/// Files that cannot be read or classified count as failures.
pub fn suite(dir: &Path, config: Config, timing: bool, threads: usize) -> CliResult<Outcome> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut results: Vec<Vec<Value>> = vec![Vec::new(); files.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<_> = results.chunks_mut(files.len().div_ceil(threads).max(1)).enumerate().collect();
        let per = files.len().div_ceil(threads).max(1);
        for (k, chunk) in chunks {
            let files = &files;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = run_suite_file(&files[k * per + i], dir, config, timing);
                }
            });
        }
    });
    let entries: Vec<Value> = results.into_iter().flatten().collect();
    let mut checks = Vec::new();
    for e in &entries {
        let name = format!("{} [{}]", e["file"].as_str().unwrap_or(""), e["command"].as_str().unwrap_or(""));
        let passed = e["passed"].as_bool() == Some(true);
        let witness = || {
            if let Some(err) = e.get("error").and_then(Value::as_str) {
                return err.to_string();
            }
            let failed: Vec<String> = e["checks"]
                .as_array()
                .into_iter()
                .flatten()
                .filter(|c| c["passed"].as_bool() != Some(true))
                .map(|c| match c.get("witness").and_then(Value::as_str) {
                    Some(w) => format!("{}: {w}", c["name"].as_str().unwrap_or("")),
                    None => c["name"].as_str().unwrap_or("").to_string(),
                })
                .collect();
            failed.join("; ")
        };
        checks.push(Check::new(name, passed, witness));
    }
    let report = json!({"directory": dir.display().to_string(), "files": entries});
    Ok(Outcome { report, checks })
}

fn run_suite_file(path: &Path, dir: &Path, config: Config, timing: bool) -> Vec<Value> {
    let rel = path.strip_prefix(dir).unwrap_or(path).display().to_string();
    let doc = match formats::read_json(path) {
        Ok(d) => d,
        Err(e) => return vec![json!({"file": rel, "command": "?", "passed": false, "error": e.to_string()})],
    };
    let Some(cmds) = infer_commands(&doc) else {
        return vec![json!({"file": rel, "command": "?", "passed": false, "error": "cannot infer a subcommand"})];
    };
    cmds.into_iter()
        .map(|cmd| match run_file(cmd, path, config, timing) {
            Ok(out) => json!({
                "file": rel,
                "command": cmd.name(),
                "passed": out.passed(),
                "checks": out.checks,
                "report": out.report,
            }),
            Err(e) => json!({"file": rel, "command": cmd.name(), "passed": false, "error": e.to_string()}),
        })
        .collect()
}
