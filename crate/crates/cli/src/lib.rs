//! Command-line entry points and the HTTP session service.

pub mod config;
pub mod service;

use anyhow::{anyhow, bail, Context as _};
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use config::{env_settings, load_graph_ref, load_schema_ref, parse_config_text, ServiceConfig, Settings};
use graphtalk::benchmark::{export_benchmark, generate_benchmark};
use graphtalk::dialogue::{explain_deterministic, Execution, Explanation, ParseResult, SessionTurn};
use graphtalk::engine::execute;
use graphtalk::eval::{
    read_counts, read_discordance, write_count_reports, write_discordance_reports, write_matrix_reports,
    OutcomeMatrix,
};
use graphtalk::syntax::{parse_query, print_query};
use graphtalk::validate::validate;
use service::{Action, AppState};
use std::ffi::OsString;
use std::io::Read;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "graphtalk", version, about = "Natural-language questions over property graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark corpus tools.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Check a query against a schema; exits 1 when diagnostics are found.
    Validate {
        #[arg(long)]
        schema: String,
        /// Query file, `-` for standard input, or the query text itself.
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Execute a query against a graph.
    Run {
        #[arg(long)]
        schema: String,
        /// Bundled fixture name or graph file.
        #[arg(long)]
        graph: Option<String>,
        query: String,
        #[arg(long)]
        json: bool,
    },
    /// Explain a query without a language model.
    Explain {
        #[arg(long)]
        schema: String,
        query: String,
        #[arg(long)]
        json: bool,
    },
    /// Ask a question in a new or existing session.
    Ask {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        session: Option<String>,
        question: String,
        #[arg(long)]
        json: bool,
    },
    /// Amend the current query of a session.
    Amend {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        session: String,
        instruction: String,
        #[arg(long)]
        json: bool,
    },
    /// Evaluation statistics.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Write the 90-case benchmark as JSON lines.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "movie")]
        schema: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Accuracy tables, Wilson intervals and Holm-adjusted McNemar tests.
    #[command(group(ArgGroup::new("source").required(true)))]
    Stats {
        /// Long-format outcome matrix.
        #[arg(long, group = "source")]
        matrix: Option<PathBuf>,
        /// Pairwise discordance counts (row_model,col_model,row_only,col_only).
        #[arg(long, group = "source", requires = "label")]
        discordance: Option<PathBuf>,
        /// Per-model counts (model,outcome,n,correct).
        #[arg(long, group = "source")]
        counts: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        /// Output directory.
        #[arg(long)]
        report: PathBuf,
    },
}

/// Service settings given on the command line; they override the
/// environment and the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key: value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<String>,
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub provider: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<String>,
    #[arg(long)]
    pub max_tokens: Option<String>,
    #[arg(long)]
    pub budget: Option<String>,
    /// off, record:PATH or replay:PATH
    #[arg(long)]
    pub transcript: Option<String>,
    #[arg(long)]
    pub data_dir: Option<String>,
    /// model, deterministic or off
    #[arg(long)]
    pub explain: Option<String>,
}

impl ConfigArgs {
    fn settings(&self) -> Settings {
        [
            ("listen", &self.listen),
            ("schema", &self.schema),
            ("graph", &self.graph),
            ("provider", &self.provider),
            ("model", &self.model),
            ("temperature", &self.temperature),
            ("max_tokens", &self.max_tokens),
            ("budget", &self.budget),
            ("transcript", &self.transcript),
            ("data_dir", &self.data_dir),
            ("explain", &self.explain),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
        .collect()
    }

    /// Resolves file, then environment, then flags.
    pub fn resolve(&self, env: impl Fn(&str) -> Option<String>) -> anyhow::Result<ServiceConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_config_text(&text)?
            }
            None => Settings::new(),
        };
        Ok(ServiceConfig::resolve(&[file, env_settings(env), self.settings()])?)
    }
}

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = e.exit_code();
            if code != 0 && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn read_input(input: &str) -> anyhow::Result<String> {
    if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    let path = std::path::Path::new(input);
    if path.is_file() {
        return Ok(std::fs::read_to_string(path)?);
    }
    Ok(input.to_string())
}

fn print_explanation(e: &Explanation) {
    for (i, s) in e.steps.iter().enumerate() {
        println!("{}. {s}", i + 1);
    }
    println!();
    println!("{}", e.summary);
    for f in &e.flags {
        match f.kind {
            Some(k) => println!("! [{}] {}", k.name(), f.message),
            None => println!("! {}", f.message),
        }
    }
}

fn print_table(columns: &[String], rows: &[Vec<String>]) {
    println!("{}", columns.join("\t"));
    for r in rows {
        println!("{}", r.join("\t"));
    }
}

fn print_turn(turn: &SessionTurn) {
    if let Some(q) = &turn.cleaned_query {
        println!("query (attempt {}):\n{q}", turn.attempt);
    }
    match &turn.parse_result {
        ParseResult::SyntaxError { message, line, column } => println!("syntax error at {line}:{column}: {message}"),
        ParseResult::Unsupported { feature, line, column } => println!("unsupported at {line}:{column}: {feature}"),
        _ => {}
    }
    for d in &turn.diagnostics {
        println!("diagnostic [{}] {}", d.kind.name(), d.message);
    }
    match &turn.execution {
        Some(Execution::Table { columns, rows, total_rows, truncated }) => {
            println!("\n{total_rows} row(s){}", if *truncated { ", truncated" } else { "" });
            let text: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string)).collect())
                .collect();
            print_table(columns, &text);
        }
        Some(Execution::Error { message }) => println!("execution error: {message}"),
        None => {}
    }
    if let Some(e) = &turn.explanation {
        println!();
        print_explanation(e);
    }
    for f in &turn.failures {
        eprintln!("failure in {:?}: {}", f.stage, f.message);
    }
}

fn dialogue_step(config: ServiceConfig, session: Option<String>, action: Action, json: bool) -> anyhow::Result<i32> {
    let state = AppState::new(config)?;
    let id = match session {
        Some(id) => id,
        None => {
            let id = state.create_session()?;
            eprintln!("session {id}");
            id
        }
    };
    let (line, failed) = state.step(&id, &action)?;
    if json {
        println!("{line}");
    } else {
        print_turn(&serde_json::from_str(&line)?);
    }
    Ok(if failed { 1 } else { 0 })
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    let env = |k: &str| std::env::var(k).ok();
    match command {
        Command::Bench {
            command: BenchCommand::Generate { seed, out, schema },
        } => {
            let schema = load_schema_ref(&schema)?;
            let cases = generate_benchmark(&schema, seed)?;
            export_benchmark(&cases, &out)?;
            println!("wrote {} cases to {}", cases.len(), out.display());
            Ok(0)
        }
        Command::Validate { schema, input, json } => {
            let schema = load_schema_ref(&schema)?;
            let ast = parse_query(&read_input(&input)?)?;
            let diags = validate(&ast, &schema)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&diags)?);
            } else {
                for d in &diags {
                    println!("{}: {} ({})", d.kind.name(), d.message, d.location);
                }
                if diags.is_empty() {
                    println!("ok");
                }
            }
            Ok(if diags.is_empty() { 0 } else { 1 })
        }
        Command::Run {
            schema,
            graph,
            query,
            json,
        } => {
            let schema_def = load_schema_ref(&schema)?;
            let graph = load_graph_ref(graph.as_deref().unwrap_or(&schema))?;
            let ast = parse_query(&read_input(&query)?)?;
            validate(&ast, &schema_def)?;
            let table = execute(&ast, &graph)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&table.to_records(&graph))?);
            } else {
                let rows: Vec<Vec<String>> = table
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|v| graph.render_text(v)).collect())
                    .collect();
                print_table(&table.columns, &rows);
            }
            Ok(0)
        }
        Command::Explain { schema, query, json } => {
            let schema = load_schema_ref(&schema)?;
            let ast = parse_query(&read_input(&query)?)?;
            let e = explain_deterministic(&ast, &schema);
            if json {
                println!("{}", serde_json::to_string_pretty(&e)?);
            } else {
                println!("{}\n", print_query(&ast));
                print_explanation(&e);
            }
            Ok(0)
        }
        Command::Ask {
            config,
            session,
            question,
            json,
        } => dialogue_step(config.resolve(env)?, session, Action::Ask(question), json),
        Command::Amend {
            config,
            session,
            instruction,
            json,
        } => dialogue_step(config.resolve(env)?, Some(session), Action::Amend(instruction), json),
        Command::Eval {
            command:
                EvalCommand::Stats {
                    matrix,
                    discordance,
                    counts,
                    label,
                    report,
                },
        } => {
            let text_file = if let Some(path) = matrix {
                let m = OutcomeMatrix::load(&path).with_context(|| format!("loading {}", path.display()))?;
                write_matrix_reports(&m, &report)?;
                "report.txt".to_string()
            } else if let Some(path) = discordance {
                let label = label.ok_or_else(|| anyhow!("--discordance needs --label"))?;
                let pairs = read_discordance(std::fs::File::open(&path)?)?;
                write_discordance_reports(&pairs, &label, &report)?;
                format!("mcnemar_{label}.txt")
            } else if let Some(path) = counts {
                let counts = read_counts(std::fs::File::open(&path)?)?;
                write_count_reports(&counts, &report)?;
                "accuracy.txt".to_string()
            } else {
                bail!("one of --matrix, --discordance or --counts is required");
            };
            print!("{}", std::fs::read_to_string(report.join(text_file))?);
            Ok(0)
        }
        Command::Serve { config } => {
            let config = config.resolve(env)?;
            service::serve(AppState::new(config)?)?;
            Ok(0)
        }
    }
}
