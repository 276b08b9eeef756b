use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use buildzone_cli::commands::bench::{bench, BenchArgs};
use buildzone_cli::commands::convert::convert;
use buildzone_cli::commands::eval::evaluate;
use buildzone_cli::commands::run::{run, AgentKind};
use buildzone_cli::server::{router, serve};
use buildzone_cli::session::{Mode, ServerOptions};
use buildzone_core::behavior::{read_jsonl, IdOffsetMap};
use buildzone_core::tasks::{flat_tall_suite, load_tasks, save_tasks, TaskRecord};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0:#}")]
    Input(anyhow::Error),
    #[error("{0:#}")]
    Internal(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

type CliResult = Result<(), CliError>;

fn input(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Input(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Parser)]
#[command(name = "buildzone", version, about = "Voxel build-zone environment tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure stepping throughput with a seeded random policy.
    Bench {
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, value_enum, default_value = "off")]
        render: OnOff,
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an agent over a task file and report per-task and per-skill scores.
    Run {
        /// Task file (one task or a JSON array).
        #[arg(long, required_unless_present = "generate")]
        task: Option<PathBuf>,
        /// Instead of a task file, generate this many flat/tall tasks.
        #[arg(long, conflicts_with = "task")]
        generate: Option<usize>,
        #[arg(long, value_enum, default_value = "scripted")]
        agent: AgentKind,
        #[arg(long, default_value_t = 2000)]
        max_steps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score demonstration trajectories against their tasks.
    Eval {
        /// JSON-lines demonstration steps.
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert raw game-log records to JSON-lines demonstrations.
    Convert {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Raw id and offset map (JSON); defaults to the built-in map.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Also write one task per record, targeting its final grid.
        #[arg(long)]
        tasks_out: Option<PathBuf>,
    },
    /// Serve sessions over a websocket at /ws.
    Serve {
        #[arg(long, env = "BUILDZONE_PORT", default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, value_enum, default_value = "agent_eval")]
        mode: Mode,
        /// Tasks addressable by `task_index` in config messages.
        #[arg(long)]
        tasks: Option<PathBuf>,
        /// Directory of static assets served at /.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        max_sessions: usize,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    match out {
        Some(p) => write(p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_map(path: Option<&Path>) -> Result<IdOffsetMap, CliError> {
    match path {
        Some(p) => serde_json::from_str(&read(p)?)
            .with_context(|| format!("parsing map {}", p.display()))
            .map_err(input),
        None => Ok(IdOffsetMap::default()),
    }
}

fn tasks_from(path: &Path) -> Result<Vec<TaskRecord>, CliError> {
    load_tasks(path)
        .with_context(|| format!("loading tasks from {}", path.display()))
        .map_err(input)
}

fn execute(command: Command) -> CliResult {
    match command {
        Command::Bench {
            steps,
            render,
            episodes,
            seed,
            out,
        } => {
            let report = bench(BenchArgs {
                steps,
                render: matches!(render, OnOff::On),
                episodes,
                seed,
            });
            eprintln!("{}", report.summary());
            emit(&report, out.as_deref())
        }
        Command::Run {
            task,
            generate,
            agent,
            max_steps,
            seed,
            out,
        } => {
            let tasks = match (task, generate) {
                (Some(p), _) => tasks_from(&p)?,
                (None, Some(n)) => flat_tall_suite(n, seed),
                (None, None) => return Err(input(anyhow!("either --task or --generate is required"))),
            };
            let report = run(&tasks, agent, max_steps, seed).map_err(input)?;
            eprintln!(
                "{} tasks, mean f1 {:.4}, complete {:.1}%",
                report.tasks.len(),
                report.mean_f1,
                100.0 * report.complete_rate
            );
            emit(&report, out.as_deref())
        }
        Command::Eval { log, tasks, out } => {
            let demos = read_jsonl(&read(&log)?)
                .with_context(|| format!("parsing {}", log.display()))
                .map_err(input)?;
            let tasks = tasks_from(&tasks)?;
            let report = evaluate(&demos, &tasks).map_err(|e| input(anyhow!(e)))?;
            emit(&report, out.as_deref())
        }
        Command::Convert {
            raw,
            out,
            map,
            tasks_out,
        } => {
            let map = load_map(map.as_deref())?;
            let c = convert(&read(&raw)?, &map);
            for e in &c.errors {
                log::warn!("{e}");
            }
            write(&out, &c.jsonl)?;
            if let Some(p) = tasks_out {
                save_tasks(&c.tasks, &p)
                    .with_context(|| format!("writing {}", p.display()))
                    .map_err(input)?;
            }
            println!("{}", serde_json::to_string(&c.summary).map_err(internal)?);
            if c.summary.failed > 0 {
                return Err(input(anyhow!("{} record(s) failed to convert", c.summary.failed)));
            }
            Ok(())
        }
        Command::Serve {
            port,
            host,
            mode,
            tasks,
            static_dir,
            map,
            max_sessions,
        } => {
            let options = ServerOptions {
                mode,
                tasks: match tasks {
                    Some(p) => tasks_from(&p)?,
                    None => Vec::new(),
                },
                map: load_map(map.as_deref())?,
                max_sessions,
            };
            if let Some(dir) = &static_dir {
                if !dir.is_dir() {
                    return Err(input(anyhow!("static directory {} does not exist", dir.display())));
                }
            }
            let rt = tokio::runtime::Runtime::new().map_err(internal)?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))
                    .map_err(input)?;
                eprintln!("serving on ws://{}/ws", listener.local_addr().map_err(internal)?);
                serve(listener, router(options, static_dir)).await.map_err(internal)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
