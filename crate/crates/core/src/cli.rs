//! Command-line front end. [`run`] takes the argument list and output
//! streams and returns the process exit code, so it can be driven in tests.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::agents::{AgentConfig, AgentKind};
use crate::analysis::{cohort_summary, write_cohort_csv, write_session_csv, CohortRow, PhaseMetrics};
use crate::maze::{generate_maze, MazeSpec, MazeStyle};
use crate::protocol::{
    batch_run, default_session_id, load_sessions, resolve_maze, run_session, Condition, ExperimentPlan, SessionLog,
};
use crate::service::{serve, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "explab", version, about = "Maze exploration lab: agents, experiments, live sessions and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one agent through an experiment and write its session log.
    RunAgent(RunAgentArgs),
    /// Run every session listed in a manifest, in parallel.
    Batch(BatchArgs),
    /// Serve live sessions over HTTP.
    Serve(ServeArgs),
    /// Compute per-phase and cohort CSV reports from session logs.
    Analyze(AnalyzeArgs),
    /// Check ASCII maze files.
    ValidateMaze(ValidateArgs),
    /// Generate a random maze.
    GenMaze(GenMazeArgs),
}

#[derive(Debug, Args)]
pub struct DataDir {
    /// Root directory for session logs.
    #[arg(long, env = "EXPLAB_DATA_DIR", default_value = "explab-data")]
    pub data_dir: PathBuf,
}

fn parse_kind(s: &str) -> Result<AgentKind, String> {
    s.parse().map_err(|e: crate::agents::ConfigError| e.to_string())
}

#[derive(Debug, Args)]
pub struct RunAgentArgs {
    /// `dfs`, `random`, `qlearn` or `countbonus`
    #[arg(long, value_parser = parse_kind)]
    pub kind: AgentKind,
    #[arg(long, default_value_t = 1)]
    pub experiment: u8,
    /// `dense` or `sparse` for experiment 2.
    #[arg(long)]
    pub condition: Option<String>,
    /// Builtin maze id or ASCII file; give two for experiment 2.
    #[arg(long)]
    pub maze: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-phase cap on cell transitions (default 10x reachable cells).
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub optimistic_init: Option<f64>,
    /// Directory the session directory is written under (defaults to the data dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataDir,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub data: DataDir,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "EXPLAB_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[command(flatten)]
    pub data: DataDir,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of session directories or exported JSON logs.
    pub logs: PathBuf,
    /// Directory for `sessions.csv` and `cohort.csv`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub sessions_csv: Option<PathBuf>,
    #[arg(long)]
    pub cohort_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenMazeArgs {
    /// Width in characters, walls included (odd, at least 5).
    #[arg(long, default_value_t = 9)]
    pub width: usize,
    /// Height in characters, walls included (odd, at least 5).
    #[arg(long, default_value_t = 9)]
    pub height: usize,
    /// `perfect` (a tree) or `braided` (dead ends opened into loops).
    #[arg(long, default_value = "perfect")]
    pub style: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString>,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}\n{}\n", usage_for(&args))
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the whole program.
fn usage_for(args: &[std::ffi::OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = args.iter().skip(1).filter_map(|a| a.to_str()).find(|a| cmd.find_subcommand(a).is_some());
    match name.and_then(|n| cmd.find_subcommand_mut(n)) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    match command {
        Command::RunAgent(a) => run_agent(a, out),
        Command::Batch(a) => batch(a, out, err),
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(ServiceConfig { data_dir: a.data.data_dir, listen: a.listen })).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Analyze(a) => analyze(a, out, err),
        Command::ValidateMaze(a) => Ok(validate(a, out, err)),
        Command::GenMaze(a) => gen_maze(a, out),
    }
}

fn run_agent(a: RunAgentArgs, out: &mut dyn Write) -> Result<i32, String> {
    let mut cfg = AgentConfig::new(a.kind, a.seed);
    cfg.epsilon = a.epsilon.unwrap_or(cfg.epsilon);
    cfg.alpha = a.alpha.unwrap_or(cfg.alpha);
    cfg.gamma = a.gamma.unwrap_or(cfg.gamma);
    cfg.beta = a.beta.unwrap_or(cfg.beta);
    cfg.optimistic_init = a.optimistic_init.unwrap_or(cfg.optimistic_init);
    cfg.validate().map_err(|e| e.to_string())?;

    let condition = match (a.experiment, a.condition.as_deref()) {
        (_, Some(c)) => c.parse::<Condition>().map_err(|e| e.to_string())?,
        (2, None) => return Err("experiment 2 needs --condition dense or --condition sparse".into()),
        (_, None) => Condition::Standard,
    };
    let maze_refs = if a.maze.is_empty() {
        match a.experiment {
            2 => vec!["exp2a".to_string(), "exp2b".to_string()],
            _ => vec!["exp1".to_string()],
        }
    } else {
        a.maze
    };
    let mazes = maze_refs.iter().map(|m| resolve_maze(m, Path::new("."))).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let mut plan = ExperimentPlan::build(a.experiment, condition, mazes).map_err(|e| e.to_string())?;
    if let Some(b) = a.budget {
        plan = plan.with_budget(b).map_err(|e| e.to_string())?;
    }

    let id = default_session_id(&cfg, &plan);
    let log = run_session(&cfg, &plan, &id).map_err(|e| e.to_string())?;
    let root = a.out.unwrap_or(a.data.data_dir);
    let dir = log.write_dir(&root).map_err(|e| e.to_string())?;
    let metrics = log.phase_metrics().map_err(|e| e.to_string())?;
    for (m, p) in metrics.iter().zip(&log.phases) {
        writeln!(out, "{}", metric_line(m, p.outcome.map_or("incomplete", |o| o.as_str()))).map_err(|e| e.to_string())?;
    }
    writeln!(out, "wrote {}", dir.display()).map_err(|e| e.to_string())?;
    Ok(0)
}

/// One human-readable summary line per phase.
pub fn metric_line(m: &PhaseMetrics, outcome: &str) -> String {
    let r = &m.row;
    let steps = match (r.steps_to_goal, r.dnf) {
        (Some(s), _) => s.to_string(),
        (None, Some(true)) => "dnf".to_string(),
        _ => "-".to_string(),
    };
    format!(
        "phase {}: outcome={} coverage={:.3} steps_to_goal={} cells_crossed={} consistency={:.4} decisions={} re_exploration={:.3}",
        r.phase, outcome, r.coverage, steps, r.cells_crossed, r.consistency_fraction, r.decision_count, r.re_exploration
    )
}

fn batch(a: BatchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let manifest = fs::read_to_string(&a.manifest).map_err(|e| format!("{}: {e}", a.manifest.display()))?;
    let base = a.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let root = a.out.unwrap_or(a.data.data_dir);
    let results = match a.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| e.to_string())?;
            pool.install(|| batch_run(&manifest, &base, &root))
        }
        None => batch_run(&manifest, &base, &root),
    }
    .map_err(|e| e.to_string())?;
    let mut failures = 0;
    for r in &results {
        match &r.result {
            Ok(path) => writeln!(out, "line {}: ok {}", r.line, path.display()),
            Err(e) => {
                failures += 1;
                writeln!(err, "line {}: error {e}", r.line)
            }
        }
        .map_err(|e| e.to_string())?;
    }
    writeln!(out, "{} session(s) written, {failures} failed", results.len() - failures).map_err(|e| e.to_string())?;
    Ok(if failures == 0 { 0 } else { 1 })
}

/// Loads logs and builds both reports. Unreadable logs become `errors`
/// rows in the cohort report.
pub fn analyze_dir(logs: &Path) -> Result<(Vec<PhaseMetrics>, Vec<CohortRow>, Vec<String>), String> {
    let loaded = load_sessions(logs).map_err(|e| format!("{}: {e}", logs.display()))?;
    if loaded.is_empty() {
        return Err(format!("{}: no session logs found", logs.display()));
    }
    let mut metrics = Vec::new();
    let mut errors = Vec::new();
    let mut problems = Vec::new();
    for (path, log) in loaded {
        match log.and_then(|l: SessionLog| l.phase_metrics()) {
            Ok(m) => metrics.extend(m),
            Err(e) => {
                let name = path.strip_prefix(logs).unwrap_or(&path).display().to_string();
                problems.push(format!("{name}: {e}"));
                errors.push(CohortRow::load_error(&name, &e.to_string()));
            }
        }
    }
    let mut cohort = cohort_summary(&metrics);
    cohort.extend(errors);
    Ok((metrics, cohort, problems))
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let (metrics, cohort, problems) = analyze_dir(&a.logs)?;
    for p in &problems {
        writeln!(err, "skipping {p}").map_err(|e| e.to_string())?;
    }
    let sessions_path = a.sessions_csv.unwrap_or_else(|| a.out.join("sessions.csv"));
    let cohort_path = a.cohort_csv.unwrap_or_else(|| a.out.join("cohort.csv"));
    for p in [&sessions_path, &cohort_path] {
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| e.to_string())?;
        }
    }
    let rows: Vec<_> = metrics.into_iter().map(|m| m.row).collect();
    let f = fs::File::create(&sessions_path).map_err(|e| format!("{}: {e}", sessions_path.display()))?;
    write_session_csv(&rows, f).map_err(|e| e.to_string())?;
    let f = fs::File::create(&cohort_path).map_err(|e| format!("{}: {e}", cohort_path.display()))?;
    write_cohort_csv(&cohort, f).map_err(|e| e.to_string())?;
    writeln!(out, "{} phase row(s) -> {}", rows.len(), sessions_path.display()).map_err(|e| e.to_string())?;
    writeln!(out, "{} cohort row(s) -> {}", cohort.len(), cohort_path.display()).map_err(|e| e.to_string())?;
    Ok(0)
}

fn validate(a: ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut code = 0;
    for path in &a.files {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("maze");
        let parsed = fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| MazeSpec::parse(id, &t).map_err(|e| e.to_string()));
        let _ = match parsed {
            Ok(m) => writeln!(
                out,
                "{}: ok {}x{} floor={} reachable={} decision_points={} goal={} apples={} blocked_edges={}",
                path.display(),
                m.width(),
                m.height(),
                m.floor().len(),
                m.reachable_cells().len(),
                crate::analysis::decision_points(&m).len(),
                if m.goal().is_some() { "yes" } else { "no" },
                m.apples().len(),
                m.blocked_edges().len()
            ),
            Err(e) => {
                code = 1;
                writeln!(err, "{}: invalid: {e}", path.display())
            }
        };
    }
    code
}

fn gen_maze(a: GenMazeArgs, out: &mut dyn Write) -> Result<i32, String> {
    let style: MazeStyle = a.style.parse().map_err(|e: crate::maze::GenerateError| e.to_string())?;
    let maze = generate_maze(a.width, a.height, style, a.seed).map_err(|e| e.to_string())?;
    let mut text = maze.render();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match a.out {
        Some(p) => fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(0)
}
