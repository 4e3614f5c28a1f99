//! Session logs and their on-disk layout.
//!
//! A session directory holds:
//!
//! * `meta`, append-only `key=value` lines: identity, subject, plan
//!   selector, budgets and rewards first, then `outcome.<phase>=...`,
//!   `reward.<phase>=...` and `apple=<phase> <x> <y> <t_ms>` as they happen;
//! * `maze-<n>.txt`, the maze designs in plan order (1-based);
//! * `phase-<label>.jsonl`, one trajectory record per line.
//!
//! The same data serialized as one JSON document is the export format.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AppleEvent, Condition, ExperimentPlan, MazeDesign, PhaseOutcome, ProtocolError, RewardSchedule};
use crate::agents::AgentConfig;
use crate::analysis::{discretize, phase_metrics, CellTrajectory, PhaseInput, PhaseMetrics, TrajectoryLog};
use crate::maze::MazeSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Subject {
    Agent(AgentConfig),
    Human { tag: String },
}

impl Subject {
    /// `dfs`, `qlearn`, ... for agents and `human:<tag>` for people.
    pub fn label(&self) -> String {
        match self {
            Subject::Agent(cfg) => cfg.kind.as_str().to_string(),
            Subject::Human { tag } => format!("human:{tag}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub label: String,
    pub maze_id: String,
    /// `None` while the phase is still being played.
    pub outcome: Option<PhaseOutcome>,
    pub reward_total: f64,
    pub log: TrajectoryLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub subject: Subject,
    pub plan: ExperimentPlan,
    /// Wall-clock creation time for live sessions; absent for simulated runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix_ms: Option<u64>,
    pub phases: Vec<PhaseLog>,
    pub apple_events: Vec<AppleEvent>,
}

impl SessionLog {
    pub fn phase_maze(&self, index: usize) -> Result<MazeSpec, ProtocolError> {
        self.plan.phase_maze(index)
    }

    /// Discretized trajectory of a played phase.
    pub fn cell_trajectory(&self, index: usize) -> Result<CellTrajectory, ProtocolError> {
        let maze = self.phase_maze(index)?;
        let phase = self.phases.get(index).ok_or(ProtocolError::NoSuchPhase(index))?;
        Ok(discretize(&phase.log, &maze)?)
    }

    /// Report metrics for every recorded phase.
    pub fn phase_metrics(&self) -> Result<Vec<PhaseMetrics>, ProtocolError> {
        let subject = self.subject.label();
        let condition = self.plan.condition.as_str();
        self.phases
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let maze = self.phase_maze(i)?;
                let input = PhaseInput {
                    session_id: &self.session_id,
                    subject: &subject,
                    condition,
                    phase: &p.label,
                    maze: &maze,
                    log: &p.log,
                };
                Ok(phase_metrics(input)?)
            })
            .collect()
    }

    pub fn is_finished(&self) -> bool {
        self.phases.len() == self.plan.phases.len() && self.phases.iter().all(|p| p.outcome.is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session log serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ProtocolError> {
        let log: SessionLog = serde_json::from_str(text).map_err(|e| ProtocolError::BadSession(e.to_string()))?;
        log.plan.validate()?;
        Ok(log)
    }

    /// Writes the whole session under `root/<session_id>` and returns that
    /// directory. An existing directory is replaced.
    pub fn write_dir(&self, root: &Path) -> Result<PathBuf, ProtocolError> {
        let dir = root.join(&self.session_id);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        write_header(&dir, self)?;
        for phase in &self.phases {
            let mut out = BufWriter::new(File::create(dir.join(phase_file(&phase.label)))?);
            phase.log.write_jsonl(&mut out)?;
            out.flush()?;
            if let Some(outcome) = phase.outcome {
                append_meta(&dir, &phase_end_lines(&phase.label, outcome, phase.reward_total))?;
            }
        }
        let apples: Vec<String> = self.apple_events.iter().map(apple_line).collect();
        if !apples.is_empty() {
            append_meta(&dir, &apples)?;
        }
        Ok(dir)
    }

    pub fn read_dir(dir: &Path) -> Result<Self, ProtocolError> {
        let meta_text = fs::read_to_string(dir.join("meta"))?;
        let mut meta: BTreeMap<String, String> = BTreeMap::new();
        let mut apple_lines = Vec::new();
        for (i, line) in meta_text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ProtocolError::BadSession(format!("meta line {}: expected key=value", i + 1)))?;
            if k == "apple" {
                apple_lines.push(v.to_string());
            } else {
                meta.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| meta.get(k).cloned().ok_or_else(|| ProtocolError::BadSession(format!("meta lacks {k}")));
        let num = |k: &str| -> Result<f64, ProtocolError> {
            get(k)?.parse().map_err(|_| ProtocolError::BadSession(format!("meta {k} is not a number")))
        };

        let subject = match get("subject")?.as_str() {
            "agent" => {
                let pairs = meta.iter().filter_map(|(k, v)| k.strip_prefix("agent.").map(|k| (k, v.as_str())));
                Subject::Agent(AgentConfig::from_pairs(pairs)?)
            }
            "human" => Subject::Human { tag: get("subject.tag")? },
            other => return Err(ProtocolError::BadSession(format!("unknown subject {other:?}"))),
        };
        let experiment: u8 = get("experiment")?
            .parse()
            .map_err(|_| ProtocolError::BadSession("experiment is not a number".into()))?;
        let condition: Condition = get("condition")?.parse()?;
        let mut mazes = Vec::new();
        for n in 1.. {
            let Some(id) = meta.get(&format!("maze.{n}")) else { break };
            mazes.push(MazeDesign::new(id.clone(), fs::read_to_string(dir.join(format!("maze-{n}.txt")))?));
        }
        let mut plan = ExperimentPlan::build(experiment, condition, mazes)?;
        plan.reward = RewardSchedule { goal: num("reward.goal")?, apple: num("reward.apple")?, step_cost: num("reward.step_cost")? };
        for (i, spec) in plan.phases.iter().enumerate() {
            plan.phase_budgets[i] = num(&format!("budget.{}", spec.label))? as usize;
        }
        plan.validate()?;

        let mut phases = Vec::new();
        for (i, spec) in plan.phases.iter().enumerate() {
            let path = dir.join(phase_file(&spec.label));
            if !path.exists() {
                break;
            }
            let log = TrajectoryLog::read_jsonl(BufReader::new(File::open(path)?))?;
            let outcome = match meta.get(&format!("outcome.{}", spec.label)) {
                Some(o) => Some(PhaseOutcome::parse(o).ok_or_else(|| ProtocolError::BadSession(format!("bad outcome {o:?}")))?),
                None => None,
            };
            let reward_total = match meta.get(&format!("reward.{}", spec.label)) {
                Some(_) => num(&format!("reward.{}", spec.label))?,
                None => 0.0,
            };
            phases.push(PhaseLog { label: spec.label.clone(), maze_id: plan.phase_maze(i)?.id().to_string(), outcome, reward_total, log });
        }

        let apple_events = apple_lines
            .iter()
            .map(|l| parse_apple(l).ok_or_else(|| ProtocolError::BadSession(format!("bad apple line {l:?}"))))
            .collect::<Result<_, _>>()?;
        let created_unix_ms = match meta.get("created_unix_ms") {
            Some(_) => Some(num("created_unix_ms")? as u64),
            None => None,
        };
        Ok(SessionLog { session_id: get("session_id")?, subject, plan, created_unix_ms, phases, apple_events })
    }
}

/// Reads every session under `root`: session directories (holding `meta`)
/// and exported `*.json` documents, in path order. `root` itself may be a
/// session directory. Each entry carries its own result so one bad file does
/// not hide the rest.
pub fn load_sessions(root: &Path) -> Result<Vec<(PathBuf, Result<SessionLog, ProtocolError>)>, ProtocolError> {
    if root.join("meta").is_file() {
        return Ok(vec![(root.to_path_buf(), SessionLog::read_dir(root))]);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(root)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .filter_map(|p| {
            if p.join("meta").is_file() {
                let log = SessionLog::read_dir(&p);
                Some((p, log))
            } else if p.extension().is_some_and(|e| e == "json") {
                let log = fs::read_to_string(&p).map_err(ProtocolError::from).and_then(|t| SessionLog::from_json(&t));
                Some((p, log))
            } else {
                None
            }
        })
        .collect())
}

pub fn phase_file(label: &str) -> String {
    format!("phase-{label}.jsonl")
}

/// Creates `dir/meta` and the maze files for a new session.
pub(crate) fn write_header(dir: &Path, log: &SessionLog) -> Result<(), ProtocolError> {
    let mut lines = vec![format!("session_id={}", log.session_id)];
    match &log.subject {
        Subject::Agent(cfg) => {
            lines.push("subject=agent".into());
            lines.extend(cfg.to_kv().lines().map(|l| format!("agent.{l}")));
        }
        Subject::Human { tag } => {
            lines.push("subject=human".into());
            lines.push(format!("subject.tag={tag}"));
        }
    }
    if let Some(t) = log.created_unix_ms {
        lines.push(format!("created_unix_ms={t}"));
    }
    let plan = &log.plan;
    lines.push(format!("experiment={}", plan.experiment));
    lines.push(format!("condition={}", plan.condition));
    for (n, m) in plan.mazes.iter().enumerate() {
        lines.push(format!("maze.{}={}", n + 1, m.id));
        fs::write(dir.join(format!("maze-{}.txt", n + 1)), &m.text)?;
    }
    for (spec, budget) in plan.phases.iter().zip(&plan.phase_budgets) {
        lines.push(format!("budget.{}={budget}", spec.label));
    }
    lines.push(format!("reward.goal={}", plan.reward.goal));
    lines.push(format!("reward.apple={}", plan.reward.apple));
    lines.push(format!("reward.step_cost={}", plan.reward.step_cost));
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(dir.join("meta"), text)?;
    Ok(())
}

pub(crate) fn append_meta(dir: &Path, lines: &[String]) -> Result<(), ProtocolError> {
    let mut f = OpenOptions::new().append(true).open(dir.join("meta"))?;
    for l in lines {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    Ok(())
}

pub(crate) fn phase_end_lines(label: &str, outcome: PhaseOutcome, reward_total: f64) -> Vec<String> {
    vec![format!("outcome.{label}={}", outcome.as_str()), format!("reward.{label}={reward_total}")]
}

pub(crate) fn apple_line(e: &AppleEvent) -> String {
    format!("apple={} {} {} {}", e.phase, e.cell_x, e.cell_y, e.t_ms)
}

fn parse_apple(v: &str) -> Option<AppleEvent> {
    let mut it = v.split_whitespace();
    let ev = AppleEvent {
        phase: it.next()?.to_string(),
        cell_x: it.next()?.parse().ok()?,
        cell_y: it.next()?.parse().ok()?,
        t_ms: it.next()?.parse().ok()?,
    };
    it.next().is_none().then_some(ev)
}
