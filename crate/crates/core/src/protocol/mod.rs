//! Experiment protocols: phase sequences over maze variants, reward and
//! apple bookkeeping, session logs and batch runs.

mod batch;
mod phase;
mod plan;
mod runner;
mod session;

use thiserror::Error;

use crate::agents::ConfigError;
use crate::analysis::AnalysisError;
use crate::maze::{Cell, MazeError};

pub use batch::{batch_run, parse_manifest, resolve_maze, BatchResult, ManifestRow};
pub use phase::{AppleEvent, PhaseOutcome, PhaseState, StepReport};
pub use plan::{builtin_maze, Condition, ExperimentPlan, MazeDesign, PhaseSpec, RewardSchedule, BUILTIN_MAZES};
pub use runner::{
    default_session_id, greedy_path, replay_phase, replay_session, run_experiment1, run_experiment2, run_phase, run_session,
    train_episodes, EpisodeSummary, AGENT_ACTION_MS,
};
pub use session::{load_sessions, phase_file, PhaseLog, SessionLog, Subject};
pub(crate) use session::{append_meta, apple_line, phase_end_lines, write_header};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("maze {id}: {source}")]
    Maze { id: String, source: MazeError },
    #[error("maze {id}: blocked variant is invalid: {source}")]
    BadBlockedVariant { id: String, source: MazeError },
    #[error("maze {0} has no goal")]
    NoGoal(String),
    #[error("maze {0} has no B cells to seal in the blocked phase")]
    NoBlockedEdges(String),
    #[error("dense condition needs apples, maze {0} has none")]
    NoApples(String),
    #[error("apples in maze {0} do not lie on one shortest route from start to goal")]
    AppleTrail(String),
    #[error("experiment {experiment} takes {expected} maze(s), got {found}")]
    WrongMazeCount { experiment: u8, expected: usize, found: usize },
    #[error("condition {condition} does not apply to experiment {experiment}")]
    BadCondition { experiment: u8, condition: Condition },
    #[error("unknown experiment {0:?}; expected 1 or 2")]
    UnknownExperiment(String),
    #[error("unknown condition {0:?}; expected standard, dense or sparse")]
    UnknownCondition(String),
    #[error("phase budgets must be positive")]
    ZeroBudget,
    #[error("{phases} phases but {budgets} budgets")]
    BudgetCount { phases: usize, budgets: usize },
    #[error("no phase {0}")]
    NoSuchPhase(usize),
    #[error("agent could not move from {from} to {to}")]
    Stalled { from: Cell, to: Cell },
    #[error(transparent)]
    Agent(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("malformed session: {0}")]
    BadSession(String),
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("manifest has no sessions")]
    EmptyManifest,
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for ProtocolError {
    fn from(e: std::io::Error) -> Self {
        ProtocolError::Io(e.to_string())
    }
}
