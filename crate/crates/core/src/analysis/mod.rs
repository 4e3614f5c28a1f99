//! Trajectory metrics and cohort statistics.
//!
//! Every metric works on a [`CellTrajectory`], the de-duplicated cell
//! sequence obtained from a raw [`TrajectoryLog`] with [`discretize`].
//! Agent and human logs go through exactly the same path.

mod cluster;
mod consistency;
mod metrics;
mod report;
mod stats;
mod trajectory;

use thiserror::Error;

use crate::maze::Cell;

pub use cluster::{cluster_explorers, kmeans_1d, level_name, Clustering, DEFAULT_CLUSTER_SEED};
pub use consistency::{dfs_consistency, pooled_fraction, ConsistencyResult, ConsistencyRule, DecisionRecord};
pub use metrics::{cells_crossed, coverage, decision_points, re_exploration, steps_to_goal, GoalOutcome};
pub use stats::{
    mean, median, permutation_test, permutation_test_detailed, welch_t, PermutationMethod, PermutationOutcome, WelchT,
    EXACT_LIMIT,
};
pub use report::{
    cohort_summary, phase_metrics, write_cohort_csv, write_session_csv, CohortRow, PhaseInput, PhaseMetrics, SessionRow,
    COHORT_COLUMNS, SESSION_COLUMNS,
};
pub use trajectory::{discretize, CellTrajectory, LogAction, TrajectoryLog, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("record {index}: pose at {cell} is not on the maze floor")]
    OffFloor { index: usize, cell: Cell },
    #[error("step {index}: {from} and {to} are not connected")]
    NotAdjacent { index: usize, from: Cell, to: Cell },
    #[error("maze has no goal")]
    NoGoal,
    #[error("{points} values cannot form {k} clusters")]
    TooFewPoints { points: usize, k: usize },
    #[error("cluster count must be positive")]
    BadK,
    #[error("non-finite input value")]
    NonFinite,
    #[error("permutation test needs two non-empty groups")]
    EmptyGroup,
    #[error("line {line}: {reason}")]
    BadRecord { line: usize, reason: String },
    #[error("{0}")]
    Io(String),
}
