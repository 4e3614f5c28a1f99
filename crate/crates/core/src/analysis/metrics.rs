use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{AnalysisError, CellTrajectory};
use crate::maze::{Cell, MazeSpec};

/// Distinct visited cells over cells reachable from the start.
pub fn coverage(traj: &CellTrajectory, maze: &MazeSpec) -> f64 {
    let reachable = maze.reachable_cells();
    let visited = traj.cells().iter().filter(|c| reachable.contains(c)).collect::<BTreeSet<_>>();
    visited.len() as f64 / reachable.len() as f64
}

/// Reachable cells whose passable degree is not two: dead ends, junctions
/// and isolated cells.
pub fn decision_points(maze: &MazeSpec) -> BTreeSet<Cell> {
    maze.reachable_cells().into_iter().filter(|&c| maze.degree(c) != 2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalOutcome {
    /// Cell transitions before first entering the goal.
    Reached(usize),
    /// Goal never entered.
    Dnf,
}

impl GoalOutcome {
    pub fn steps(self) -> Option<usize> {
        match self {
            GoalOutcome::Reached(n) => Some(n),
            GoalOutcome::Dnf => None,
        }
    }
}

pub fn steps_to_goal(traj: &CellTrajectory, maze: &MazeSpec) -> Result<GoalOutcome, AnalysisError> {
    let goal = maze.goal().ok_or(AnalysisError::NoGoal)?;
    Ok(traj.cells().iter().position(|&c| c == goal).map_or(GoalOutcome::Dnf, GoalOutcome::Reached))
}

/// Share of distinct visited cells that were entered more than once.
pub fn re_exploration(traj: &CellTrajectory) -> f64 {
    let mut entries: HashMap<Cell, usize> = HashMap::new();
    for &c in traj.cells() {
        *entries.entry(c).or_default() += 1;
    }
    if entries.is_empty() {
        return 0.0;
    }
    entries.values().filter(|&&n| n > 1).count() as f64 / entries.len() as f64
}

/// Cell boundaries crossed: trajectory length minus one.
pub fn cells_crossed(traj: &CellTrajectory) -> usize {
    traj.len().saturating_sub(1)
}
