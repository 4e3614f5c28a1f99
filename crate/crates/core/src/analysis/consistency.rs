//! Depth-first-search consistency of a cell trajectory.
//!
//! Only departures from decision points are scored. A departure is
//! consistent when it enters a cell not seen before, or, when every
//! neighbor has been seen, when it steps along a shortest path through
//! visited cells toward the most recently first-visited cell that still has
//! an unvisited neighbor. With no such cell left, any move is consistent.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{decision_points, AnalysisError, CellTrajectory};
use crate::maze::{Cell, MazeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsistencyRule {
    /// Rule 1: moved to an unvisited cell.
    Unvisited,
    /// Rule 2: backtracked toward the most recent open branch.
    Backtrack,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub index: usize,
    pub cell: Cell,
    pub chosen_next: Cell,
    pub consistent: bool,
    /// Rule that made the move consistent, `None` when it is not.
    pub rule_applied: Option<ConsistencyRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub decisions: Vec<DecisionRecord>,
    /// Consistent decisions over all decisions; 1.0 when there are none.
    pub fraction: f64,
}

impl ConsistencyResult {
    pub fn consistent_count(&self) -> usize {
        self.decisions.iter().filter(|d| d.consistent).count()
    }
}

/// Scores every decision-point departure in `traj` against `maze`.
/// Trajectories shorter than two cells have no departures and score 1.0.
pub fn dfs_consistency(traj: &CellTrajectory, maze: &MazeSpec) -> Result<ConsistencyResult, AnalysisError> {
    // re-validate against this maze in case the trajectory came from another
    let cells = CellTrajectory::new(traj.cells().to_vec(), maze)?;
    let cells = cells.cells();
    let points = decision_points(maze);

    let mut visited: HashSet<Cell> = HashSet::new();
    let mut branch_stack: Vec<Cell> = Vec::new();
    let mut decisions = Vec::new();
    let has_unvisited = |visited: &HashSet<Cell>, c: Cell| maze.passable_neighbors(c).any(|n| !visited.contains(&n));

    for (i, pair) in cells.windows(2).enumerate() {
        let (here, next) = (pair[0], pair[1]);
        if visited.insert(here) {
            branch_stack.push(here);
        }
        if !points.contains(&here) {
            continue;
        }

        let rule_applied = if !visited.contains(&next) {
            Some(ConsistencyRule::Unvisited)
        } else if has_unvisited(&visited, here) {
            None
        } else {
            while branch_stack.last().is_some_and(|&b| !has_unvisited(&visited, b)) {
                branch_stack.pop();
            }
            match branch_stack.last() {
                None => Some(ConsistencyRule::Backtrack),
                Some(&branch) => {
                    let dist = visited_distances(maze, &visited, branch);
                    let on_path = matches!((dist.get(&here), dist.get(&next)), (Some(&dh), Some(&dn)) if dn + 1 == dh);
                    on_path.then_some(ConsistencyRule::Backtrack)
                }
            }
        };
        decisions.push(DecisionRecord {
            index: i,
            cell: here,
            chosen_next: next,
            consistent: rule_applied.is_some(),
            rule_applied,
        });
    }

    let fraction = if decisions.is_empty() {
        1.0
    } else {
        decisions.iter().filter(|d| d.consistent).count() as f64 / decisions.len() as f64
    };
    Ok(ConsistencyResult { decisions, fraction })
}

fn visited_distances(maze: &MazeSpec, visited: &HashSet<Cell>, origin: Cell) -> HashMap<Cell, usize> {
    let mut dist = HashMap::from([(origin, 0)]);
    let mut queue = VecDeque::from([origin]);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for n in maze.passable_neighbors(c) {
            if visited.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Pools decisions across trajectories: total consistent over total scored.
pub fn pooled_fraction<'a>(results: impl IntoIterator<Item = &'a ConsistencyResult>) -> Option<f64> {
    let (ok, total) = results
        .into_iter()
        .fold((0usize, 0usize), |(ok, total), r| (ok + r.consistent_count(), total + r.decisions.len()));
    (total > 0).then(|| ok as f64 / total as f64)
}
