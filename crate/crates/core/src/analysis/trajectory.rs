use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::maze::{Action, AvatarState, Cell, Heading, MazeSpec};

/// What produced a trajectory record. `Start` marks the spawn pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogAction {
    Start,
    Forward,
    Back,
    StrafeLeft,
    TurnRight,
}

impl From<Action> for LogAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Forward => LogAction::Forward,
            Action::Back => LogAction::Back,
            Action::StrafeLeft => LogAction::StrafeLeft,
            Action::TurnRight => LogAction::TurnRight,
        }
    }
}

impl LogAction {
    pub fn action(self) -> Option<Action> {
        match self {
            LogAction::Start => None,
            LogAction::Forward => Some(Action::Forward),
            LogAction::Back => Some(Action::Back),
            LogAction::StrafeLeft => Some(Action::StrafeLeft),
            LogAction::TurnRight => Some(Action::TurnRight),
        }
    }
}

/// One line of a trajectory log: the pose after `action`, stamped with
/// milliseconds since session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t_ms: u64,
    pub action: LogAction,
    pub cell_x: i32,
    pub cell_y: i32,
    pub heading: Heading,
    pub sub_offset: u8,
}

impl TrajectoryRecord {
    pub fn new(t_ms: u64, action: LogAction, pose: AvatarState) -> Self {
        TrajectoryRecord {
            t_ms,
            action,
            cell_x: pose.cell.x,
            cell_y: pose.cell.y,
            heading: pose.heading,
            sub_offset: pose.sub_offset,
        }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.cell_x, self.cell_y)
    }

    pub fn pose(&self) -> AvatarState {
        AvatarState { cell: self.cell(), sub_offset: self.sub_offset, heading: self.heading }
    }
}

/// Raw pose records for one phase. Shared by agents and human players.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub records: Vec<TrajectoryRecord>,
}

impl TrajectoryLog {
    pub fn push(&mut self, record: TrajectoryRecord) {
        self.records.push(record);
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Primitive actions in order, skipping the spawn marker.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.records.iter().filter_map(|r| r.action.action())
    }

    /// Milliseconds between the first and last record.
    pub fn duration_ms(&self) -> u64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t_ms.saturating_sub(a.t_ms),
            _ => 0,
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, AnalysisError> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| AnalysisError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let r = serde_json::from_str(&line).map_err(|e| AnalysisError::BadRecord { line: i + 1, reason: e.to_string() })?;
            records.push(r);
        }
        Ok(TrajectoryLog { records })
    }
}

/// Deduplicated sequence of visited cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellTrajectory {
    cells: Vec<Cell>,
    maze_id: String,
}

impl CellTrajectory {
    /// Validates that every cell is floor, no cell repeats back to back, and
    /// consecutive cells share a passable edge.
    pub fn new(cells: Vec<Cell>, maze: &MazeSpec) -> Result<Self, AnalysisError> {
        for (i, &c) in cells.iter().enumerate() {
            if !maze.is_floor(c) {
                return Err(AnalysisError::OffFloor { index: i, cell: c });
            }
        }
        for (i, w) in cells.windows(2).enumerate() {
            if !maze.is_passable(w[0], w[1]) {
                return Err(AnalysisError::NotAdjacent { index: i + 1, from: w[0], to: w[1] });
            }
        }
        Ok(CellTrajectory { cells, maze_id: maze.id().to_string() })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn maze_id(&self) -> &str {
        &self.maze_id
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl fmt::Display for CellTrajectory {
    /// Canonical text form, e.g. `(1,1) (2,1) (1,1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Maps each pose to its cell and keeps a cell only when it differs from the
/// previous one. Revisits stay in order.
pub fn discretize(log: &TrajectoryLog, maze: &MazeSpec) -> Result<CellTrajectory, AnalysisError> {
    let mut cells: Vec<Cell> = Vec::new();
    for (index, r) in log.records.iter().enumerate() {
        let cell = r.cell();
        if !maze.is_floor(cell) {
            return Err(AnalysisError::OffFloor { index, cell });
        }
        if cells.last() != Some(&cell) {
            cells.push(cell);
        }
    }
    CellTrajectory::new(cells, maze)
}
