use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Cell, Heading, MazeSpec};

/// Sub-steps a forward/back action needs to cross one cell.
pub const DEFAULT_SUB_STEPS: u8 = 5;

/// The four primitive controls shared by human players and agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward,
    Back,
    StrafeLeft,
    TurnRight,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Forward, Action::Back, Action::StrafeLeft, Action::TurnRight];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::Back => "back",
            Action::StrafeLeft => "strafe_left",
            Action::TurnRight => "turn_right",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action {0:?}; expected one of forward, back, strafe_left, turn_right")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAction(s.to_string()))
    }
}

/// Pose within the maze. `sub_offset` is the progress through the current
/// cell along the heading axis, `0..sub_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AvatarState {
    pub cell: Cell,
    pub sub_offset: u8,
    pub heading: Heading,
}

impl AvatarState {
    pub fn spawn(maze: &MazeSpec) -> Self {
        AvatarState { cell: maze.start_cell(), sub_offset: 0, heading: maze.start_heading() }
    }

    pub fn is_valid_for(&self, maze: &MazeSpec, kinematics: Kinematics) -> bool {
        maze.is_floor(self.cell) && self.sub_offset < kinematics.sub_steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kinematics {
    pub sub_steps: u8,
}

impl Default for Kinematics {
    fn default() -> Self {
        Kinematics { sub_steps: DEFAULT_SUB_STEPS }
    }
}

/// Applies one action with the default sub-step count.
pub fn step(maze: &MazeSpec, state: AvatarState, action: Action) -> AvatarState {
    step_with(Kinematics::default(), maze, state, action)
}

/// Applies one action. Moves into walls or sealed edges leave the state
/// unchanged.
///
/// The lateral position inside a cell is not tracked, so a strafe moves
/// straight into the cell on the avatar's left, keeping heading and
/// `sub_offset`.
pub fn step_with(kin: Kinematics, maze: &MazeSpec, state: AvatarState, action: Action) -> AvatarState {
    let last = kin.sub_steps - 1;
    match action {
        Action::Forward if state.sub_offset < last => AvatarState { sub_offset: state.sub_offset + 1, ..state },
        Action::Forward => match maze.passable_neighbor(state.cell, state.heading) {
            Some(cell) => AvatarState { cell, sub_offset: 0, ..state },
            None => state,
        },
        Action::Back if state.sub_offset > 0 => AvatarState { sub_offset: state.sub_offset - 1, ..state },
        Action::Back => match maze.passable_neighbor(state.cell, state.heading.opposite()) {
            Some(cell) => AvatarState { cell, sub_offset: last, ..state },
            None => state,
        },
        Action::StrafeLeft => match maze.passable_neighbor(state.cell, state.heading.left()) {
            Some(cell) => AvatarState { cell, ..state },
            None => state,
        },
        Action::TurnRight => AvatarState { heading: state.heading.right(), ..state },
    }
}
