//! Expands "go to the neighboring cell" into primitive actions.

use crate::maze::{Action, AvatarState, Cell, Kinematics};

/// Right turns until facing `target`, then forward until the boundary is
/// crossed. `None` if `target` is not orthogonally adjacent.
pub fn plan_move(state: AvatarState, target: Cell, kin: Kinematics) -> Option<Vec<Action>> {
    let want = state.cell.direction_to(target)?;
    let mut heading = state.heading;
    let mut actions = Vec::new();
    while heading != want {
        heading = heading.right();
        actions.push(Action::TurnRight);
    }
    let forwards = (kin.sub_steps - state.sub_offset) as usize;
    actions.extend(std::iter::repeat_n(Action::Forward, forwards));
    Some(actions)
}
