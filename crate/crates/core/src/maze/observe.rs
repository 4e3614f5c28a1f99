use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AvatarState, Cell, Heading, MazeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Passage {
    Open,
    Blocked,
}

/// What the avatar can see from its current cell: the four local walls and
/// every cell in straight line of sight down each corridor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub current_cell: Cell,
    pub heading: Heading,
    /// Indexed by [`Heading::index`].
    pub local_walls: [Passage; 4],
    pub visible_cells: BTreeSet<Cell>,
    pub on_goal: bool,
    pub apples_visible: BTreeSet<Cell>,
}

impl Observation {
    pub fn passage(&self, heading: Heading) -> Passage {
        self.local_walls[heading.index()]
    }

    /// Open neighbor cells in N, E, S, W order.
    pub fn open_neighbors(&self) -> impl Iterator<Item = (Heading, Cell)> + '_ {
        Heading::ALL
            .into_iter()
            .filter(|h| self.passage(*h) == Passage::Open)
            .map(|h| (h, self.current_cell.neighbor(h)))
    }
}

pub fn observe(maze: &MazeSpec, state: &AvatarState) -> Observation {
    let here = state.cell;
    let mut local_walls = [Passage::Blocked; 4];
    let mut visible_cells = BTreeSet::from([here]);
    for h in Heading::ALL {
        if maze.passable_neighbor(here, h).is_some() {
            local_walls[h.index()] = Passage::Open;
        }
        let mut cursor = here;
        while let Some(next) = maze.passable_neighbor(cursor, h) {
            visible_cells.insert(next);
            cursor = next;
        }
    }
    let apples_visible = maze.apples().intersection(&visible_cells).copied().collect();
    Observation {
        current_cell: here,
        heading: state.heading,
        local_walls,
        visible_cells,
        on_goal: maze.goal() == Some(here),
        apples_visible,
    }
}
